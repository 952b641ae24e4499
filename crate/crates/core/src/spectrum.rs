//! Eigenvalues and eigenfunctions of the (Neumann) Laplacian.
//!
//! Analytic model spaces (interval, circle, flat torus) are described in
//! closed form; discrete spaces are handled by a dense symmetric eigensolve of
//! a weighted graph Laplacian. Both expose the same [`Spectrum`] surface:
//! pointwise eigenfunction values and the carré du champ
//! `Γ(φ_i, φ_j) = <∇φ_i, ∇φ_j>` at space nodes.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::GraphOperator;
use crate::spaces::{Node, Rescaling, SpaceModel};

/// Per-mode evaluation strategy behind a [`Spectrum`].
pub trait Eigenbasis: Send + Sync + Debug {
    fn value(&self, i: usize, node: Node<'_>) -> f64;

    fn carre(&self, i: usize, j: usize, node: Node<'_>) -> f64;

    /// Dimension of the orthonormal tangent frame used by [`Eigenbasis::gradient`],
    /// if gradients are available in closed form.
    fn gradient_dim(&self) -> Option<usize> {
        None
    }

    /// Gradient of `φ_i` at `node` in an orthonormal tangent frame.
    fn gradient(&self, _i: usize, _node: Node<'_>, _out: &mut [f64]) {
        unreachable!("basis has no closed-form gradient")
    }

    fn sup_norm(&self, _i: usize) -> Option<f64> {
        None
    }

    /// Exact `Σ_{k >= level} e^{-λ_k t} sup|φ_k|^2` over the full (infinite)
    /// spectrum, when the family is known in closed form.
    fn exact_tail(&self, _level: usize, _t: f64) -> Option<f64> {
        None
    }

    /// For product spectra, the factor mode indices of mode `i`.
    fn factor_modes(&self, _i: usize) -> Option<(usize, usize)> {
        None
    }

    fn label(&self, i: usize) -> String {
        format!("phi{i}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Analytic,
    Discrete,
}

/// Ordered eigenvalues with evaluators for eigenfunctions and their
/// carré du champ. Immutable once built.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    basis: Arc<dyn Eigenbasis>,
    kind: SpectrumKind,
    calibration: Option<f64>,
    max_residual: Option<f64>,
    complete: bool,
    /// Accumulated rescaling of the underlying space.
    scale: Rescaling,
}

impl Spectrum {
    fn new(eigenvalues: Vec<f64>, basis: Arc<dyn Eigenbasis>, kind: SpectrumKind) -> Self {
        Self {
            eigenvalues,
            basis,
            kind,
            calibration: None,
            max_residual: None,
            complete: false,
            scale: Rescaling::identity(),
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.eigenvalues[i]
    }

    pub fn mode_count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    /// Factor applied to the discrete operator so that the first nonzero
    /// eigenvalue matches its reference value.
    pub fn calibration_factor(&self) -> Option<f64> {
        self.calibration
    }

    /// Largest weighted eigen-residual `||Lφ - λφ|| / max(1, λ)` (discrete only).
    pub fn max_residual(&self) -> Option<f64> {
        self.max_residual
    }

    /// True when every eigenpair of a finite operator has been computed, so
    /// truncation at `mode_count` leaves no tail.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn eval(&self, i: usize, node: Node<'_>) -> f64 {
        self.basis.value(i, node) / self.scale.b().sqrt()
    }

    pub fn carre(&self, i: usize, j: usize, node: Node<'_>) -> f64 {
        self.basis.carre(i, j, node) / (self.scale.b() * self.scale.a().powi(2))
    }

    pub fn gradient_dim(&self) -> Option<usize> {
        self.basis.gradient_dim()
    }

    pub fn gradient(&self, i: usize, node: Node<'_>, out: &mut [f64]) {
        self.basis.gradient(i, node, out);
        let f = 1.0 / (self.scale.b().sqrt() * self.scale.a());
        out.iter_mut().for_each(|g| *g *= f);
    }

    pub fn sup_norm(&self, i: usize) -> Option<f64> {
        self.basis.sup_norm(i).map(|s| s / self.scale.b().sqrt())
    }

    pub fn exact_tail(&self, level: usize, t: f64) -> Option<f64> {
        let a2 = self.scale.a().powi(2);
        self.basis
            .exact_tail(level, t / a2)
            .map(|v| v / self.scale.b())
    }

    pub fn label(&self, i: usize) -> String {
        self.basis.label(i)
    }

    /// Index of the product mode built from factor modes `(a, b)`, if present.
    pub fn find_product_mode(&self, a: usize, b: usize) -> Option<usize> {
        (0..self.mode_count()).find(|&i| self.basis.factor_modes(i) == Some((a, b)))
    }

    /// Spectrum of the rescaled space `(X, a d, b m)`: eigenvalues `λ / a^2`,
    /// eigenfunctions renormalized by `b^{-1/2}`.
    pub fn rescaled(&self, s: Rescaling) -> Spectrum {
        let mut out = self.clone();
        let a2 = s.a() * s.a();
        out.eigenvalues = self.eigenvalues.iter().map(|l| l / a2).collect();
        out.scale = self.scale.then(s);
        out
    }

    /// `Φ[x, i] = φ_i(x)` for the first `level` modes at all nodes.
    pub fn values_matrix(&self, space: &SpaceModel, level: usize) -> DMatrix<f64> {
        DMatrix::from_fn(space.len(), level, |x, i| self.eval(i, space.node(x)))
    }
}

// ---------------------------------------------------------------------------
// Analytic families

/// Circle mode index `m` -> (frequency k, is_sine). Index 0 is the constant,
/// `2k-1` is `cos(kθ)` and `2k` is `sin(kθ)`.
fn circle_mode(m: usize) -> (usize, bool) {
    if m == 0 {
        (0, false)
    } else {
        (m.div_ceil(2), m.is_multiple_of(2))
    }
}

fn circle_eigenvalue(radius: f64, m: usize) -> f64 {
    let k = circle_mode(m).0 as f64 / radius;
    k * k
}

/// (value, arc-length derivative) of circle mode `m` at angle `theta`.
fn circle_mode_eval(radius: f64, m: usize, theta: f64) -> (f64, f64) {
    let (k, sine) = circle_mode(m);
    if k == 0 {
        return (1.0, 0.0);
    }
    let kf = k as f64;
    let (s, c) = (kf * theta).sin_cos();
    if sine {
        (SQRT_2 * s, SQRT_2 * kf / radius * c)
    } else {
        (SQRT_2 * c, -SQRT_2 * kf / radius * s)
    }
}

fn circle_sup(m: usize) -> f64 {
    if m == 0 {
        1.0
    } else {
        SQRT_2
    }
}

fn circle_label(m: usize) -> String {
    match circle_mode(m) {
        (0, _) => "1".into(),
        (k, false) => format!("cos{k}"),
        (k, true) => format!("sin{k}"),
    }
}

/// Geometric-style summation of `Σ_{m >= from} e^{-λ_m t} sup_m^2` for a circle.
fn circle_tail(radius: f64, from: usize, t: f64) -> f64 {
    let mut sum = 0.0;
    let mut m = from;
    loop {
        let term = (-circle_eigenvalue(radius, m) * t).exp() * circle_sup(m).powi(2);
        sum += term;
        if m > from + 2 && term <= sum * 1e-18 {
            break;
        }
        if term == 0.0 && m > from {
            break;
        }
        m += 1;
    }
    sum
}

#[derive(Debug)]
struct IntervalBasis;

impl Eigenbasis for IntervalBasis {
    fn value(&self, i: usize, node: Node<'_>) -> f64 {
        if i == 0 {
            1.0
        } else {
            SQRT_2 * (i as f64 * node.coords[0]).cos()
        }
    }

    fn carre(&self, i: usize, j: usize, node: Node<'_>) -> f64 {
        if i == 0 || j == 0 {
            return 0.0;
        }
        let s = node.coords[0];
        2.0 * (i * j) as f64 * (i as f64 * s).sin() * (j as f64 * s).sin()
    }

    fn gradient_dim(&self) -> Option<usize> {
        Some(1)
    }

    fn gradient(&self, i: usize, node: Node<'_>, out: &mut [f64]) {
        out[0] = if i == 0 {
            0.0
        } else {
            -SQRT_2 * i as f64 * (i as f64 * node.coords[0]).sin()
        };
    }

    fn sup_norm(&self, i: usize) -> Option<f64> {
        Some(if i == 0 { 1.0 } else { SQRT_2 })
    }

    fn exact_tail(&self, level: usize, t: f64) -> Option<f64> {
        let mut sum = 0.0;
        let mut i = level;
        loop {
            let term = if i == 0 {
                1.0
            } else {
                2.0 * (-((i * i) as f64) * t).exp()
            };
            sum += term;
            if i > level + 2 && term <= sum * 1e-18 {
                break;
            }
            i += 1;
        }
        Some(sum)
    }

    fn label(&self, i: usize) -> String {
        if i == 0 {
            "1".into()
        } else {
            format!("cos{i}")
        }
    }
}

/// `[0, π]` with normalized length measure: `λ_i = i^2`, `φ_0 = 1`,
/// `φ_i(s) = √2 cos(i s)`.
pub fn analytic_interval_spectrum(n_modes: usize) -> Result<Spectrum> {
    if n_modes == 0 {
        return Err(Error::invalid("n_modes must be at least 1"));
    }
    let eig = (0..n_modes).map(|i| (i * i) as f64).collect();
    Ok(Spectrum::new(eig, Arc::new(IntervalBasis), SpectrumKind::Analytic))
}

#[derive(Debug)]
struct CircleBasis {
    radius: f64,
}

impl Eigenbasis for CircleBasis {
    fn value(&self, i: usize, node: Node<'_>) -> f64 {
        circle_mode_eval(self.radius, i, node.coords[0]).0
    }

    fn carre(&self, i: usize, j: usize, node: Node<'_>) -> f64 {
        let th = node.coords[0];
        circle_mode_eval(self.radius, i, th).1 * circle_mode_eval(self.radius, j, th).1
    }

    fn gradient_dim(&self) -> Option<usize> {
        Some(1)
    }

    fn gradient(&self, i: usize, node: Node<'_>, out: &mut [f64]) {
        out[0] = circle_mode_eval(self.radius, i, node.coords[0]).1;
    }

    fn sup_norm(&self, i: usize) -> Option<f64> {
        Some(circle_sup(i))
    }

    fn exact_tail(&self, level: usize, t: f64) -> Option<f64> {
        Some(circle_tail(self.radius, level, t))
    }

    fn label(&self, i: usize) -> String {
        circle_label(i)
    }
}

/// `S^1(radius)` with normalized length measure. Eigenvalues `(k/r)^2` come in
/// adjacent cos/sin pairs.
pub fn analytic_circle_spectrum(radius: f64, n_modes: usize) -> Result<Spectrum> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    if n_modes == 0 {
        return Err(Error::invalid("n_modes must be at least 1"));
    }
    let eig = (0..n_modes).map(|m| circle_eigenvalue(radius, m)).collect();
    Ok(Spectrum::new(
        eig,
        Arc::new(CircleBasis { radius }),
        SpectrumKind::Analytic,
    ))
}

#[derive(Debug)]
struct TorusBasis {
    r1: f64,
    r2: f64,
    modes: Vec<(usize, usize)>,
}

impl TorusBasis {
    fn key(&self, a: usize, b: usize) -> (f64, usize, usize) {
        (circle_eigenvalue(self.r1, a) + circle_eigenvalue(self.r2, b), a, b)
    }
}

fn key_lt(x: (f64, usize, usize), y: (f64, usize, usize)) -> bool {
    x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)).is_lt()
}

impl Eigenbasis for TorusBasis {
    fn value(&self, i: usize, node: Node<'_>) -> f64 {
        let (a, b) = self.modes[i];
        circle_mode_eval(self.r1, a, node.coords[0]).0 * circle_mode_eval(self.r2, b, node.coords[1]).0
    }

    fn carre(&self, i: usize, j: usize, node: Node<'_>) -> f64 {
        let mut gi = [0.0; 2];
        let mut gj = [0.0; 2];
        self.gradient(i, node, &mut gi);
        self.gradient(j, node, &mut gj);
        gi[0] * gj[0] + gi[1] * gj[1]
    }

    fn gradient_dim(&self) -> Option<usize> {
        Some(2)
    }

    fn gradient(&self, i: usize, node: Node<'_>, out: &mut [f64]) {
        let (a, b) = self.modes[i];
        let (u, du) = circle_mode_eval(self.r1, a, node.coords[0]);
        let (v, dv) = circle_mode_eval(self.r2, b, node.coords[1]);
        out[0] = du * v;
        out[1] = u * dv;
    }

    fn sup_norm(&self, i: usize) -> Option<f64> {
        let (a, b) = self.modes[i];
        Some(circle_sup(a) * circle_sup(b))
    }

    fn exact_tail(&self, level: usize, t: f64) -> Option<f64> {
        // enumerate the lattice and skip the head (a prefix in key order)
        let last = level.checked_sub(1).map(|l| {
            let (a, b) = self.modes[l];
            self.key(a, b)
        });
        let cutoff = 745.0 / t;
        let mut sum = 0.0;
        let mut a = 0;
        while circle_eigenvalue(self.r1, a) <= cutoff {
            let la = circle_eigenvalue(self.r1, a);
            let mut b = 0;
            while la + circle_eigenvalue(self.r2, b) <= cutoff {
                let key = self.key(a, b);
                if last.is_none_or(|l| key_lt(l, key)) {
                    sum += (-key.0 * t).exp() * (circle_sup(a) * circle_sup(b)).powi(2);
                }
                b += 1;
            }
            a += 1;
        }
        Some(sum)
    }

    fn factor_modes(&self, i: usize) -> Option<(usize, usize)> {
        Some(self.modes[i])
    }

    fn label(&self, i: usize) -> String {
        let (a, b) = self.modes[i];
        format!("{}x{}", circle_label(a), circle_label(b))
    }
}

/// Flat torus `S^1(r1) x S^1(r2)`: product eigenfunctions sorted by eigenvalue
/// `(j/r1)^2 + (k/r2)^2`, ties broken by factor mode indices.
pub fn analytic_torus_spectrum(r1: f64, r2: f64, n_modes: usize) -> Result<Spectrum> {
    for (r, name) in [(r1, "r1"), (r2, "r2")] {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::invalid(format!("{name} must be positive, got {r}")));
        }
    }
    if n_modes == 0 {
        return Err(Error::invalid("n_modes must be at least 1"));
    }
    let mut cap = (n_modes as f64 / (PI * r1 * r2)) * 1.5 + 1.0 / (r1 * r1) + 1.0 / (r2 * r2);
    let mut modes = loop {
        let mut found = Vec::new();
        let mut a = 0;
        while circle_eigenvalue(r1, a) <= cap {
            let la = circle_eigenvalue(r1, a);
            let mut b = 0;
            while la + circle_eigenvalue(r2, b) <= cap {
                found.push((a, b));
                b += 1;
            }
            a += 1;
        }
        if found.len() >= n_modes {
            break found;
        }
        cap *= 2.0;
    };
    let basis = TorusBasis {
        r1,
        r2,
        modes: Vec::new(),
    };
    modes.sort_by(|x, y| {
        let kx = basis.key(x.0, x.1);
        let ky = basis.key(y.0, y.1);
        kx.0.total_cmp(&ky.0).then(kx.1.cmp(&ky.1)).then(kx.2.cmp(&ky.2))
    });
    modes.truncate(n_modes);
    let eig = modes.iter().map(|&(a, b)| basis.key(a, b).0).collect();
    Ok(Spectrum::new(
        eig,
        Arc::new(TorusBasis { r1, r2, modes }),
        SpectrumKind::Analytic,
    ))
}

// ---------------------------------------------------------------------------
// Discrete spectra

/// How a discrete operator is scaled before its eigenpairs are reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Calibration {
    None,
    Factor(f64),
    /// Scale so that the first nonzero eigenvalue equals the given value.
    FirstNonzero(f64),
}

#[derive(Debug)]
struct DiscreteBasis {
    /// `phi[(x, i)]`, weight-orthonormal columns.
    phi: DMatrix<f64>,
    /// `L phi` with the calibrated operator.
    lphi: DMatrix<f64>,
    op: GraphOperator,
    sup: Vec<f64>,
}

impl Eigenbasis for DiscreteBasis {
    fn value(&self, i: usize, node: Node<'_>) -> f64 {
        self.phi[(node.index, i)]
    }

    fn carre(&self, i: usize, j: usize, node: Node<'_>) -> f64 {
        let x = node.index;
        let l_prod = self
            .op
            .apply_at(x, |y| self.phi[(y, i)] * self.phi[(y, j)]);
        0.5 * (-l_prod + self.phi[(x, i)] * self.lphi[(x, j)] + self.phi[(x, j)] * self.lphi[(x, i)])
    }

    fn sup_norm(&self, i: usize) -> Option<f64> {
        Some(self.sup[i])
    }
}

/// The `k` smallest eigenpairs of a weight-self-adjoint PSD operator with
/// constants in its kernel, by a dense symmetric eigensolve.
pub fn discrete_spectrum(
    op: &GraphOperator,
    weights: &[f64],
    k: usize,
    calibration: Calibration,
) -> Result<Spectrum> {
    let n = op.len();
    if weights.len() != n {
        return Err(Error::invalid(format!(
            "{} weights for an operator on {n} nodes",
            weights.len()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k must be in 1..={n}, got {k}")));
    }
    if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::invalid("weights must be positive"));
    }
    let defect = op.self_adjoint_defect(weights);
    if defect > 1e-10 {
        return Err(Error::invalid(format!(
            "operator is not symmetric w.r.t. the weights (defect {defect:e})"
        )));
    }
    let dense = op.to_dense();
    let norm = dense.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    if op.max_row_sum() > 1e-9 * norm {
        return Err(Error::invalid("operator rows must sum to zero"));
    }

    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut sym = DMatrix::from_fn(n, n, |i, j| sw[i] * dense[(i, j)] / sw[j]);
    let sym_t = sym.transpose();
    sym = (sym + sym_t) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 100 * n.max(10)).ok_or_else(|| {
        Error::numeric("symmetric eigensolver did not converge", f64::NAN)
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut lambdas = Vec::with_capacity(k);
    let mut phi = DMatrix::zeros(n, k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        let mut lam = eig.eigenvalues[idx];
        if lam < 0.0 {
            if lam < -1e-9 * norm {
                return Err(Error::numeric("operator is not positive semidefinite", lam));
            }
            lam = 0.0;
        }
        lambdas.push(lam);
        let v = eig.eigenvectors.column(idx);
        for x in 0..n {
            phi[(x, col)] = v[x] / sw[x];
        }
        // deterministic sign: positive mean for the constant mode, else first
        // significant entry positive
        let mean: f64 = (0..n).map(|x| weights[x] * phi[(x, col)]).sum();
        let flip = if col == 0 {
            mean < 0.0
        } else {
            let peak = (0..n).fold(0.0_f64, |m, x| m.max(phi[(x, col)].abs()));
            let first = (0..n)
                .map(|x| phi[(x, col)])
                .find(|v| v.abs() > 1e-6 * peak)
                .unwrap_or(0.0);
            first < 0.0
        };
        if flip {
            phi.column_mut(col).neg_mut();
        }
    }

    let factor = match calibration {
        Calibration::None => 1.0,
        Calibration::Factor(f) => {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::invalid("calibration factor must be positive"));
            }
            f
        }
        Calibration::FirstNonzero(target) => {
            if k < 2 || lambdas[1] <= 0.0 {
                return Err(Error::invalid(
                    "calibration needs a nonzero second eigenvalue",
                ));
            }
            target / lambdas[1]
        }
    };
    let op = op.scaled(factor);
    lambdas.iter_mut().for_each(|l| *l *= factor);

    let mut lphi = DMatrix::zeros(n, k);
    let mut max_residual: f64 = 0.0;
    for i in 0..k {
        let col: Vec<f64> = phi.column(i).iter().copied().collect();
        let lc = op.apply(&col);
        let mut res2 = 0.0;
        for x in 0..n {
            lphi[(x, i)] = lc[x];
            res2 += weights[x] * (lc[x] - lambdas[i] * col[x]).powi(2);
        }
        max_residual = max_residual.max(res2.sqrt() / lambdas[i].max(1.0));
    }
    if max_residual > 1e-6 {
        return Err(Error::numeric(
            "eigenpairs fail the residual check",
            max_residual,
        ));
    }
    let sup = (0..k)
        .map(|i| phi.column(i).iter().fold(0.0_f64, |m, v| m.max(v.abs())))
        .collect();

    let mut spec = Spectrum::new(
        lambdas,
        Arc::new(DiscreteBasis { phi, lphi, op, sup }),
        SpectrumKind::Discrete,
    );
    spec.calibration = Some(factor);
    spec.max_residual = Some(max_residual);
    spec.complete = k == n;
    Ok(spec)
}

/// `max_{i,j} |Σ_x w(x) φ_i(x) φ_j(x) - δ_ij|` over all modes of the spectrum.
pub fn orthonormality_defect(spectrum: &Spectrum, space: &SpaceModel) -> f64 {
    let phi = spectrum.values_matrix(space, spectrum.mode_count());
    let w = nalgebra::DVector::from_vec(space.weights());
    let weighted = DMatrix::from_fn(phi.nrows(), phi.ncols(), |x, i| w[x] * phi[(x, i)]);
    let gram = phi.transpose() * weighted;
    let mut worst: f64 = 0.0;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path_laplacian, ring_laplacian};
    use crate::spaces::{build_circle_space, build_interval_space, build_torus_space};

    fn at(c: &[f64]) -> Node<'_> {
        Node { index: 0, coords: c }
    }

    #[test]
    fn interval_examples() {
        let s = analytic_interval_spectrum(5).unwrap();
        assert_eq!(s.eigenvalues(), &[0.0, 1.0, 4.0, 9.0, 16.0]);
        assert!((s.eval(1, at(&[0.0])) - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(s.eval(0, at(&[2.1])), 1.0);
        assert!((s.carre(2, 2, at(&[PI / 4.0])) - 8.0).abs() < 1e-12);
        assert!(matches!(analytic_interval_spectrum(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn circle_examples() {
        let s = analytic_circle_spectrum(1.0, 7).unwrap();
        assert_eq!(&s.eigenvalues()[5..7], &[9.0, 9.0]);
        for th in [0.0, 0.4, 2.0, 5.5] {
            let c = [th];
            let n = at(&c);
            let sum = s.carre(5, 5, n) + s.carre(6, 6, n);
            assert!((sum - 18.0).abs() < 1e-12);
        }
        let big = analytic_circle_spectrum(2.0, 3).unwrap();
        assert_eq!(big.eigenvalue(1), 0.25);
        assert!(analytic_circle_spectrum(0.0, 3).is_err());
    }

    #[test]
    fn torus_lattice_order() {
        let s = analytic_torus_spectrum(1.0, 1.0, 9).unwrap();
        assert_eq!(s.eigenvalue(0), 0.0);
        assert_eq!(&s.eigenvalues()[1..5], &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(s.eigenvalue(5), 2.0);
        assert_eq!(s.eval(0, at(&[0.3, 1.1])), 1.0);

        let thin = analytic_torus_spectrum(1.0, 0.05, 200).unwrap();
        for i in 0..200 {
            let (_, b) = thin.basis.factor_modes(i).unwrap();
            if b != 0 {
                assert!(thin.eigenvalue(i) >= 400.0 - 1e-9);
            }
        }
        assert!(thin.find_product_mode(0, 1).is_some());
    }

    /// -φ'' = λφ checked by central differences in arc length.
    #[test]
    fn analytic_eigenfunctions_solve_the_eigen_equation() {
        let cases: Vec<(Spectrum, f64)> = vec![
            (analytic_interval_spectrum(12).unwrap(), 1.0),
            (analytic_circle_spectrum(1.7, 12).unwrap(), 1.7),
        ];
        let h = 1e-4;
        for (spec, radius) in cases {
            for k in 0..20 {
                let th = 0.05 + 0.15 * k as f64;
                for i in 1..spec.mode_count() {
                    let f = |x: f64| spec.eval(i, at(&[x]));
                    let dh = h / radius;
                    let d2 = (f(th + dh) - 2.0 * f(th) + f(th - dh)) / (h * h);
                    let lhs = -d2;
                    let rhs = spec.eigenvalue(i) * f(th);
                    let scale = spec.eigenvalue(i).max(1.0) * SQRT_2;
                    assert!(((lhs - rhs) / scale).abs() < 1e-6, "mode {i} at {th}");
                }
            }
        }
    }

    #[test]
    fn torus_laplacian_by_finite_differences() {
        let spec = analytic_torus_spectrum(1.0, 0.5, 30).unwrap();
        let h = 1e-4;
        for i in 1..30 {
            let p = [0.7, 2.3];
            let f = |a: f64, b: f64| spec.eval(i, at(&[a, b]));
            let d2 = (f(p[0] + h, p[1]) - 2.0 * f(p[0], p[1]) + f(p[0] - h, p[1])) / (h * h)
                + (f(p[0], p[1] + h / 0.5) - 2.0 * f(p[0], p[1]) + f(p[0], p[1] - h / 0.5)) / (h * h);
            let rel = (-d2 - spec.eigenvalue(i) * f(p[0], p[1])).abs() / spec.eigenvalue(i).max(1.0);
            assert!(rel < 1e-5, "mode {i}: {rel}");
        }
    }

    #[test]
    fn orthonormality_defects() {
        let space = build_interval_space(4096).unwrap();
        let spec = analytic_interval_spectrum(51).unwrap();
        assert!(orthonormality_defect(&spec, &space) < 1e-6);

        let one = analytic_interval_spectrum(1).unwrap();
        let d = orthonormality_defect(&one, &space);
        assert!((d - (space.total_mass() - 1.0).abs()).abs() < 1e-15);

        let circle = build_circle_space(1.0, 64).unwrap();
        let spec = analytic_circle_spectrum(1.0, 41).unwrap();
        assert!(orthonormality_defect(&spec, &circle) < 1e-12);

        let torus = build_torus_space(1.0, 0.5, 16, 16).unwrap();
        let spec = analytic_torus_spectrum(1.0, 0.5, 40).unwrap();
        assert!(orthonormality_defect(&spec, &torus) < 1e-12);
    }

    #[test]
    fn ring_graph_matches_circle() {
        let n = 1024;
        let space = build_circle_space(1.0, n).unwrap();
        let op = ring_laplacian(n, 1.0).unwrap();
        let spec = discrete_spectrum(&op, &space.weights(), 12, Calibration::FirstNonzero(1.0)).unwrap();
        assert!(spec.eigenvalue(0).abs() < 1e-9);
        assert!((spec.eigenvalue(1) - 1.0).abs() < 1e-12);
        assert!((spec.eigenvalue(2) - 1.0).abs() < 1e-2);
        for x in (0..n).step_by(97) {
            assert!((spec.eval(0, space.node(x)) - 1.0).abs() < 1e-9);
        }
        assert!(orthonormality_defect(&spec, &space) < 1e-12);
        assert!(spec.max_residual().unwrap() < 1e-9);
        assert!(spec.calibration_factor().unwrap() > 0.99);
    }

    #[test]
    fn path_graph_matches_interval() {
        let n = 512;
        let space = build_interval_space(n).unwrap();
        let op = path_laplacian(n, PI).unwrap();
        let spec = discrete_spectrum(&op, &space.weights(), 6, Calibration::None).unwrap();
        assert!((spec.eigenvalue(1) - 1.0).abs() < 0.02);
        assert!((spec.eigenvalue(2) - 4.0).abs() < 0.08);
        assert!(orthonormality_defect(&spec, &space) < 1e-10);
    }

    #[test]
    fn discrete_rejects_nonsymmetric() {
        let op = path_laplacian(16, PI).unwrap();
        let err = discrete_spectrum(&op, &[1.0; 16], 4, Calibration::None).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
        assert!(discrete_spectrum(&op, &[1.0; 3], 4, Calibration::None).is_err());
    }

    #[test]
    fn discrete_carre_is_nonnegative_and_symmetric() {
        let n = 64;
        let space = build_circle_space(1.0, n).unwrap();
        let op = ring_laplacian(n, 1.0).unwrap();
        let spec = discrete_spectrum(&op, &space.weights(), 9, Calibration::None).unwrap();
        for x in 0..n {
            let node = space.node(x);
            assert!(spec.carre(0, 3, node).abs() < 1e-9);
            for i in 0..9 {
                assert!(spec.carre(i, i, node) >= -1e-10);
                for j in 0..9 {
                    let cij = spec.carre(i, j, node);
                    assert!((cij - spec.carre(j, i, node)).abs() < 1e-10);
                    assert!(cij * cij <= spec.carre(i, i, node) * spec.carre(j, j, node) + 1e-10 * (1.0 + cij.abs()));
                }
            }
        }
    }

    #[test]
    fn rescaled_spectrum() {
        let s = analytic_circle_spectrum(1.0, 5).unwrap();
        let r = s.rescaled(Rescaling::new(2.0, 4.0).unwrap());
        assert_eq!(r.eigenvalue(1), 0.25);
        let n = at(&[0.3]);
        assert!((r.eval(1, n) - s.eval(1, n) / 2.0).abs() < 1e-15);
        assert!((r.carre(1, 1, n) - s.carre(1, 1, n) / 16.0).abs() < 1e-15);
        let tail = r.exact_tail(3, 0.4).unwrap();
        assert!((tail - s.exact_tail(3, 0.1).unwrap() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn torus_exact_tail_matches_brute_force() {
        let spec = analytic_torus_spectrum(1.0, 0.5, 3000).unwrap();
        let t = 0.05;
        // the spectrum holds enough modes that the neglected part is < 1e-30
        for level in [1, 10, 57, 400] {
            let brute: f64 = (level..spec.mode_count())
                .map(|i| (-spec.eigenvalue(i) * t).exp() * spec.sup_norm(i).unwrap().powi(2))
                .sum();
            let exact = spec.exact_tail(level, t).unwrap();
            assert!((exact - brute).abs() <= 1e-12 * exact.max(1e-300) + 1e-14, "{level}: {exact} vs {brute}");
        }
    }
}
