//! Truncated spectral heat kernels with certified tails.
//!
//! `p(x, y, t) = Σ_i e^{-λ_i t} φ_i(x) φ_i(y)`, truncated at a level chosen by
//! a [`TruncationPlan`]. For analytic spectra the neglected tail is summed
//! exactly; for discrete spectra it is bounded through the eigenfunction
//! growth `sup|φ_i| <= C λ_i^{N/4}` and the eigenvalue lower bound
//! `λ_i >= C0 i^{2/N}`, with constants fitted on the computed modes.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spaces::{Node, SpaceModel};
use crate::spectrum::{Spectrum, SpectrumKind};

/// Constants of the eigenfunction and eigenvalue growth bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthConstants {
    /// `C` in `sup|φ_i| <= C λ_i^{N/4}`.
    pub c_sup: f64,
    /// `C0` in `λ_i >= C0 i^{2/N}`.
    pub c0: f64,
    /// Dimension bound `N`.
    pub n_dim: f64,
    /// Diameter bound `D` (recorded, not used in the fit).
    pub diameter: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationPlan {
    /// Number of modes kept (indices `0..level`).
    pub level: usize,
    pub t_min: f64,
    /// Bound on `sup_{x,y} |p - p_level|` for every `t >= t_min`.
    pub tail_bound: f64,
    pub constants: GrowthConstants,
}

impl TruncationPlan {
    fn check(&self, spectrum: &Spectrum, t: f64) -> Result<()> {
        if self.level > spectrum.mode_count() {
            return Err(Error::invalid(format!(
                "plan level {} exceeds the {} computed modes",
                self.level,
                spectrum.mode_count()
            )));
        }
        if !(t >= self.t_min) {
            return Err(Error::invalid(format!(
                "time {t:e} below the plan's certified t_min {:e}",
                self.t_min
            )));
        }
        Ok(())
    }
}

fn sup_norm_of(spectrum: &Spectrum, space: Option<&SpaceModel>, i: usize) -> f64 {
    spectrum.sup_norm(i).unwrap_or_else(|| {
        space
            .map(|s| {
                s.nodes()
                    .map(|n| spectrum.eval(i, n).abs())
                    .fold(0.0, f64::max)
            })
            .unwrap_or(f64::NAN)
    })
}

/// Fits `C = max_i sup|φ_i| / λ_i^{N/4}` and `C0 = min_i λ_i / i^{2/N}` over the
/// computed nonconstant modes. `space` supplies nodes when sup norms are not
/// known in closed form.
pub fn fit_growth_constants(
    spectrum: &Spectrum,
    space: Option<&SpaceModel>,
    n_dim: f64,
    diameter: f64,
) -> GrowthConstants {
    let mut c_sup: f64 = 0.0;
    let mut c0 = f64::INFINITY;
    for i in 1..spectrum.mode_count() {
        let lam = spectrum.eigenvalue(i);
        if lam <= 0.0 {
            continue;
        }
        c_sup = c_sup.max(sup_norm_of(spectrum, space, i) / lam.powf(n_dim / 4.0));
        c0 = c0.min(lam / (i as f64).powf(2.0 / n_dim));
    }
    if !c0.is_finite() {
        c0 = 0.0;
    }
    GrowthConstants {
        c_sup,
        c0,
        n_dim,
        diameter,
    }
}

/// Tail bound for each level `0..=M` at time `t`.
fn tails(spectrum: &Spectrum, gc: &GrowthConstants, t: f64) -> Vec<f64> {
    let m = spectrum.mode_count();
    let mut out = vec![0.0; m + 1];
    if spectrum.kind() == SpectrumKind::Analytic {
        if let Some(beyond) = spectrum.exact_tail(m, t) {
            out[m] = beyond;
            for i in (0..m).rev() {
                let s = spectrum.sup_norm(i).unwrap_or(1.0);
                out[i] = out[i + 1] + (-spectrum.eigenvalue(i) * t).exp() * s * s;
            }
            return out;
        }
    }
    let bound = |lam: f64| -> f64 {
        if lam <= 0.0 {
            1.0
        } else {
            (-lam * t).exp() * (gc.c_sup * lam.powf(gc.n_dim / 4.0)).powi(2)
        }
    };
    out[m] = if spectrum.is_complete() {
        0.0
    } else {
        extrapolated_tail(spectrum, gc, t)
    };
    for i in (0..m).rev() {
        out[i] = out[i + 1]
            + if i == 0 {
                spectrum.sup_norm(0).unwrap_or(1.0).powi(2)
            } else {
                bound(spectrum.eigenvalue(i))
            };
    }
    out
}

/// `Σ_{i >= M} sup_{λ >= max(C0 i^{2/N}, λ_{M-1})} e^{-λ t} C^2 λ^{N/2}`.
fn extrapolated_tail(spectrum: &Spectrum, gc: &GrowthConstants, t: f64) -> f64 {
    let m = spectrum.mode_count();
    let last = spectrum.eigenvalue(m - 1);
    let peak = gc.n_dim / (2.0 * t);
    let f = |lam: f64| (-lam * t).exp() * gc.c_sup.powi(2) * lam.powf(gc.n_dim / 2.0);
    let mut sum = 0.0;
    let mut i = m;
    loop {
        let lower = (gc.c0 * (i as f64).powf(2.0 / gc.n_dim)).max(last);
        let term = f(lower.max(peak));
        sum += term;
        if !term.is_finite() {
            return f64::INFINITY;
        }
        if lower > peak && term <= 1e-18 * sum.max(f64::MIN_POSITIVE) {
            break;
        }
        if i - m > 50_000_000 {
            return f64::INFINITY;
        }
        i += 1;
    }
    sum
}

/// Smallest level whose kernel tail at `t_min` is at most `tol`.
pub fn make_truncation_plan(
    spectrum: &Spectrum,
    t_min: f64,
    tol: f64,
    n_dim: f64,
    diameter: f64,
) -> Result<TruncationPlan> {
    make_truncation_plan_on(spectrum, None, t_min, tol, n_dim, diameter)
}

/// As [`make_truncation_plan`], with a space supplying nodes for sup norms.
pub fn make_truncation_plan_on(
    spectrum: &Spectrum,
    space: Option<&SpaceModel>,
    t_min: f64,
    tol: f64,
    n_dim: f64,
    diameter: f64,
) -> Result<TruncationPlan> {
    if !(t_min > 0.0 && t_min.is_finite()) {
        return Err(Error::invalid(format!("t_min must be positive, got {t_min}")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    if !(n_dim > 0.0) {
        return Err(Error::invalid("dimension bound N must be positive"));
    }
    let gc = fit_growth_constants(spectrum, space, n_dim, diameter);
    let tails = tails(spectrum, &gc, t_min);
    let m = spectrum.mode_count();
    match (1..=m).find(|&l| tails[l] <= tol) {
        Some(level) => Ok(TruncationPlan {
            level,
            t_min,
            tail_bound: tails[level],
            constants: gc,
        }),
        None => Err(Error::Capacity {
            requested: tol,
            achievable: tails[m],
            modes: m,
        }),
    }
}

/// A plan keeping every computed mode, with its tail bound.
pub fn full_plan(spectrum: &Spectrum, t_min: f64, n_dim: f64) -> TruncationPlan {
    let gc = fit_growth_constants(spectrum, None, n_dim, f64::NAN);
    let tails = tails(spectrum, &gc, t_min);
    TruncationPlan {
        level: spectrum.mode_count(),
        t_min,
        tail_bound: tails[spectrum.mode_count()],
        constants: gc,
    }
}

/// `Σ_{i < level} e^{-λ_i t} φ_i(x) φ_i(y)`.
pub fn heat_kernel(
    spectrum: &Spectrum,
    x: Node<'_>,
    y: Node<'_>,
    t: f64,
    plan: &TruncationPlan,
) -> Result<f64> {
    plan.check(spectrum, t)?;
    Ok(kernel_sum(spectrum, x, y, t, plan.level))
}

fn kernel_sum(spectrum: &Spectrum, x: Node<'_>, y: Node<'_>, t: f64, level: usize) -> f64 {
    (0..level)
        .map(|i| (-spectrum.eigenvalue(i) * t).exp() * (spectrum.eval(i, x) * spectrum.eval(i, y)))
        .sum()
}

/// `<∇_x p(x, y, t), ∇φ_f(x)> = Σ_i e^{-λ_i t} φ_i(y) Γ(φ_i, φ_f)(x)`.
pub fn heat_kernel_gradient_pairing(
    spectrum: &Spectrum,
    x: Node<'_>,
    y: Node<'_>,
    t: f64,
    f_index: usize,
    plan: &TruncationPlan,
) -> Result<f64> {
    plan.check(spectrum, t)?;
    if f_index >= spectrum.mode_count() {
        return Err(Error::invalid(format!("test function index {f_index} out of range")));
    }
    Ok((0..plan.level)
        .map(|i| (-spectrum.eigenvalue(i) * t).exp() * spectrum.eval(i, y) * spectrum.carre(i, f_index, x))
        .sum())
}

/// `|∇_x p(x, y, t)|`, from closed-form gradients when available, otherwise
/// from the carré du champ double sum.
pub fn heat_kernel_gradient_norm(
    spectrum: &Spectrum,
    x: Node<'_>,
    y: Node<'_>,
    t: f64,
    plan: &TruncationPlan,
) -> Result<f64> {
    plan.check(spectrum, t)?;
    let coef: Vec<f64> = (0..plan.level)
        .map(|i| (-spectrum.eigenvalue(i) * t).exp() * spectrum.eval(i, y))
        .collect();
    if let Some(dim) = spectrum.gradient_dim() {
        let mut acc = vec![0.0; dim];
        let mut g = vec![0.0; dim];
        for (i, c) in coef.iter().enumerate() {
            spectrum.gradient(i, x, &mut g);
            for k in 0..dim {
                acc[k] += c * g[k];
            }
        }
        return Ok(acc.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    let mut sq = 0.0;
    for i in 1..coef.len() {
        for j in 1..coef.len() {
            sq += coef[i] * coef[j] * spectrum.carre(i, j, x);
        }
    }
    Ok(sq.max(0.0).sqrt())
}

/// `Σ_{i < level} e^{-λ_i t}`.
pub fn heat_trace(spectrum: &Spectrum, t: f64, plan: &TruncationPlan) -> Result<f64> {
    plan.check(spectrum, t)?;
    Ok((0..plan.level)
        .map(|i| (-spectrum.eigenvalue(i) * t).exp())
        .sum())
}

/// Dense kernel matrix `P[x, y] = p(x, y, t)` over all nodes of `space`.
pub fn kernel_matrix(
    spectrum: &Spectrum,
    space: &SpaceModel,
    t: f64,
    plan: &TruncationPlan,
) -> Result<DMatrix<f64>> {
    plan.check(spectrum, t)?;
    let phi = spectrum.values_matrix(space, plan.level);
    let decay = DMatrix::from_fn(plan.level, plan.level, |i, j| {
        if i == j {
            (-spectrum.eigenvalue(i) * t).exp()
        } else {
            0.0
        }
    });
    let mut p = &phi * decay * phi.transpose();
    for i in 0..p.nrows() {
        for j in 0..i {
            p[(i, j)] = p[(j, i)];
        }
    }
    Ok(p)
}

/// Essential dimension from the short-time heat trace: `-2` times the
/// least-squares slope of `log trace` against `log t`.
pub fn estimate_dimension(spectrum: &Spectrum, t_grid: &[f64], plan: &TruncationPlan) -> Result<f64> {
    if t_grid.len() < 3 {
        return Err(Error::invalid(format!(
            "dimension fit needs at least 3 times, got {}",
            t_grid.len()
        )));
    }
    let mut xs = Vec::with_capacity(t_grid.len());
    let mut ys = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::invalid("times must be positive"));
        }
        xs.push(t.ln());
        ys.push(heat_trace(spectrum, t, plan)?.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 1e-24) {
        return Err(Error::numeric("degenerate dimension fit: times coincide", sxx));
    }
    let slope = sxy / sxx;
    if !slope.is_finite() {
        return Err(Error::numeric("dimension fit produced a non-finite slope", slope));
    }
    Ok(-2.0 * slope)
}

/// Fitted constants of the two-sided Gaussian bound and the gradient bound
/// (both at `ε = 1`) over a sample of `(t, x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Worst `max(p / upper, lower / p)` with the fitted constants.
    pub gaussian_violation: f64,
    /// Worst `|∇p| / gradient bound`.
    pub gradient_violation: f64,
    /// Samples entering the fit.
    pub samples: usize,
    /// Samples whose kernel value is below the truncation resolution and
    /// therefore carries no information about the bound.
    pub unresolved: usize,
}

impl BoundReport {
    pub fn violation_ratio(&self) -> f64 {
        self.gaussian_violation.max(self.gradient_violation)
    }

    pub fn holds(&self) -> bool {
        self.violation_ratio() <= 1.0 && self.c1.is_finite() && self.c3.is_finite()
    }
}

/// Fits `(ln C, C')` with `z_s <= ln C + C' t_s` for all samples: `C' >= 0`
/// minimizes the mean log-gap of the envelope, then `ln C` is the smallest
/// admissible value.
fn fit_envelope(samples: &[(f64, f64)]) -> (f64, f64) {
    let ln_c = |c2: f64| {
        samples
            .iter()
            .map(|&(t, z)| z - c2 * t)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let t_mean = samples.iter().map(|s| s.0).sum::<f64>() / samples.len() as f64;
    // subgradient of ln_c(c2) + c2 * t_mean
    let slope = |c2: f64| {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for &(t, z) in samples {
            let v = z - c2 * t;
            if v > best.0 || (v == best.0 && t > best.1) {
                best = (v, t);
            }
        }
        t_mean - best.1
    };
    let mut c2 = 0.0;
    if slope(0.0) < 0.0 {
        let mut hi = 1.0;
        while slope(hi) < 0.0 && hi < 1e12 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        c2 = hi;
    }
    (ln_c(c2), c2)
}

pub fn gaussian_bound_report(
    space: &SpaceModel,
    spectrum: &Spectrum,
    t_set: &[f64],
    pair_sample: &[(usize, usize)],
    plan: &TruncationPlan,
) -> Result<BoundReport> {
    if pair_sample.is_empty() || t_set.is_empty() {
        return Err(Error::invalid("bound report needs nonempty time and pair samples"));
    }
    let mut gauss = Vec::new();
    let mut grad = Vec::new();
    let mut unresolved = 0;
    for &t in t_set {
        plan.check(spectrum, t)?;
        for &(xi, yi) in pair_sample {
            let (x, y) = (space.node(xi), space.node(yi));
            let p = heat_kernel(spectrum, x, y, t, plan)?;
            if p < -plan.tail_bound {
                return Err(Error::numeric(
                    format!("negative kernel value at t={t:e}: truncation too aggressive"),
                    p,
                ));
            }
            let diag = heat_kernel(spectrum, x, x, t, plan)?;
            let resolution = plan.tail_bound + 1e-12 * diag.abs().max(1.0);
            let m = space.ball_volume(xi, t.sqrt());
            let d2 = space.dist(xi, yi).powi(2);
            if p > 2.0 * resolution {
                let lpm = (p * m).ln();
                // upper: ln(pm) + d^2/5t <= ln C1 + C2 t; lower: -ln(pm) - d^2/3t <= same
                gauss.push((t, lpm + d2 / (5.0 * t), lpm + d2 / (5.0 * t), -lpm - d2 / (3.0 * t)));
                let g = heat_kernel_gradient_norm(spectrum, x, y, t, plan)?;
                if g > 0.0 {
                    let z = (g * t.sqrt() * m).ln() + d2 / (5.0 * t);
                    grad.push((t, z));
                }
            } else {
                unresolved += 1;
            }
        }
    }
    if gauss.is_empty() {
        return Err(Error::numeric("no resolved kernel samples", 0.0));
    }
    let env: Vec<(f64, f64)> = gauss.iter().map(|g| (g.0, g.2.max(g.3))).collect();
    let (ln_c1, c2) = fit_envelope(&env);
    let gaussian_violation = env
        .iter()
        .map(|&(t, z)| (z - c2 * t - ln_c1).exp())
        .fold(0.0, f64::max);
    let (ln_c3, c4, gradient_violation) = if grad.is_empty() {
        (f64::NEG_INFINITY, 0.0, 0.0)
    } else {
        let (l, c) = fit_envelope(&grad);
        let v = grad
            .iter()
            .map(|&(t, z)| (z - c * t - l).exp())
            .fold(0.0, f64::max);
        (l, c, v)
    };
    Ok(BoundReport {
        c1: ln_c1.exp(),
        c2,
        c3: ln_c3.exp(),
        c4,
        gaussian_violation,
        gradient_violation,
        samples: gauss.len(),
        unresolved,
    })
}

/// Checks `p̃(x, y, σ) = b^{-1} p(x, y, a^{-2} σ)` for the rescaled space
/// `(X, a d, b m)`, returning the worst error over `(x, y, σ)` samples,
/// relative to the on-diagonal value `b^{-1} p(x, x, a^{-2} σ)`. Both sides keep
/// every mode of the spectrum.
pub fn scaling_covariance_check(
    spectrum: &Spectrum,
    space: &SpaceModel,
    s: crate::spaces::Rescaling,
    samples: &[(usize, usize, f64)],
) -> Result<f64> {
    let rescaled = spectrum.rescaled(s);
    let level = spectrum.mode_count();
    let mut worst: f64 = 0.0;
    for &(xi, yi, sigma) in samples {
        if !(sigma > 0.0) {
            return Err(Error::invalid("sample times must be positive"));
        }
        let (x, y) = (space.node(xi), space.node(yi));
        let lhs = kernel_sum(&rescaled, x, y, sigma, level);
        let base = kernel_sum(spectrum, x, y, sigma / (s.a() * s.a()), level);
        let rhs = base / s.b();
        let diag = kernel_sum(spectrum, x, x, sigma / (s.a() * s.a()), level) / s.b();
        let denom = diag.abs().max(f64::MIN_POSITIVE);
        worst = worst.max((lhs - rhs).abs() / denom);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ring_laplacian;
    use crate::spaces::{build_circle_space, build_interval_space, Rescaling};
    use crate::spectrum::{
        analytic_circle_spectrum, analytic_interval_spectrum, analytic_torus_spectrum, discrete_spectrum,
        Calibration,
    };
    use std::f64::consts::PI;

    /// Direct tail summation for the interval.
    fn interval_tail_oracle(level: usize, t: f64) -> f64 {
        (level.max(1)..100_000).map(|i| 2.0 * (-((i * i) as f64) * t).exp()).sum::<f64>()
            + if level == 0 { 1.0 } else { 0.0 }
    }

    #[test]
    fn interval_plan_level_matches_tail_oracle() {
        let spec = analytic_interval_spectrum(400).unwrap();
        let plan = make_truncation_plan(&spec, 1e-3, 1e-10, 1.0, PI).unwrap();
        assert!(plan.level <= 180);
        assert!(interval_tail_oracle(plan.level, 1e-3) <= 1e-10);
        assert!(interval_tail_oracle(plan.level - 1, 1e-3) > 1e-10);
        assert!((plan.tail_bound / interval_tail_oracle(plan.level, 1e-3) - 1.0).abs() < 1e-9);
        assert!((-(180.0f64 * 180.0) * 1e-3).exp() < 1e-14);
    }

    #[test]
    fn infinite_tolerance_keeps_one_mode() {
        let spec = analytic_circle_spectrum(1.0, 10).unwrap();
        let plan = make_truncation_plan(&spec, 0.1, f64::INFINITY, 1.0, PI).unwrap();
        assert_eq!(plan.level, 1);
    }

    #[test]
    fn circle_plan_at_unit_time() {
        let spec = analytic_circle_spectrum(1.0, 40).unwrap();
        let plan = make_truncation_plan(&spec, 1.0, 1e-12, 1.0, PI).unwrap();
        assert!(plan.level <= 12, "level {}", plan.level);
        let oracle: f64 = (plan.level..2000)
            .map(|m| 2.0 * (-((m.div_ceil(2) * m.div_ceil(2)) as f64)).exp())
            .sum();
        assert!(oracle <= 1e-12);
    }

    #[test]
    fn unreachable_tolerance_is_a_capacity_error() {
        let spec = analytic_interval_spectrum(5).unwrap();
        match make_truncation_plan(&spec, 1e-3, 1e-10, 1.0, PI) {
            Err(Error::Capacity { achievable, modes, .. }) => {
                assert_eq!(modes, 5);
                assert!(achievable > 1e-10);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn discrete_plan_uses_growth_bounds() {
        let n = 128;
        let space = build_circle_space(1.0, n).unwrap();
        let op = ring_laplacian(n, 1.0).unwrap();
        let spec = discrete_spectrum(&op, &space.weights(), 40, Calibration::FirstNonzero(1.0)).unwrap();
        let plan = make_truncation_plan_on(&spec, Some(&space), 0.5, 1e-8, 1.0, PI).unwrap();
        let gc = plan.constants;
        assert!(gc.c_sup >= 2f64.sqrt() - 1e-6);
        for i in 1..40 {
            let sup = (0..n).map(|x| spec.eval(i, space.node(x)).abs()).fold(0.0, f64::max);
            assert!(sup <= gc.c_sup * spec.eigenvalue(i).powf(0.25) + 1e-12);
            assert!(spec.eigenvalue(i) >= gc.c0 * (i as f64).powf(2.0) - 1e-12);
        }
        // the certified bound dominates the actual truncation error
        let full = discrete_spectrum(&op, &space.weights(), n, Calibration::FirstNonzero(1.0)).unwrap();
        let all = full_plan(&full, 0.5, 1.0);
        assert_eq!(all.tail_bound, 0.0);
        let x = space.node(0);
        let y = space.node(17);
        let exact = heat_kernel(&full, x, y, 0.5, &all).unwrap();
        let approx = heat_kernel(&spec, x, y, 0.5, &plan).unwrap();
        assert!((exact - approx).abs() <= plan.tail_bound);
    }

    #[test]
    fn kernel_rejects_times_below_plan() {
        let spec = analytic_circle_spectrum(1.0, 200).unwrap();
        let plan = make_truncation_plan(&spec, 0.1, 1e-10, 1.0, PI).unwrap();
        let c = [0.0];
        let x = Node { index: 0, coords: &c };
        assert!(matches!(heat_kernel(&spec, x, x, 0.05, &plan), Err(Error::InvalidArgument(_))));
        assert!(heat_trace(&spec, 0.01, &plan).is_err());
    }

    #[test]
    fn kernel_tends_to_one() {
        let spec = analytic_interval_spectrum(50).unwrap();
        let plan = make_truncation_plan(&spec, 20.0, 1e-14, 1.0, PI).unwrap();
        let (a, b) = ([0.3], [2.9]);
        let p = heat_kernel(&spec, Node { index: 0, coords: &a }, Node { index: 1, coords: &b }, 40.0, &plan).unwrap();
        assert!((p - 1.0).abs() < 1e-14);
        assert!((heat_trace(&spec, 40.0, &plan).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interval_midpoint_series() {
        let spec = analytic_interval_spectrum(400).unwrap();
        let plan = make_truncation_plan(&spec, 0.5, 1e-15, 1.0, PI).unwrap();
        let c = [PI / 2.0];
        let x = Node { index: 0, coords: &c };
        let got = heat_kernel(&spec, x, x, 0.5, &plan).unwrap();
        let oracle = 1.0
            + 2.0
                * (1..200)
                    .map(|i| (-((i * i) as f64) / 2.0).exp() * ((i as f64) * PI / 2.0).cos().powi(2))
                    .sum::<f64>();
        assert!((got - oracle).abs() < 1e-14);
    }

    #[test]
    fn gradient_pairing_edge_cases() {
        let spec = analytic_interval_spectrum(300).unwrap();
        let plan = make_truncation_plan(&spec, 0.01, 1e-12, 1.0, PI).unwrap();
        let (a, b) = ([0.0], [1.3]);
        let x0 = Node { index: 0, coords: &a };
        let y = Node { index: 1, coords: &b };
        for f in 1..5 {
            assert_eq!(heat_kernel_gradient_pairing(&spec, x0, y, 0.05, f, &plan).unwrap(), 0.0);
        }
        assert_eq!(heat_kernel_gradient_pairing(&spec, y, x0, 0.05, 0, &plan).unwrap(), 0.0);
    }

    #[test]
    fn circle_gradient_pairing_matches_wrapped_gaussian_derivative() {
        let spec = analytic_circle_spectrum(1.0, 2000).unwrap();
        let t = 0.02;
        let plan = make_truncation_plan(&spec, t, 1e-13, 1.0, PI).unwrap();
        // d/dθ of the wrapped Gaussian 2π Σ_k p_1(θ, φ + 2πk, t)
        let dp = |th: f64, ph: f64| -> f64 {
            (-20..=20)
                .map(|k| {
                    let u = th - ph + 2.0 * PI * k as f64;
                    2.0 * PI * (-u / (2.0 * t)) * (-u * u / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
                })
                .sum()
        };
        for (th, ph, f) in [(0.3, 0.5, 1), (1.0, 0.2, 2), (2.0, 2.3, 3), (4.0, 3.7, 4)] {
            let (a, b) = ([th], [ph]);
            let x = Node { index: 0, coords: &a };
            let y = Node { index: 1, coords: &b };
            let got = heat_kernel_gradient_pairing(&spec, x, y, t, f, &plan).unwrap();
            let mut gf = [0.0];
            spec.gradient(f, x, &mut gf);
            let expect = dp(th, ph) * gf[0];
            assert!((got - expect).abs() <= 1e-6 * expect.abs().max(1e-3), "{got} vs {expect}");
        }
    }

    #[test]
    fn circle_trace_two_summations() {
        let spec = analytic_circle_spectrum(1.0, 4000).unwrap();
        let t = 0.01;
        let plan = make_truncation_plan(&spec, t, 1e-14, 1.0, PI).unwrap();
        let trace = heat_trace(&spec, t, &plan).unwrap();
        // integral of p(x, x, t) over the measure, by uniform quadrature
        let space = build_circle_space(1.0, 512).unwrap();
        let integral: f64 = space
            .nodes()
            .map(|n| space.weight(n.index) * heat_kernel(&spec, n, n, t, &plan).unwrap())
            .sum();
        assert!((trace - integral).abs() < 1e-10);
        let poisson = (PI / t).sqrt() * (1.0 + 2.0 * (-PI * PI / t).exp());
        assert!((trace - poisson).abs() < 1e-10);
    }

    #[test]
    fn torus_trace_is_product_of_circle_traces() {
        let torus = analytic_torus_spectrum(1.0, 0.5, 20_000).unwrap();
        let t = 0.05;
        let plan = make_truncation_plan(&torus, t, 1e-12, 2.0, PI).unwrap();
        let c1 = analytic_circle_spectrum(1.0, 2000).unwrap();
        let c2 = analytic_circle_spectrum(0.5, 2000).unwrap();
        let p1 = make_truncation_plan(&c1, t, 1e-14, 1.0, PI).unwrap();
        let p2 = make_truncation_plan(&c2, t, 1e-14, 1.0, PI).unwrap();
        let prod = heat_trace(&c1, t, &p1).unwrap() * heat_trace(&c2, t, &p2).unwrap();
        let tr = heat_trace(&torus, t, &plan).unwrap();
        assert!((tr - prod).abs() < 1e-9 * prod);
    }

    #[test]
    fn dimension_estimates() {
        let circle = analytic_circle_spectrum(1.0, 4000).unwrap();
        let plan = make_truncation_plan(&circle, 1e-3, 1e-10, 1.0, PI).unwrap();
        let grid: Vec<f64> = (0..6).map(|k| 1e-3 * 10f64.powf(k as f64 / 5.0)).collect();
        let d = estimate_dimension(&circle, &grid, &plan).unwrap();
        assert!((d - 1.0).abs() < 0.05, "{d}");

        let torus = analytic_torus_spectrum(1.0, 1.0, 20_000).unwrap();
        let plan = make_truncation_plan(&torus, 1e-2, 1e-8, 2.0, PI).unwrap();
        let grid: Vec<f64> = grid.iter().map(|t| 10.0 * t).collect();
        let d = estimate_dimension(&torus, &grid, &plan).unwrap();
        assert!((d - 2.0).abs() < 0.05, "{d}");

        assert!(matches!(
            estimate_dimension(&torus, &[1e-2], &plan),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            estimate_dimension(&torus, &[1e-2, 1e-2, 1e-2], &plan),
            Err(Error::NumericFailure { .. })
        ));
    }

    #[test]
    fn bound_report_diagonal_pair() {
        let space = build_circle_space(1.0, 64).unwrap();
        let spec = analytic_circle_spectrum(1.0, 800).unwrap();
        let plan = make_truncation_plan(&spec, 1e-3, 1e-10, 1.0, PI).unwrap();
        let ts = [1e-3, 1e-2, 0.1, 1.0];
        let rep = gaussian_bound_report(&space, &spec, &ts, &[(3, 3)], &plan).unwrap();
        assert!(rep.holds());
        // d = 0: p(x,x,t) m(B_sqrt t) <= C1 e^{C2 t} at every sampled t
        for &t in &ts {
            let n = space.node(3);
            let p = heat_kernel(&spec, n, n, t, &plan).unwrap();
            let m = space.ball_volume(3, t.sqrt());
            assert!(p * m <= rep.c1 * (rep.c2 * t).exp() * (1.0 + 1e-12));
        }
        assert!(gaussian_bound_report(&space, &spec, &[1e-4], &[(0, 1)], &plan).is_err());
        assert!(gaussian_bound_report(&space, &spec, &ts, &[], &plan).is_err());
    }

    #[test]
    fn scaling_covariance() {
        let space = build_circle_space(1.0, 32).unwrap();
        let spec = analytic_circle_spectrum(1.0, 300).unwrap();
        let samples: Vec<(usize, usize, f64)> = (0..20).map(|k| (k, (k * 7) % 32, 0.05 + 0.1 * k as f64)).collect();
        assert_eq!(scaling_covariance_check(&spec, &space, Rescaling::identity(), &samples).unwrap(), 0.0);
        let err = scaling_covariance_check(&spec, &space, Rescaling::new(2.0, 1.0).unwrap(), &samples).unwrap();
        assert!(err <= 1e-12, "{err}");

        let t: f64 = 1e-2;
        let interval = build_interval_space(64).unwrap();
        let ispec = analytic_interval_spectrum(300).unwrap();
        let x = interval.nearest_node(&[1.0]);
        let s = Rescaling::new(1.0 / t.sqrt(), 1.0 / interval.ball_volume(x, t.sqrt())).unwrap();
        let samples: Vec<(usize, usize, f64)> = (0..10).map(|k| (x, 3 * k, 0.5 + k as f64)).collect();
        let err = scaling_covariance_check(&ispec, &interval, s, &samples).unwrap();
        assert!(err <= 1e-10, "{err}");
    }
}
