//! Pull-back metrics `g_t` of the heat-kernel embedding, tested on frames of
//! eigenfunction gradients.
//!
//! At a node, `g_t(∇f_a, ∇f_b) = Σ_i e^{-2λ_i t} Γ(φ_i, f_a) Γ(φ_i, f_b)` and the
//! canonical metric is `g(∇f_a, ∇f_b) = Γ(f_a, f_b)`. Hilbert–Schmidt norms are
//! taken relative to `g` through the congruence `C^{-1/2} G C^{-1/2}` on the
//! range of `C`, which makes them independent of the chosen frame.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::heatkernel::make_truncation_plan;
use crate::quadrature::integrate_adaptive;
use crate::spaces::{build_torus_space, SpaceModel};
use crate::spectrum::{analytic_torus_spectrum, Spectrum};

/// Eigenvalues of the canonical Gram below `RANK_TOL * max` are dropped.
pub const RANK_TOL: f64 = 1e-8;

/// `ω_n`, the volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    PI.powf(n as f64 / 2.0) / gamma_half_integer(n + 2)
}

/// `Γ(m / 2)` for a positive integer `m`.
fn gamma_half_integer(m: usize) -> f64 {
    let (mut g, mut x) = if m.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = m as f64 / 2.0;
    while x < target - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

/// `c_n = ω_n (2π)^{n/2} / (4 (4π)^n)`.
pub fn c_n_closed_form(n: usize) -> f64 {
    let nf = n as f64;
    unit_ball_volume(n) * (2.0 * PI).powf(nf / 2.0) / (4.0 * (4.0 * PI).powf(nf))
}

/// `ω_n / (4π)^n ∫_{R^n} |∂_1 e^{-|x|^2/4}|^2 dx` by adaptive quadrature; the
/// integrand factorizes into one-dimensional Gaussian moments. Returns the
/// value and the panel count of the coarser of the two factors.
pub fn c_n_quadrature(n: usize, rel_tol: f64) -> (f64, usize) {
    let half = 40.0;
    let (moment, p1) = integrate_adaptive(|x| (x * x / 4.0) * (-x * x / 2.0).exp(), -half, half, rel_tol);
    let (mass, p2) = integrate_adaptive(|x| (-x * x / 2.0).exp(), -half, half, rel_tol);
    let integral = moment * mass.powi(n as i32 - 1);
    (
        unit_ball_volume(n) / (4.0 * PI).powf(n as f64) * integral,
        p1.max(p2),
    )
}

pub fn c_n_constant(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("c_n needs n >= 1"));
    }
    let (q, _) = c_n_quadrature(n, 1e-13);
    let closed = c_n_closed_form(n);
    if (q - closed).abs() > 1e-10 * closed {
        return Err(Error::numeric(
            format!("c_{n} quadrature {q} disagrees with closed form {closed}"),
            (q - closed).abs() / closed,
        ));
    }
    Ok(q)
}

/// A metric evaluated on a frame of eigenfunction gradients at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSample {
    pub node: usize,
    pub gram: DMatrix<f64>,
    pub frame: Vec<usize>,
    /// HS norm relative to the canonical metric; `None` at degenerate nodes.
    pub hs_rel: Option<f64>,
    /// `Σ_a λ_{f_a}`, the frame's mean gradient energy; sets the scale below
    /// which a canonical Gram counts as zero.
    pub frame_energy: f64,
}

fn check_frame(spectrum: &Spectrum, frame: &[usize]) -> Result<()> {
    if frame.is_empty() {
        return Err(Error::invalid("frame must not be empty"));
    }
    for &f in frame {
        if f == 0 || f >= spectrum.mode_count() {
            return Err(Error::invalid(format!(
                "frame index {f} must be a nonconstant mode below {}",
                spectrum.mode_count()
            )));
        }
    }
    Ok(())
}

/// Default frame: the first `2n` nonconstant eigenfunctions.
pub fn default_frame(spectrum: &Spectrum, n: usize) -> Vec<usize> {
    (1..=2 * n).filter(|&i| i < spectrum.mode_count()).collect()
}

fn frame_energy(spectrum: &Spectrum, frame: &[usize]) -> f64 {
    frame.iter().map(|&f| spectrum.eigenvalue(f)).sum()
}

pub fn canonical_gram(spectrum: &Spectrum, space: &SpaceModel, node: usize, frame: &[usize]) -> Result<MetricSample> {
    check_frame(spectrum, frame)?;
    let n = space.node(node);
    let k = frame.len();
    let gram = DMatrix::from_fn(k, k, |a, b| spectrum.carre(frame[a], frame[b], n));
    let gram = symmetrize(gram);
    let mut out = MetricSample {
        node,
        gram,
        frame: frame.to_vec(),
        hs_rel: None,
        frame_energy: frame_energy(spectrum, frame),
    };
    out.hs_rel = hs_norm_rel(&out, &out).ok();
    Ok(out)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// `G = Σ_{i < level} e^{-2λ_i t} Γ(φ_i, f_a) Γ(φ_i, f_b)`, summed through the
/// closed-form gradients `G = F^T T F` when available.
pub fn gt_gram(
    spectrum: &Spectrum,
    space: &SpaceModel,
    node: usize,
    t: f64,
    level: usize,
    frame: &[usize],
) -> Result<MetricSample> {
    let gram = match spectrum.gradient_dim() {
        Some(d) => {
            check_args(spectrum, t, level, frame)?;
            gram_by_gradients(spectrum, space, node, t, level, frame, d)
        }
        None => return gt_gram_by_carre(spectrum, space, node, t, level, frame),
    };
    finish(spectrum, space, node, frame, gram)
}

/// As [`gt_gram`], always through the carré du champ double sum.
pub fn gt_gram_by_carre(
    spectrum: &Spectrum,
    space: &SpaceModel,
    node: usize,
    t: f64,
    level: usize,
    frame: &[usize],
) -> Result<MetricSample> {
    check_args(spectrum, t, level, frame)?;
    let n = space.node(node);
    let k = frame.len();
    let mut gram = DMatrix::<f64>::zeros(k, k);
    let mut v = vec![0.0; k];
    for i in 1..level {
        let w = (-2.0 * spectrum.eigenvalue(i) * t).exp();
        if w == 0.0 {
            break;
        }
        for (a, &f) in frame.iter().enumerate() {
            v[a] = spectrum.carre(i, f, n);
        }
        for a in 0..k {
            for b in 0..k {
                gram[(a, b)] += w * v[a] * v[b];
            }
        }
    }
    finish(spectrum, space, node, frame, gram)
}

fn check_args(spectrum: &Spectrum, t: f64, level: usize, frame: &[usize]) -> Result<()> {
    check_frame(spectrum, frame)?;
    if level > spectrum.mode_count() {
        return Err(Error::invalid(format!(
            "level {level} exceeds the {} computed modes",
            spectrum.mode_count()
        )));
    }
    if !(t > 0.0) {
        return Err(Error::invalid(format!("time must be positive, got {t}")));
    }
    Ok(())
}

fn finish(
    spectrum: &Spectrum,
    space: &SpaceModel,
    node: usize,
    frame: &[usize],
    gram: DMatrix<f64>,
) -> Result<MetricSample> {
    let canon = canonical_gram(spectrum, space, node, frame)?;
    let mut out = MetricSample {
        node,
        gram: symmetrize(gram),
        frame: frame.to_vec(),
        hs_rel: None,
        frame_energy: canon.frame_energy,
    };
    out.hs_rel = hs_norm_rel(&out, &canon).ok();
    Ok(out)
}

/// `T = Σ_{i < level} e^{-2λ_i t} ∇φ_i ∇φ_i^T` at a node.
fn tangent_tensor(spectrum: &Spectrum, space: &SpaceModel, node: usize, t: f64, level: usize, d: usize) -> DMatrix<f64> {
    let n = space.node(node);
    let mut tens = DMatrix::<f64>::zeros(d, d);
    let mut g = vec![0.0; d];
    for i in 1..level {
        let w = (-2.0 * spectrum.eigenvalue(i) * t).exp();
        if w == 0.0 {
            break;
        }
        spectrum.gradient(i, n, &mut g);
        for r in 0..d {
            for c in 0..d {
                tens[(r, c)] += w * g[r] * g[c];
            }
        }
    }
    tens
}

fn frame_matrix(spectrum: &Spectrum, space: &SpaceModel, node: usize, frame: &[usize], d: usize) -> DMatrix<f64> {
    let n = space.node(node);
    let mut f = DMatrix::<f64>::zeros(d, frame.len());
    let mut g = vec![0.0; d];
    for (a, &idx) in frame.iter().enumerate() {
        spectrum.gradient(idx, n, &mut g);
        for r in 0..d {
            f[(r, a)] = g[r];
        }
    }
    f
}

fn gram_by_gradients(
    spectrum: &Spectrum,
    space: &SpaceModel,
    node: usize,
    t: f64,
    level: usize,
    frame: &[usize],
    d: usize,
) -> DMatrix<f64> {
    let tens = tangent_tensor(spectrum, space, node, t, level, d);
    let f = frame_matrix(spectrum, space, node, frame, d);
    f.transpose() * tens * f
}

/// `||C^{-1/2} G C^{-1/2}||_F` on the numerical range of `C`.
pub fn hs_norm_rel(metric: &MetricSample, canon: &MetricSample) -> Result<f64> {
    if metric.node != canon.node || metric.frame != canon.frame {
        return Err(Error::invalid("metric and canonical samples differ in node or frame"));
    }
    let half = range_inverse_sqrt(canon)?;
    Ok((&half * &metric.gram * &half).norm())
}

/// `C^{+1/2}` restricted to the range of `C`.
fn range_inverse_sqrt(canon: &MetricSample) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(canon.gram.clone());
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    if !(top > 1e-20 * canon.frame_energy.max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateFrame { node: canon.node });
    }
    let k = canon.gram.nrows();
    let mut out = DMatrix::<f64>::zeros(k, k);
    for (j, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev > RANK_TOL * top {
            let v = eig.eigenvectors.column(j);
            out += (v * v.transpose()) / ev.sqrt();
        }
    }
    Ok(out)
}

/// `|g_t|_HS^2` at a node through the double eigen-sum
/// `Σ_{i,j} e^{-2(λ_i+λ_j)t} Γ(φ_i, φ_j)^2`.
pub fn hs_norm_sq_double_sum(spectrum: &Spectrum, space: &SpaceModel, node: usize, t: f64, level: usize) -> f64 {
    let n = space.node(node);
    let w: Vec<f64> = (0..level).map(|i| (-2.0 * spectrum.eigenvalue(i) * t).exp()).collect();
    let mut s = 0.0;
    for i in 1..level {
        for j in 1..level {
            let c = spectrum.carre(i, j, n);
            s += w[i] * w[j] * c * c;
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingKind {
    /// `t m(B_sqrt(t)(x)) g_t`.
    Hat,
    /// `t^{(n+2)/2} g_t`.
    Tilde,
}

impl std::str::FromStr for ScalingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hat" => Ok(Self::Hat),
            "tilde" => Ok(Self::Tilde),
            other => Err(Error::invalid(format!("unknown scaling law '{other}' (hat|tilde)"))),
        }
    }
}

/// Per-node scale factors of a rescaling at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingLaw {
    pub kind: ScalingKind,
    pub n: usize,
    pub t: f64,
    pub values: Vec<f64>,
    /// Set when `t` is below the space's resolution floor.
    pub flagged: bool,
}

impl ScalingLaw {
    pub fn new(kind: ScalingKind, space: &SpaceModel, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("time must be positive, got {t}")));
        }
        let n = space.essential_dim();
        let values = match kind {
            ScalingKind::Hat => (0..space.len()).map(|x| t * space.ball_volume(x, t.sqrt())).collect(),
            ScalingKind::Tilde => vec![t.powf((n as f64 + 2.0) / 2.0); space.len()],
        };
        Ok(Self {
            kind,
            n,
            t,
            values,
            flagged: t < space.trust_floor_t(),
        })
    }

    /// Coefficient `κ(x)` of the limit metric `κ g`: `c_n` for the hat law and
    /// `c_n / (ω_n θ(x))` for the tilde law.
    pub fn limit_coefficient(&self, space: &SpaceModel, node: usize) -> Result<f64> {
        let cn = c_n_constant(self.n)?;
        match self.kind {
            ScalingKind::Hat => Ok(cn),
            ScalingKind::Tilde => {
                let th = space
                    .theta(node)
                    .ok_or_else(|| Error::invalid("tilde law needs a known density; space has none"))?;
                Ok(cn / (unit_ball_volume(self.n) * th))
            }
        }
    }
}

/// Multiplies each sample's Gram and HS norm by the node's scale factor.
pub fn apply_scaling(samples: &[MetricSample], law: &ScalingLaw) -> Vec<MetricSample> {
    samples
        .iter()
        .map(|s| {
            let f = law.values[s.node];
            MetricSample {
                gram: &s.gram * f,
                hs_rel: s.hs_rel.map(|h| h * f),
                ..s.clone()
            }
        })
        .collect()
}

/// How many modes to keep at each time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelPolicy {
    Fixed(usize),
    /// Level of the kernel truncation plan at `t_min = t` with this tolerance.
    Plan(f64),
}

impl LevelPolicy {
    pub fn level(&self, spectrum: &Spectrum, space: &SpaceModel, t: f64) -> Result<usize> {
        match *self {
            LevelPolicy::Fixed(l) => Ok(l.min(spectrum.mode_count())),
            LevelPolicy::Plan(tol) => Ok(make_truncation_plan(
                spectrum,
                t,
                tol,
                space.essential_dim() as f64,
                space.diameter(),
            )?
            .level),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub t: f64,
    pub level: usize,
    /// `||scaled g_t - κ g||_{L^2 HS} / ||κ g||_{L^2 HS}`.
    pub l2_rel_err: f64,
    /// `sup_x |scaled g_t - κ g|_HS`.
    pub linf_err: f64,
    /// `||scaled g_t||_{L^2 HS}`.
    pub hs_l2: f64,
    /// Node mean and spread of `|scaled g_t|_HS`.
    pub scaled_mean: f64,
    pub scaled_spread: f64,
    /// Node-wise `|scaled g_t - κ g|_HS`, in node order (NaN where skipped).
    pub node_err: Vec<f64>,
    pub flagged: bool,
    /// Nodes where the canonical Gram vanishes and the HS norm is undefined.
    pub skipped: usize,
}

pub fn convergence_curve(
    spectrum: &Spectrum,
    space: &SpaceModel,
    law: ScalingKind,
    t_grid: &[f64],
    level_policy: LevelPolicy,
    frame: Option<&[usize]>,
) -> Result<Vec<ConvergenceRecord>> {
    if t_grid.is_empty() {
        return Err(Error::invalid("time grid is empty"));
    }
    if law == ScalingKind::Tilde && !space.has_theta() {
        return Err(Error::invalid("tilde law needs a known density; space has none"));
    }
    let frame = frame
        .map(|f| f.to_vec())
        .unwrap_or_else(|| default_frame(spectrum, space.essential_dim()));
    let canon: Vec<Option<(MetricSample, DMatrix<f64>)>> = (0..space.len())
        .map(|x| {
            let c = canonical_gram(spectrum, space, x, &frame)?;
            Ok(match range_inverse_sqrt(&c) {
                Ok(h) => Some((c, h)),
                Err(Error::DegenerateFrame { .. }) => None,
                Err(e) => return Err(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let scaling = ScalingLaw::new(law, space, t)?;
        let level = level_policy.level(spectrum, space, t)?;
        let mut err_sq = 0.0;
        let mut lim_sq = 0.0;
        let mut hs_sq = 0.0;
        let mut linf: f64 = 0.0;
        let mut skipped = 0;
        let mut node_err = vec![f64::NAN; space.len()];
        let mut vals = Vec::new();
        for x in 0..space.len() {
            let Some((c, half)) = &canon[x] else {
                skipped += 1;
                continue;
            };
            let g = gt_gram(spectrum, space, x, t, level, &frame)?;
            let scaled = &g.gram * scaling.values[x];
            let kappa = scaling.limit_coefficient(space, x)?;
            let limit = &c.gram * kappa;
            let w = space.weight(x);
            let e = (half * (&scaled - &limit) * half).norm();
            let l = (half * &limit * half).norm();
            let s = (half * &scaled * half).norm();
            err_sq += w * e * e;
            lim_sq += w * l * l;
            hs_sq += w * s * s;
            linf = linf.max(e);
            node_err[x] = e;
            vals.push(s);
        }
        let (mean, spread) = if vals.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (mean, hi - lo)
        };
        out.push(ConvergenceRecord {
            t,
            level,
            l2_rel_err: (err_sq / lim_sq).sqrt(),
            linf_err: linf,
            hs_l2: hs_sq.sqrt(),
            scaled_mean: mean,
            scaled_spread: spread,
            node_err,
            flagged: scaling.flagged,
            skipped,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationCurve {
    pub t: f64,
    pub reference_level: usize,
    /// `(level, ||g_t - g_t^level||_{L^2 HS})`.
    pub errors: Vec<(usize, f64)>,
    /// First level of the grid whose error is at most `eps`.
    pub n0: Option<usize>,
    pub eps: f64,
}

/// L²-HS distance between `g_t` (at a reference level whose kernel tail is
/// below `1e-12`) and its truncations on `level_grid`.
pub fn truncation_error_curve(
    spectrum: &Spectrum,
    space: &SpaceModel,
    t: f64,
    level_grid: &[usize],
    frame: Option<&[usize]>,
    eps: f64,
) -> Result<TruncationCurve> {
    if level_grid.is_empty() {
        return Err(Error::invalid("level grid is empty"));
    }
    let frame = frame
        .map(|f| f.to_vec())
        .unwrap_or_else(|| default_frame(spectrum, space.essential_dim()));
    let reference = make_truncation_plan(
        spectrum,
        t,
        1e-12 * t.min(1.0),
        space.essential_dim() as f64,
        space.diameter(),
    )?
    .level;
    let mut levels: Vec<usize> = level_grid.iter().map(|&l| l.min(reference)).collect();
    levels.sort_unstable();
    levels.dedup();
    let mut sq = vec![0.0; levels.len()];
    for x in 0..space.len() {
        let c = canonical_gram(spectrum, space, x, &frame)?;
        let half = match range_inverse_sqrt(&c) {
            Ok(h) => h,
            Err(Error::DegenerateFrame { .. }) => continue,
            Err(e) => return Err(e),
        };
        let full = gt_gram(spectrum, space, x, t, reference, &frame)?.gram;
        for (k, &l) in levels.iter().enumerate() {
            let part = gt_gram(spectrum, space, x, t, l, &frame)?.gram;
            let e = (&half * (&full - part) * &half).norm();
            sq[k] += space.weight(x) * e * e;
        }
    }
    let errors: Vec<(usize, f64)> = levels.iter().zip(&sq).map(|(&l, &s)| (l, s.sqrt())).collect();
    let n0 = errors.iter().find(|e| e.1 <= eps).map(|e| e.0);
    Ok(TruncationCurve {
        t,
        reference_level: reference,
        errors,
        n0,
        eps,
    })
}

/// `Σ_x w(x) |c^{-1} t m(B_sqrt(t)(x)) g_t|_HS^2` and
/// `Σ_x w(x) |c^{-1} ĝ_t - g|_HS^2`, for a given normalizing constant `c`.
pub fn hat_scaled_norms(
    spectrum: &Spectrum,
    space: &SpaceModel,
    t: f64,
    level: usize,
    frame: &[usize],
    c: f64,
) -> Result<(f64, f64)> {
    let law = ScalingLaw::new(ScalingKind::Hat, space, t)?;
    let mut norm_sq = 0.0;
    let mut err_sq = 0.0;
    for x in 0..space.len() {
        let canon = canonical_gram(spectrum, space, x, frame)?;
        let half = range_inverse_sqrt(&canon)?;
        let g = gt_gram(spectrum, space, x, t, level, frame)?;
        let scaled = &g.gram * (law.values[x] / c);
        let s = (&half * &scaled * &half).norm();
        let e = (&half * (&scaled - &canon.gram) * &half).norm();
        norm_sq += space.weight(x) * s * s;
        err_sq += space.weight(x) * e * e;
    }
    let mass = space.total_mass();
    Ok((norm_sq / mass, err_sq / mass))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseReport {
    pub r: f64,
    /// `(t, ||c_2^{-1} ĝ_t - g||_{L^2 HS}, ||c_2^{-1} ĝ_t||^2_{L^2 HS})` per grid time.
    pub curve: Vec<(f64, f64, f64)>,
    pub t_r: f64,
    /// Squared norm at `t_r` over the circle's limiting value `1`.
    pub ratio: f64,
    /// Set when the optimal grid time lies outside the collapsed window `t < r^2`.
    pub inconclusive: bool,
    /// Largest kernel tail bound of the per-time truncation plans.
    pub tail_bound: f64,
}

/// Collapsing flat torus `S^1(1) x S^1(r)`: locates the grid time where
/// `c_2^{-1} ĝ_t` is closest to `g` and reports its squared norm against the
/// value 1 of the circle limit.
pub fn collapse_experiment(r: f64, t_grid: &[f64], nodes_per_side: usize) -> Result<CollapseReport> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("radius must be positive, got {r}")));
    }
    if t_grid.is_empty() {
        return Err(Error::invalid("time grid is empty"));
    }
    let t_min = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    if !(t_min > 0.0) {
        return Err(Error::invalid("times must be positive"));
    }
    let space = build_torus_space(1.0, r, nodes_per_side, nodes_per_side)?;
    let lam_max = 60.0 / t_min;
    let modes = (1.3 * PI * r * lam_max + 4.0 * (1.0 + r) * lam_max.sqrt() + 100.0) as usize;
    let spectrum = analytic_torus_spectrum(1.0, r, modes)?;
    let frame = collapse_frame(&spectrum)?;
    let c2 = c_n_constant(2)?;
    let mut curve = Vec::with_capacity(t_grid.len());
    let mut tail_bound: f64 = 0.0;
    for &t in t_grid {
        let plan = make_truncation_plan(&spectrum, t, 1e-10, 2.0, space.diameter())?;
        tail_bound = tail_bound.max(plan.tail_bound);
        let (norm_sq, err_sq) = hat_scaled_norms(&spectrum, &space, t, plan.level, &frame, c2)?;
        curve.push((t, err_sq.sqrt(), norm_sq));
    }
    let best = curve
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty grid");
    Ok(CollapseReport {
        r,
        curve,
        t_r: best.0,
        ratio: best.2,
        inconclusive: best.0 >= r * r,
        tail_bound,
    })
}

/// `{(cos, 0), (sin, 0), (0, cos), (0, sin)}` of the first frequencies, which
/// spans both tangent directions at every point.
pub fn collapse_frame(spectrum: &Spectrum) -> Result<Vec<usize>> {
    [(1, 0), (2, 0), (0, 1), (0, 2)]
        .iter()
        .map(|&(a, b)| {
            spectrum
                .find_product_mode(a, b)
                .ok_or_else(|| Error::invalid(format!("product mode ({a},{b}) not computed")))
        })
        .collect()
}
