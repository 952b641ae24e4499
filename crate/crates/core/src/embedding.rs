//! Heat-kernel embedding coordinates and comparisons between images.
//!
//! A node `x` maps to `(e^{-λ_i t} φ_i(x))_{i < level}`, the coordinates of
//! the truncated `p(x, ., t)` in the orthonormal eigenbasis, so Euclidean
//! distances between rows are `L^2` distances between kernel slices.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spaces::SpaceModel;
use crate::spectrum::Spectrum;

#[derive(Debug, Clone)]
pub struct EmbeddingImage {
    /// `coords[(x, i)] = e^{-λ_i t} φ_i(x)`.
    pub coords: DMatrix<f64>,
    pub t: f64,
    pub level: usize,
    /// Eigenvalues of the kept modes, used to find clusters for alignment.
    pub eigenvalues: Vec<f64>,
    pub source: String,
}

impl EmbeddingImage {
    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn row(&self, x: usize) -> Vec<f64> {
        self.coords.row(x).iter().copied().collect()
    }

    /// Writes `node,c0,..` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["node".to_string()];
        header.extend((0..self.level).map(|i| format!("c{i}")));
        w.write_record(&header).map_err(csv_err)?;
        for x in 0..self.len() {
            let mut rec = vec![x.to_string()];
            rec.extend(self.coords.row(x).iter().map(|v| format!("{v}")));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn embed(spectrum: &Spectrum, space: &SpaceModel, t: f64, level: usize) -> Result<EmbeddingImage> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("embedding time must be positive, got {t}")));
    }
    if level == 0 || level > spectrum.mode_count() {
        return Err(Error::invalid(format!(
            "level {level} outside 1..={} available modes",
            spectrum.mode_count()
        )));
    }
    let decay: Vec<f64> = (0..level).map(|i| (-spectrum.eigenvalue(i) * t).exp()).collect();
    let coords = DMatrix::from_fn(space.len(), level, |x, i| decay[i] * spectrum.eval(i, space.node(x)));
    Ok(EmbeddingImage {
        coords,
        t,
        level,
        eigenvalues: spectrum.eigenvalues()[..level].to_vec(),
        source: space.name().to_string(),
    })
}

pub fn embedded_distance(image: &EmbeddingImage, x: usize, y: usize) -> f64 {
    row_dist(&image.coords, x, &image.coords, y)
}

fn row_dist(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    (0..a.ncols())
        .map(|k| (a[(i, k)] - b[(j, k)]).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `sup_x (Σ_i e^{-2λ_i t} |∇φ_i|^2(x))^{1/2}` over the nodes: a Lipschitz
/// constant of the truncated embedding with respect to the intrinsic distance.
pub fn lipschitz_constant(spectrum: &Spectrum, space: &SpaceModel, t: f64, level: usize) -> f64 {
    space
        .nodes()
        .map(|n| {
            (1..level.min(spectrum.mode_count()))
                .map(|i| (-2.0 * spectrum.eigenvalue(i) * t).exp() * spectrum.carre(i, i, n))
                .sum::<f64>()
                .max(0.0)
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// Nearest row of `b` for every row of `a`: `(index, distance)`.
fn nearest_rows(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<(usize, f64)> {
    (0..a.nrows())
        .into_par_iter()
        .map(|i| {
            let mut best = (0, f64::INFINITY);
            for j in 0..b.nrows() {
                let d = row_dist(a, i, b, j);
                if d < best.1 {
                    best = (j, d);
                }
            }
            best
        })
        .collect()
}

/// Two-sided Hausdorff distance between the row sets of two matrices.
pub fn hausdorff_rows(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let ab = nearest_rows(a, b).into_iter().map(|p| p.1).fold(0.0, f64::max);
    let ba = nearest_rows(b, a).into_iter().map(|p| p.1).fold(0.0, f64::max);
    ab.max(ba)
}

/// Consecutive index blocks of (nearly) equal eigenvalues. A boundary is kept
/// only where both spectra separate, so a tie in either image merges.
pub fn eigen_clusters(a: &[f64], b: &[f64], cluster_tol: f64) -> Vec<std::ops::Range<usize>> {
    let tied = |l: &[f64], i: usize| {
        let scale = l[i].abs().max(l[i - 1].abs());
        (l[i] - l[i - 1]).abs() <= cluster_tol * scale.max(1e-12)
    };
    let n = a.len().min(b.len());
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..n {
        if !(tied(a, i) || tied(b, i)) {
            out.push(start..i);
            start = i;
        }
    }
    if n > 0 {
        out.push(start..n);
    }
    out
}

/// An alignment policy: a block-diagonal orthogonal map applied to the
/// coordinates of the second image before measuring distances.
pub trait Alignment: Send + Sync {
    fn name(&self) -> &'static str;

    /// Orthogonal `level x level` matrix `Q` so that `B Q` is compared with `A`.
    fn align(&self, a: &EmbeddingImage, b: &EmbeddingImage) -> Result<DMatrix<f64>>;
}

pub struct NoAlignment;

impl Alignment for NoAlignment {
    fn name(&self) -> &'static str {
        "none"
    }

    fn align(&self, a: &EmbeddingImage, _b: &EmbeddingImage) -> Result<DMatrix<f64>> {
        Ok(DMatrix::identity(a.level, a.level))
    }
}

/// Per-coordinate sign flips (every block 1x1).
pub struct SignFlips {
    pub iterations: usize,
}

impl Alignment for SignFlips {
    fn name(&self) -> &'static str {
        "sign-flips"
    }

    fn align(&self, a: &EmbeddingImage, b: &EmbeddingImage) -> Result<DMatrix<f64>> {
        let blocks: Vec<_> = (0..a.level).map(|i| i..i + 1).collect();
        icp_procrustes(a, b, &blocks, self.iterations)
    }
}

/// Orthogonal mixing inside eigenvalue clusters.
pub struct BlockwiseOrthogonal {
    /// Relative eigenvalue gap below which modes share a block.
    pub cluster_tol: f64,
    pub iterations: usize,
}

impl Alignment for BlockwiseOrthogonal {
    fn name(&self) -> &'static str {
        "blockwise-orthogonal"
    }

    fn align(&self, a: &EmbeddingImage, b: &EmbeddingImage) -> Result<DMatrix<f64>> {
        let blocks = eigen_clusters(&a.eigenvalues, &b.eigenvalues, self.cluster_tol);
        icp_procrustes(a, b, &blocks, self.iterations)
    }
}

/// Alternates nearest-neighbour correspondence with blockwise orthogonal
/// Procrustes, keeping the map with the smallest Hausdorff distance. The first
/// correspondence pairs equal node indices when both images have the same
/// node count.
fn icp_procrustes(
    a: &EmbeddingImage,
    b: &EmbeddingImage,
    blocks: &[std::ops::Range<usize>],
    iterations: usize,
) -> Result<DMatrix<f64>> {
    let level = a.level;
    let mut q = DMatrix::identity(level, level);
    let mut best = (hausdorff_rows(&a.coords, &b.coords), q.clone());
    let mut pairs: Vec<(usize, usize)> = if a.len() == b.len() {
        (0..a.len()).map(|i| (i, i)).collect()
    } else {
        nearest_rows(&a.coords, &b.coords)
            .into_iter()
            .enumerate()
            .map(|(i, (j, _))| (i, j))
            .collect()
    };
    for _ in 0..iterations.max(1) {
        // cross-covariance M = Σ b_j^T a_i over corresponding rows
        let mut m = DMatrix::<f64>::zeros(level, level);
        for &(i, j) in &pairs {
            for r in 0..level {
                let br = b.coords[(j, r)];
                if br == 0.0 {
                    continue;
                }
                for c in 0..level {
                    m[(r, c)] += br * a.coords[(i, c)];
                }
            }
        }
        let mut next = DMatrix::<f64>::zeros(level, level);
        for blk in blocks {
            let k = blk.len();
            let sub = m.view((blk.start, blk.start), (k, k)).clone_owned();
            let rot = if k == 1 {
                DMatrix::from_element(1, 1, if sub[(0, 0)] < 0.0 { -1.0 } else { 1.0 })
            } else {
                let svd = sub.svd(true, true);
                match (svd.u, svd.v_t) {
                    (Some(u), Some(vt)) => u * vt,
                    _ => return Err(Error::numeric("Procrustes SVD failed", f64::NAN)),
                }
            };
            next.view_mut((blk.start, blk.start), (k, k)).copy_from(&rot);
        }
        let bq = &b.coords * &next;
        let h = hausdorff_rows(&a.coords, &bq);
        let converged = (&next - &q).norm() < 1e-13;
        q = next;
        if h < best.0 {
            best = (h, q.clone());
        }
        if converged {
            break;
        }
        let fwd = nearest_rows(&a.coords, &bq);
        let bwd = nearest_rows(&bq, &a.coords);
        pairs = fwd.into_iter().enumerate().map(|(i, (j, _))| (i, j)).collect();
        pairs.extend(bwd.into_iter().enumerate().map(|(j, (i, _))| (i, j)));
    }
    Ok(best.1)
}

/// Alignment policies by name.
pub struct AlignmentRegistry {
    policies: BTreeMap<&'static str, Box<dyn Alignment>>,
}

impl AlignmentRegistry {
    pub fn empty() -> Self {
        Self {
            policies: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, policy: Box<dyn Alignment>) {
        self.policies.insert(policy.name(), policy);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Alignment> {
        self.policies.get(name).map(|b| b.as_ref()).ok_or_else(|| {
            Error::invalid(format!(
                "unknown alignment policy '{name}' (known: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.policies.keys().copied().collect()
    }
}

impl Default for AlignmentRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(NoAlignment));
        r.register(Box::new(SignFlips { iterations: 20 }));
        r.register(Box::new(BlockwiseOrthogonal {
            cluster_tol: 1e-6,
            iterations: 20,
        }));
        r
    }
}

/// Hausdorff distance between two images after aligning the second one.
pub fn image_hausdorff(a: &EmbeddingImage, b: &EmbeddingImage, alignment: &dyn Alignment) -> Result<f64> {
    if a.level != b.level {
        return Err(Error::invalid(format!(
            "images have different levels ({} vs {})",
            a.level, b.level
        )));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("cannot compare empty images"));
    }
    let q = alignment.align(a, b)?;
    Ok(hausdorff_rows(&a.coords, &(&b.coords * q)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistortionReport {
    /// Largest embedded / intrinsic distance ratio.
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// Pair attaining the minimum ratio.
    pub argmin: (usize, usize),
    pub argmax: (usize, usize),
}

/// Extremal ratios `|Φ(x) - Φ(y)| / d(x, y)` over a pair sample. Pairs at zero
/// intrinsic distance are skipped.
pub fn distortion_report(
    image: &EmbeddingImage,
    space: &SpaceModel,
    pair_sample: &[(usize, usize)],
) -> Result<DistortionReport> {
    let mut rep: Option<DistortionReport> = None;
    for &(x, y) in pair_sample {
        if x >= image.len() || y >= image.len() {
            return Err(Error::invalid(format!("pair ({x},{y}) outside the image")));
        }
        let d = space.dist(x, y);
        if d <= 0.0 {
            continue;
        }
        let r = embedded_distance(image, x, y) / d;
        match &mut rep {
            None => {
                rep = Some(DistortionReport {
                    max_ratio: r,
                    min_ratio: r,
                    argmin: (x, y),
                    argmax: (x, y),
                })
            }
            Some(rp) => {
                if r < rp.min_ratio {
                    rp.min_ratio = r;
                    rp.argmin = (x, y);
                }
                if r > rp.max_ratio {
                    rp.max_ratio = r;
                    rp.argmax = (x, y);
                }
            }
        }
    }
    rep.ok_or_else(|| Error::invalid("pair sample has no pairs at positive distance"))
}
