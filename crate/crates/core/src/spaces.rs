//! Compact metric measure spaces sampled on finite node sets.
//!
//! A [`SpaceModel`] carries chart coordinates for every node, quadrature
//! weights for the reference measure, the metric, the essential dimension and
//! (when known) the density of the measure with respect to Hausdorff measure.
//! Distances and masses are stored in base units together with an
//! accumulated [`Rescaling`], so that rescaling composes exactly.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::f64::consts::PI;
use std::io::Write;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::graph::GraphOperator;
use crate::quadrature::GaussLegendre;

/// A node of a space: its index and its chart coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Node<'a> {
    pub index: usize,
    pub coords: &'a [f64],
}

/// The rescaling `(X, d, m) -> (X, a d, b m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rescaling {
    a: f64,
    b: f64,
}

impl Rescaling {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
            return Err(Error::invalid(format!(
                "rescaling factors must be finite and positive, got a={a}, b={b}"
            )));
        }
        Ok(Self { a, b })
    }

    pub const fn identity() -> Self {
        Self { a: 1.0, b: 1.0 }
    }

    /// Distance factor.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Mass factor.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Rescaling by `self` followed by `then`.
    pub fn then(self, then: Rescaling) -> Rescaling {
        Rescaling {
            a: self.a * then.a,
            b: self.b * then.b,
        }
    }
}

/// How distances between nodes are computed, in base units.
#[derive(Debug, Clone)]
pub enum Geometry {
    /// `[0, length]` with the Euclidean distance; one chart coordinate.
    Interval { length: f64 },
    /// Circle of the given radius with arc-length distance; coordinate is the angle.
    Circle { radius: f64 },
    /// Flat product `S^1(r1) x S^1(r2)`; coordinates are the two angles.
    Torus { r1: f64, r2: f64 },
    /// Ambient Euclidean distance between coordinate vectors.
    Euclidean,
    /// Precomputed dense distance matrix (row-major), e.g. graph shortest paths.
    Table { n: usize, dist: Arc<Vec<f64>> },
}

impl Geometry {
    fn distance(&self, p: &[f64], q: &[f64], i: usize, j: usize) -> f64 {
        match self {
            Geometry::Interval { .. } => (p[0] - q[0]).abs(),
            Geometry::Circle { radius } => radius * angle_gap(p[0], q[0]),
            Geometry::Torus { r1, r2 } => {
                let d1 = r1 * angle_gap(p[0], q[0]);
                let d2 = r2 * angle_gap(p[1], q[1]);
                d1.hypot(d2)
            }
            Geometry::Euclidean => p
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Geometry::Table { n, dist } => dist[i * n + j],
        }
    }
}

/// Angular separation in `[0, π]`.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

#[derive(Debug)]
struct BallIndex {
    /// Base distances to all other nodes, ascending.
    dist: Vec<f64>,
    /// `cum[k]` = base mass of the `k` nearest other nodes.
    cum: Vec<f64>,
}

/// A compact metric measure space sampled on nodes.
#[derive(Debug, Clone)]
pub struct SpaceModel {
    name: String,
    coord_dim: usize,
    coords: Vec<f64>,
    base_weights: Vec<f64>,
    geometry: Geometry,
    essential_dim: usize,
    base_theta: Option<Vec<f64>>,
    base_diameter: f64,
    base_spacing: f64,
    scale: Rescaling,
    ball_index: Arc<Vec<OnceLock<BallIndex>>>,
}

impl SpaceModel {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        name: impl Into<String>,
        coord_dim: usize,
        coords: Vec<f64>,
        base_weights: Vec<f64>,
        geometry: Geometry,
        essential_dim: usize,
        base_theta: Option<Vec<f64>>,
        base_diameter: f64,
        base_spacing: f64,
    ) -> Self {
        let n = base_weights.len();
        debug_assert_eq!(coords.len(), n * coord_dim);
        Self {
            name: name.into(),
            coord_dim,
            coords,
            base_weights,
            geometry,
            essential_dim,
            base_theta,
            base_diameter,
            base_spacing,
            scale: Rescaling::identity(),
            ball_index: Arc::new((0..n).map(|_| OnceLock::new()).collect()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.base_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base_weights.is_empty()
    }

    pub fn coord_dim(&self) -> usize {
        self.coord_dim
    }

    pub fn coords(&self, i: usize) -> &[f64] {
        &self.coords[i * self.coord_dim..(i + 1) * self.coord_dim]
    }

    pub fn node(&self, i: usize) -> Node<'_> {
        Node {
            index: i,
            coords: self.coords(i),
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node<'_>> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn scale(&self) -> Rescaling {
        self.scale
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.base_weights[i] * self.scale.b
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.base_weights.iter().sum::<f64>() * self.scale.b
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.base_dist(i, j) * self.scale.a
    }

    fn base_dist(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.geometry.distance(self.coords(i), self.coords(j), i, j)
    }

    pub fn diameter(&self) -> f64 {
        self.base_diameter * self.scale.a
    }

    pub fn essential_dim(&self) -> usize {
        self.essential_dim
    }

    /// Density of the measure w.r.t. `H^n` at node `i`, if known.
    pub fn theta(&self, i: usize) -> Option<f64> {
        let n = self.essential_dim as i32;
        self.base_theta
            .as_ref()
            .map(|th| th[i] * self.scale.b * self.scale.a.powi(-n))
    }

    pub fn has_theta(&self) -> bool {
        self.base_theta.is_some()
    }

    /// Mean nearest-neighbour spacing, in current length units.
    pub fn spacing(&self) -> f64 {
        self.base_spacing * self.scale.a
    }

    /// Smallest time at which ball measures `m(B_sqrt(t))` are resolved by the
    /// sampling: four times the squared mean nearest-neighbour spacing.
    pub fn trust_floor_t(&self) -> f64 {
        4.0 * self.spacing().powi(2)
    }

    fn index_for(&self, i: usize) -> &BallIndex {
        self.ball_index[i].get_or_init(|| {
            let mut pairs: Vec<(f64, f64)> = (0..self.len())
                .filter(|&j| j != i)
                .map(|j| (self.base_dist(i, j), self.base_weights[j]))
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut cum = Vec::with_capacity(pairs.len() + 1);
            let mut acc = 0.0;
            cum.push(0.0);
            for &(_, w) in &pairs {
                acc += w;
                cum.push(acc);
            }
            BallIndex {
                dist: pairs.into_iter().map(|p| p.0).collect(),
                cum,
            }
        })
    }

    /// Nodal ball measure `m(B_r(x))`: the open ball, always containing the
    /// centre node's own mass; nodes at distance exactly `r` are excluded.
    pub fn ball_measure(&self, i: usize, r: f64) -> f64 {
        let rho = r / self.scale.a;
        let idx = self.index_for(i);
        let k = idx.dist.partition_point(|&d| d < rho);
        (self.base_weights[i] + idx.cum[k]) * self.scale.b
    }

    /// Ball measure from the space's own evaluator: closed form on the interval
    /// and circle, one-dimensional quadrature on flat tori, nodal sums otherwise.
    pub fn ball_volume(&self, i: usize, r: f64) -> f64 {
        let rho = r / self.scale.a;
        let mass = self.base_weights.iter().sum::<f64>();
        let base = match self.geometry {
            Geometry::Interval { length } => {
                let s = self.coords(i)[0];
                let lo = (s - rho).max(0.0);
                let hi = (s + rho).min(length);
                mass * (hi - lo).max(0.0) / length
            }
            Geometry::Circle { radius } => mass * circle_ball_fraction(radius, rho),
            Geometry::Torus { r1, r2 } => mass * torus_ball_fraction(r1, r2, rho),
            _ => return self.ball_measure(i, r),
        };
        base * self.scale.b
    }

    /// The space `(X, a d, b m)`.
    pub fn rescale(&self, s: Rescaling) -> SpaceModel {
        let mut out = self.clone();
        out.scale = self.scale.then(s);
        out
    }

    /// Rescales the measure so that it is the raw Hausdorff measure `H^n` of the
    /// model (density one) instead of a probability measure.
    pub fn with_hausdorff_measure(&self) -> Result<SpaceModel> {
        let th = self
            .theta(0)
            .ok_or_else(|| Error::invalid("space has no known density"))?;
        Ok(self.rescale(Rescaling::new(1.0, 1.0 / th)?))
    }

    /// Node index nearest to the given chart coordinates.
    pub fn nearest_node(&self, coords: &[f64]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for i in 0..self.len() {
            let d = match &self.geometry {
                Geometry::Table { .. } => Geometry::Euclidean.distance(self.coords(i), coords, 0, 0),
                g => g.distance(self.coords(i), coords, 0, 0),
            };
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    /// Writes `node,x0,..,weight` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = String::from("node");
        for k in 0..self.coord_dim {
            header.push_str(&format!(",x{k}"));
        }
        header.push_str(",weight");
        writeln!(out, "{header}")?;
        for i in 0..self.len() {
            let mut line = i.to_string();
            for c in self.coords(i) {
                line.push_str(&format!(",{c}"));
            }
            line.push_str(&format!(",{}", self.weight(i)));
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Fraction of a circle of radius `radius` covered by an open ball of radius `rho`.
pub fn circle_ball_fraction(radius: f64, rho: f64) -> f64 {
    (2.0 * rho).min(2.0 * PI * radius) / (2.0 * PI * radius)
}

/// Fraction of the flat torus `S^1(r1) x S^1(r2)` covered by a ball of radius
/// `rho`, by quadrature of the chord length over the first factor.
pub fn torus_ball_fraction(r1: f64, r2: f64, rho: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    let h1 = PI * r1;
    let h2 = PI * r2;
    let upper = rho.min(h1);
    // quarter area: int_0^upper min(h2, sqrt(rho^2 - u^2)) du
    let kink = if rho > h2 { (rho * rho - h2 * h2).sqrt() } else { 0.0 };
    let gl = GaussLegendre::new(20);
    let mut quarter = h2 * kink.min(upper);
    if upper > kink {
        // u = rho sin(phi) removes the square-root endpoint singularity
        let p0 = (kink / rho).min(1.0).asin();
        let p1 = (upper / rho).min(1.0).asin();
        quarter += gl.integrate(|p| rho * rho * p.cos() * p.cos(), p0, p1, 8);
    }
    (4.0 * quarter / (4.0 * PI * PI * r1 * r2)).min(1.0)
}

fn check_nodes(n: usize, what: &str) -> Result<()> {
    if n < 8 {
        return Err(Error::invalid(format!("{what} needs at least 8 nodes, got {n}")));
    }
    Ok(())
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::invalid(format!("{what} must be positive and finite, got {x}")));
    }
    Ok(())
}

/// `([0, π], |.|, H^1/π)` on uniform nodes with trapezoid weights.
pub fn build_interval_space(n_nodes: usize) -> Result<SpaceModel> {
    check_nodes(n_nodes, "interval")?;
    let h = PI / (n_nodes - 1) as f64;
    let coords: Vec<f64> = (0..n_nodes).map(|i| i as f64 * h).collect();
    let mut weights = vec![1.0 / (n_nodes - 1) as f64; n_nodes];
    weights[0] *= 0.5;
    weights[n_nodes - 1] *= 0.5;
    Ok(SpaceModel::assemble(
        "interval",
        1,
        coords,
        weights,
        Geometry::Interval { length: PI },
        1,
        Some(vec![1.0 / PI; n_nodes]),
        PI,
        h,
    ))
}

/// `S^1(radius)` with arc-length distance and normalized length measure.
pub fn build_circle_space(radius: f64, n_nodes: usize) -> Result<SpaceModel> {
    check_positive(radius, "radius")?;
    check_nodes(n_nodes, "circle")?;
    let coords = (0..n_nodes)
        .map(|i| 2.0 * PI * i as f64 / n_nodes as f64)
        .collect();
    Ok(SpaceModel::assemble(
        format!("circle(r={radius})"),
        1,
        coords,
        vec![1.0 / n_nodes as f64; n_nodes],
        Geometry::Circle { radius },
        1,
        Some(vec![1.0 / (2.0 * PI * radius); n_nodes]),
        PI * radius,
        2.0 * PI * radius / n_nodes as f64,
    ))
}

/// Flat torus `S^1(r1) x S^1(r2)` on a product grid with normalized measure.
pub fn build_torus_space(r1: f64, r2: f64, n1: usize, n2: usize) -> Result<SpaceModel> {
    check_positive(r1, "r1")?;
    check_positive(r2, "r2")?;
    check_nodes(n1, "torus factor 1")?;
    check_nodes(n2, "torus factor 2")?;
    let mut coords = Vec::with_capacity(2 * n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            coords.push(2.0 * PI * i as f64 / n1 as f64);
            coords.push(2.0 * PI * j as f64 / n2 as f64);
        }
    }
    let n = n1 * n2;
    let spacing = (2.0 * PI * r1 / n1 as f64).min(2.0 * PI * r2 / n2 as f64);
    Ok(SpaceModel::assemble(
        format!("torus(r1={r1},r2={r2})"),
        2,
        coords,
        vec![1.0 / n as f64; n],
        Geometry::Torus { r1, r2 },
        2,
        Some(vec![1.0 / (4.0 * PI * PI * r1 * r2); n]),
        PI * r1.hypot(r2),
        spacing,
    ))
}

/// Graph connectivity rule for point clouds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Connectivity {
    /// Connect pairs closer than the radius.
    Epsilon(f64),
    /// Symmetrized k-nearest-neighbour graph.
    Knn(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMode {
    Ambient,
    /// Shortest paths along graph edges weighted by ambient length.
    Geodesic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DuplicatePolicy {
    /// Coincident points become one node carrying their multiplicity.
    Merge,
    Error,
}

#[derive(Debug, Clone)]
pub struct PointCloudOptions {
    pub connectivity: Connectivity,
    /// Gaussian kernel width `h` in `exp(-|x-y|^2 / h^2)`.
    pub bandwidth: f64,
    pub distance: DistanceMode,
    pub duplicates: DuplicatePolicy,
    /// Density normalization exponent of the kernel (1 removes sampling density).
    pub alpha: f64,
    pub essential_dim: usize,
}

impl PointCloudOptions {
    pub fn knn(k: usize, bandwidth: f64) -> Self {
        Self {
            connectivity: Connectivity::Knn(k),
            bandwidth,
            distance: DistanceMode::Ambient,
            duplicates: DuplicatePolicy::Error,
            alpha: 1.0,
            essential_dim: 1,
        }
    }
}

const MIN_CLOUD_POINTS: usize = 32;

/// Builds a space from a point cloud together with its weighted graph Laplacian.
///
/// The kernel `exp(-|x-y|^2/h^2)` is restricted to graph edges, density
/// normalized with exponent `alpha`, and turned into the random-walk Laplacian
/// scaled by `4/h^2`. Node weights are the normalized degrees, for which the
/// operator is self-adjoint.
pub fn build_pointcloud_space(
    points: &[Vec<f64>],
    opts: &PointCloudOptions,
) -> Result<(SpaceModel, GraphOperator)> {
    if points.len() < MIN_CLOUD_POINTS {
        return Err(Error::invalid(format!(
            "point cloud needs at least {MIN_CLOUD_POINTS} points, got {}",
            points.len()
        )));
    }
    check_positive(opts.bandwidth, "bandwidth")?;
    if opts.essential_dim == 0 {
        return Err(Error::invalid("essential dimension must be at least 1"));
    }
    let dim = points[0].len();
    if dim == 0 || points.iter().any(|p| p.len() != dim || p.iter().any(|c| !c.is_finite())) {
        return Err(Error::invalid("points must share a positive dimension and be finite"));
    }

    // deduplicate
    let mut uniq: Vec<Vec<f64>> = Vec::new();
    let mut mult: Vec<f64> = Vec::new();
    for p in points {
        match uniq.iter().position(|q| q == p) {
            Some(k) => match opts.duplicates {
                DuplicatePolicy::Merge => mult[k] += 1.0,
                DuplicatePolicy::Error => {
                    return Err(Error::invalid(format!("duplicate point {p:?}")));
                }
            },
            None => {
                uniq.push(p.clone());
                mult.push(1.0);
            }
        }
    }
    let n = uniq.len();
    if n < 2 {
        return Err(Error::invalid("point cloud collapses to a single node"));
    }
    let euclid = |i: usize, j: usize| Geometry::Euclidean.distance(&uniq[i], &uniq[j], i, j);

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    match opts.connectivity {
        Connectivity::Knn(k) => {
            if k == 0 {
                return Err(Error::invalid("knn must be at least 1"));
            }
            for i in 0..n {
                let mut d: Vec<(f64, usize)> =
                    (0..n).filter(|&j| j != i).map(|j| (euclid(i, j), j)).collect();
                d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                for &(_, j) in d.iter().take(k) {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        Connectivity::Epsilon(eps) => {
            check_positive(eps, "epsilon")?;
            for i in 0..n {
                for j in i + 1..n {
                    if euclid(i, j) < eps {
                        adj[i].push(j);
                        adj[j].push(i);
                    }
                }
            }
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    let components = count_components(&adj);
    if components != 1 {
        return Err(Error::invalid(format!(
            "connectivity graph is disconnected: {components} components"
        )));
    }

    let h2 = opts.bandwidth * opts.bandwidth;
    let kernel = |i: usize, j: usize| (-euclid(i, j).powi(2) / h2).exp();
    let q: Vec<f64> = (0..n)
        .map(|i| mult[i] + adj[i].iter().map(|&j| kernel(i, j) * mult[j]).sum::<f64>())
        .collect();
    let k_alpha = |i: usize, j: usize| kernel(i, j) / (q[i] * q[j]).powf(opts.alpha);
    let deg: Vec<f64> = (0..n)
        .map(|i| adj[i].iter().map(|&j| k_alpha(i, j) * mult[j]).sum())
        .collect();
    let scale = 4.0 / h2;
    let rows = (0..n)
        .map(|i| {
            let mut row = Vec::with_capacity(adj[i].len() + 1);
            row.push((i, scale));
            for &j in &adj[i] {
                row.push((j, -scale * k_alpha(i, j) * mult[j] / deg[i]));
            }
            row
        })
        .collect();
    let op = GraphOperator::from_rows(rows)?;
    let total: f64 = (0..n).map(|i| mult[i] * deg[i]).sum();
    let weights: Vec<f64> = (0..n).map(|i| mult[i] * deg[i] / total).collect();

    let geometry = match opts.distance {
        DistanceMode::Ambient => Geometry::Euclidean,
        DistanceMode::Geodesic => Geometry::Table {
            n,
            dist: Arc::new(all_pairs_shortest_paths(&adj, &euclid)),
        },
    };
    let nn_mean = (0..n)
        .map(|i| adj[i].iter().map(|&j| euclid(i, j)).fold(f64::INFINITY, f64::min))
        .sum::<f64>()
        / n as f64;
    let coords: Vec<f64> = uniq.iter().flatten().copied().collect();
    let mut space = SpaceModel::assemble(
        "pointcloud",
        dim,
        coords,
        weights,
        geometry,
        opts.essential_dim,
        None,
        0.0,
        nn_mean,
    );
    let mut diam: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            diam = diam.max(space.base_dist(i, j));
        }
    }
    space.base_diameter = diam;
    Ok((space, op))
}

fn count_components(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    count
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

fn all_pairs_shortest_paths(adj: &[Vec<usize>], len: &dyn Fn(usize, usize) -> f64) -> Vec<f64> {
    let n = adj.len();
    let mut out = vec![f64::INFINITY; n * n];
    for s in 0..n {
        let row = &mut out[s * n..(s + 1) * n];
        row[s] = 0.0;
        let mut heap = BinaryHeap::from([HeapItem(0.0, s)]);
        while let Some(HeapItem(d, u)) = heap.pop() {
            if d > row[u] {
                continue;
            }
            for &v in &adj[u] {
                let nd = d + len(u, v);
                if nd < row[v] {
                    row[v] = nd;
                    heap.push(HeapItem(nd, v));
                }
            }
        }
    }
    out
}

/// Reads a point cloud from CSV: one point per row, comma-separated
/// coordinates, optional header row.
pub fn read_points_csv<R: std::io::Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut points = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(p) if !p.is_empty() => points.push(p),
            Ok(_) => {}
            Err(_) if row == 0 => {} // header
            Err(e) => return Err(Error::invalid(format!("row {}: {e}", row + 1))),
        }
    }
    Ok(points)
}
