//! Sparse node operators (discrete Laplacians) and the model-grid builders.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A sparse operator on node functions, stored row-wise.
///
/// Discrete Laplacians here are positive semidefinite and self-adjoint with
/// respect to the node weights: `w_i L_ij = w_j L_ji`.
#[derive(Debug, Clone)]
pub struct GraphOperator {
    rows: Vec<Vec<(usize, f64)>>,
}

impl GraphOperator {
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                if j >= n {
                    return Err(Error::invalid(format!("row {i} references column {j} >= {n}")));
                }
                if !v.is_finite() {
                    return Err(Error::invalid(format!("non-finite entry at ({i},{j})")));
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::invalid("operator must be square"));
        }
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter(|&j| m[(i, j)] != 0.0)
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().filter(|(c, _)| *c == j).map(|(_, v)| v).sum()
    }

    /// `(L f)(i)`.
    pub fn apply_at(&self, i: usize, f: impl Fn(usize) -> f64) -> f64 {
        self.rows[i].iter().map(|&(j, v)| v * f(j)).sum()
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|i| self.apply_at(i, |j| f[j])).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(j, v)| (j, v * factor)).collect())
                .collect(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Largest absolute row sum, i.e. how far constants are from the kernel.
    pub fn max_row_sum(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|(_, v)| v).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|w_i L_ij - w_j L_ji|` relative to the largest `|w_i L_ij|`.
    pub fn self_adjoint_defect(&self, weights: &[f64]) -> f64 {
        let dense = self.to_dense();
        let n = self.len();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = weights[i] * dense[(i, j)];
                let b = weights[j] * dense[(j, i)];
                worst = worst.max((a - b).abs());
                scale = scale.max(a.abs());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }
}

/// Second-difference Laplacian on a ring of `n` equally spaced nodes of a
/// circle of the given radius (spacing measured in arc length).
pub fn ring_laplacian(n: usize, radius: f64) -> Result<GraphOperator> {
    if n < 3 {
        return Err(Error::invalid("ring needs at least 3 nodes"));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid("radius must be positive"));
    }
    let h = 2.0 * PI * radius / n as f64;
    let c = 1.0 / (h * h);
    let rows = (0..n)
        .map(|i| vec![((i + n - 1) % n, -c), (i, 2.0 * c), ((i + 1) % n, -c)])
        .collect();
    GraphOperator::from_rows(rows)
}

/// Neumann second-difference Laplacian on `n` uniform nodes of `[0, length]`.
/// Self-adjoint with respect to trapezoid weights.
pub fn path_laplacian(n: usize, length: f64) -> Result<GraphOperator> {
    if n < 3 {
        return Err(Error::invalid("path needs at least 3 nodes"));
    }
    let h = length / (n - 1) as f64;
    let c = 1.0 / (h * h);
    let mut rows = Vec::with_capacity(n);
    rows.push(vec![(0, 2.0 * c), (1, -2.0 * c)]);
    for i in 1..n - 1 {
        rows.push(vec![(i - 1, -c), (i, 2.0 * c), (i + 1, -c)]);
    }
    rows.push(vec![(n - 2, -2.0 * c), (n - 1, 2.0 * c)]);
    GraphOperator::from_rows(rows)
}
