//! Koopman generators `A = F(x)·∇` on collocation and finite-difference grids.
//!
//! 1D fields live on `[−1, 1]` and are discretized by Chebyshev collocation
//! at `x_j = cos(jπ/n)`. 2D fields live on a rectangle and use second-order
//! differences: centered inside, one-sided `(−3, 4, −1)/(2Δ)` on the edges.
//! Neither variant imposes boundary rows; the 1D builder instead requires the
//! field to point into the interval at both ends.

use std::f64::consts::PI;

use faer::Mat;

use crate::bounds::SemigroupConstants;
use crate::error::{Error, Result};
use crate::operators::{DenseBackend, SparseBackend};

/// Velocity sampled at the `n + 1` Chebyshev points of `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct DiscreteField1d {
    pub nodes: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl DiscreteField1d {
    pub fn chebyshev(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("Chebyshev resolution must be at least 1"));
        }
        let nodes = chebyshev_nodes(n);
        let velocity: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
        if velocity.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("velocity is not finite on the grid"));
        }
        Ok(DiscreteField1d { nodes, velocity })
    }

    /// Polynomial degree `n`.
    pub fn resolution(&self) -> usize {
        self.nodes.len() - 1
    }

    /// `(right end x = 1, left end x = −1)`; a zero velocity counts as inward.
    pub fn inward_pointing(&self) -> (bool, bool) {
        let right = self.velocity[0] <= 0.0;
        let left = self.velocity[self.velocity.len() - 1] >= 0.0;
        (right, left)
    }

    pub fn sample(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| g(x)).collect()
    }
}

/// Velocity sampled on an equispaced `nx × ny` grid. Unknowns are stored
/// x-major: index `i·ny + j` holds the point `(xs[i], ys[j])`.
#[derive(Debug, Clone)]
pub struct DiscreteField2d {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub velocity: Vec<[f64; 2]>,
}

impl DiscreteField2d {
    pub fn rectangle(
        nx: usize,
        ny: usize,
        x_range: (f64, f64),
        y_range: (f64, f64),
        f: impl Fn(f64, f64) -> [f64; 2],
    ) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::domain(format!(
                "grid needs at least 3 points per axis, got {nx}×{ny}"
            )));
        }
        for (lo, hi) in [x_range, y_range] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::domain(format!("bad axis range [{lo}, {hi}]")));
            }
        }
        let xs = linspace(x_range.0, x_range.1, nx);
        let ys = linspace(y_range.0, y_range.1, ny);
        let mut velocity = Vec::with_capacity(nx * ny);
        for &x in &xs {
            for &y in &ys {
                let v = f(x, y);
                if !(v[0].is_finite() && v[1].is_finite()) {
                    return Err(Error::domain("velocity is not finite on the grid"));
                }
                velocity.push(v);
            }
        }
        Ok(DiscreteField2d { xs, ys, velocity })
    }

    /// `n × n` grid on `[−L, L]²`.
    pub fn square(n: usize, half_width: f64, f: impl Fn(f64, f64) -> [f64; 2]) -> Result<Self> {
        Self::rectangle(
            n,
            n,
            (-half_width, half_width),
            (-half_width, half_width),
            f,
        )
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs
            .iter()
            .flat_map(move |&x| self.ys.iter().map(move |&y| (x, y)))
    }

    pub fn sample(&self, g: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.points().map(|(x, y)| g(x, y)).collect()
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// `cos(jπ/n)` for `j = 0..=n`, descending from 1 to −1.
pub fn chebyshev_nodes(n: usize) -> Vec<f64> {
    // sin form keeps the nodes exactly antisymmetric
    (0..=n)
        .map(|j| (PI * (n as f64 - 2.0 * j as f64) / (2.0 * n as f64)).sin())
        .collect()
}

/// Chebyshev differentiation matrix on [`chebyshev_nodes`]. Diagonal entries
/// are minus the off-diagonal row sums, so constants are differentiated to
/// exactly zero.
pub fn chebyshev_diff_matrix(n: usize) -> Mat<f64> {
    let x = chebyshev_nodes(n);
    let weight = |j: usize| {
        let c = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j.is_multiple_of(2) {
            c
        } else {
            -c
        }
    };
    let mut d = Mat::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut row_sum = 0.0;
        for j in 0..=n {
            if i != j {
                let v = weight(i) / weight(j) / (x[i] - x[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    d
}

/// Barycentric evaluation at `x` of the interpolant through `values` on the
/// Chebyshev points.
pub fn chebyshev_interpolate(values: &[f64], x: f64) -> f64 {
    chebyshev_interpolate_many(values, &[x])[0]
}

/// [`chebyshev_interpolate`] at several points, sharing the node setup.
pub fn chebyshev_interpolate_many(values: &[f64], xs: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    if n == 0 {
        return vec![values[0]; xs.len()];
    }
    let nodes = chebyshev_nodes(n);
    let weights: Vec<f64> = (0..=n)
        .map(|j| {
            let w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                0.5 * w
            } else {
                w
            }
        })
        .collect();
    xs.iter()
        .map(|&x| {
            let mut num = 0.0;
            let mut den = 0.0;
            for ((&xj, &fj), &w) in nodes.iter().zip(values).zip(&weights) {
                let diff = x - xj;
                if diff == 0.0 {
                    return fj;
                }
                let q = w / diff;
                num += q * fj;
                den += q;
            }
            num / den
        })
        .collect()
}

/// Dense `A = diag(F(x_j)) · D`.
pub fn build_koopman_1d(field: &DiscreteField1d) -> Result<DenseBackend> {
    let (right, left) = field.inward_pointing();
    if !right || !left {
        return Err(Error::domain(
            "velocity points out of [−1, 1]; boundary data would be needed",
        ));
    }
    let n = field.resolution();
    let mut a = chebyshev_diff_matrix(n);
    for i in 0..=n {
        let f = field.velocity[i];
        for j in 0..=n {
            a[(i, j)] *= f;
        }
    }
    DenseBackend::new(a, SemigroupConstants::contraction())
}

/// Second-order first-derivative stencil for row `i` of an `n`-point axis.
fn stencil(i: usize, n: usize, spacing: f64) -> [(usize, f64); 3] {
    let s = 0.5 / spacing;
    if i == 0 {
        [(0, -3.0 * s), (1, 4.0 * s), (2, -s)]
    } else if i == n - 1 {
        [(n - 3, s), (n - 2, -4.0 * s), (n - 1, 3.0 * s)]
    } else {
        [(i - 1, -s), (i, 0.0), (i + 1, s)]
    }
}

/// Sparse `A = F₁ ∂_x + F₂ ∂_y`.
pub fn build_koopman_2d(field: &DiscreteField2d) -> Result<SparseBackend> {
    let nx = field.xs.len();
    let ny = field.ys.len();
    if nx < 3 || ny < 3 {
        return Err(Error::domain(format!(
            "grid needs at least 3 points per axis, got {nx}×{ny}"
        )));
    }
    let dx = (field.xs[nx - 1] - field.xs[0]) / (nx - 1) as f64;
    let dy = (field.ys[ny - 1] - field.ys[0]) / (ny - 1) as f64;
    let mut entries = Vec::with_capacity(6 * nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let row = i * ny + j;
            let [f1, f2] = field.velocity[row];
            if f1 != 0.0 {
                for (ii, w) in stencil(i, nx, dx) {
                    if w != 0.0 {
                        entries.push((row, ii * ny + j, f1 * w));
                    }
                }
            }
            if f2 != 0.0 {
                for (jj, w) in stencil(j, ny, dy) {
                    if w != 0.0 {
                        entries.push((row, i * ny + jj, f2 * w));
                    }
                }
            }
        }
    }
    SparseBackend::from_triplets(nx * ny, &entries, SemigroupConstants::contraction())
}
