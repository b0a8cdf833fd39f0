//! Generator backends: operator application, shifted solves and norms.
//!
//! A backend is a finite-dimensional stand-in for the generator `A`. The
//! residual of every shifted solve is recomputed by applying the operator
//! again, never taken from the factorization.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, SymbolicSparseColMatRef, Triplet};
use faer::Mat;
use num_complex::Complex64;

use crate::bounds::SemigroupConstants;
use crate::error::{Error, Result};

/// Finite-dimensional generator.
pub trait GeneratorBackend: Send + Sync {
    fn dimension(&self) -> usize;

    fn constants(&self) -> SemigroupConstants;

    /// `A x`.
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;

    /// `(z − A)^{-1} x` as computed by the backend's solver.
    fn solve_raw(&self, z: Complex64, x: &[Complex64]) -> Result<Vec<Complex64>>;

    /// Whether `A` has real entries, so that conjugate symmetry holds.
    fn is_real(&self) -> bool {
        true
    }
}

/// Solution of `(z − A) u = x` with its true residual.
#[derive(Debug, Clone)]
pub struct ShiftedSolve {
    pub u: Vec<Complex64>,
    /// `‖(z − A) u − x‖_∞`.
    pub residual: f64,
}

pub fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

pub fn real_part(x: &[Complex64]) -> Vec<f64> {
    x.iter().map(|v| v.re).collect()
}

/// Discrete sup-norm.
pub fn sup_norm(x: &[Complex64]) -> f64 {
    x.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

pub fn sup_norm_real(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

fn check_dimension(backend: &dyn GeneratorBackend, len: usize) -> Result<()> {
    let n = backend.dimension();
    if n != len {
        return Err(Error::Dimension {
            expected: n,
            got: len,
        });
    }
    Ok(())
}

/// `‖(z − A) u − x‖_∞`.
pub fn residual_norm(
    backend: &dyn GeneratorBackend,
    z: Complex64,
    u: &[Complex64],
    x: &[Complex64],
) -> f64 {
    let au = backend.apply(u);
    u.iter().zip(&au).zip(x).fold(0.0, |acc, ((ui, ai), xi)| {
        acc.max((z * ui - ai - xi).norm())
    })
}

/// Solve `(z − A) u = x` for `Re z > 0` and report the recomputed residual.
pub fn solve_shifted(
    backend: &dyn GeneratorBackend,
    z: Complex64,
    x: &[Complex64],
) -> Result<ShiftedSolve> {
    if z.re <= 0.0 || !z.im.is_finite() || !z.re.is_finite() {
        return Err(Error::domain(format!(
            "shift must satisfy Re z > 0, got {z}"
        )));
    }
    check_dimension(backend, x.len())?;
    if x.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return Ok(ShiftedSolve {
            u: x.to_vec(),
            residual: 0.0,
        });
    }
    let u = backend.solve_raw(z, x)?;
    if u.len() != x.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: u.len(),
        });
    }
    if u.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Solver {
            z,
            reason: "non-finite solution (singular or badly conditioned system)".into(),
        });
    }
    let residual = residual_norm(backend, z, &u, x);
    Ok(ShiftedSolve { u, residual })
}

/// Solve-error guarantee `‖ũ − u‖ ≤ ‖r‖/δ` on the line `Re z = δ`.
pub fn aposteriori_bound(residual: f64, delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::domain(format!("δ must be positive, got {delta}")));
    }
    Ok(residual / delta)
}

/// `(s − A)^m x` by `m` successive applications.
pub fn apply_shift_poly(
    backend: &dyn GeneratorBackend,
    x: &[Complex64],
    s: f64,
    m: u32,
) -> Result<Vec<Complex64>> {
    check_dimension(backend, x.len())?;
    let mut v = x.to_vec();
    for _ in 0..m {
        let av = backend.apply(&v);
        for (vi, ai) in v.iter_mut().zip(&av) {
            *vi = *vi * s - ai;
        }
    }
    Ok(v)
}

/// `‖(2δ − A)^m x‖_∞`.
pub fn graph_norm(backend: &dyn GeneratorBackend, x: &[f64], delta: f64, m: u32) -> Result<f64> {
    let v = apply_shift_poly(backend, &to_complex(x), 2.0 * delta, m)?;
    Ok(sup_norm(&v))
}

/// Dense real matrix with an LU solve per shift.
#[derive(Debug, Clone)]
pub struct DenseBackend {
    a: Mat<f64>,
    constants: SemigroupConstants,
}

impl DenseBackend {
    pub fn new(a: Mat<f64>, constants: SemigroupConstants) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        if (0..a.ncols()).any(|j| (0..a.nrows()).any(|i| !a[(i, j)].is_finite())) {
            return Err(Error::domain("operator has non-finite entries"));
        }
        Ok(DenseBackend { a, constants })
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.a
    }
}

impl GeneratorBackend for DenseBackend {
    fn dimension(&self) -> usize {
        self.a.nrows()
    }

    fn constants(&self) -> SemigroupConstants {
        self.constants
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.a.nrows();
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for (j, &xj) in x.iter().enumerate().take(n) {
            if xj.re == 0.0 && xj.im == 0.0 {
                continue;
            }
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += xj * self.a[(i, j)];
            }
        }
        y
    }

    fn solve_raw(&self, z: Complex64, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.a.nrows();
        let shifted = Mat::<Complex64>::from_fn(n, n, |i, j| {
            let d = if i == j { z } else { Complex64::new(0.0, 0.0) };
            d - self.a[(i, j)]
        });
        let lu = shifted.partial_piv_lu();
        let mut rhs = Mat::<Complex64>::from_fn(n, 1, |i, _| x[i]);
        lu.solve_in_place(rhs.as_mut());
        Ok((0..n).map(|i| rhs[(i, 0)]).collect())
    }
}

/// Sparse real matrix. The symbolic LU of `z − A` depends only on the
/// pattern, so it is computed once and shared by every shift.
#[derive(Debug)]
pub struct SparseBackend {
    n: usize,
    // CSR for matrix-vector products
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    // pattern of z − A in triplet order, with the diagonal always present
    pattern: Vec<(usize, usize, f64)>,
    symbolic: SymbolicLu<usize>,
    constants: SemigroupConstants,
}

impl SparseBackend {
    /// Builds from `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets(
        n: usize,
        entries: &[(usize, usize, f64)],
        constants: SemigroupConstants,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("operator dimension must be positive"));
        }
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len() + n);
        for &(i, j, v) in entries {
            if i >= n || j >= n {
                return Err(Error::domain(format!("entry ({i}, {j}) outside {n}×{n}")));
            }
            if !v.is_finite() {
                return Err(Error::domain("operator has non-finite entries"));
            }
            sorted.push((i, j, v));
        }
        sorted.extend((0..n).map(|i| (i, i, 0.0)));
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(sorted.len());
        for (i, j, v) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }

        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(merged.len());
        let mut vals = Vec::with_capacity(merged.len());
        for &(i, j, v) in &merged {
            row_ptr[i + 1] += 1;
            cols.push(j);
            vals.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }

        let sym_triplets: Vec<Triplet<usize, usize, f64>> = merged
            .iter()
            .map(|&(i, j, _)| Triplet::new(i, j, 1.0))
            .collect();
        let probe = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &sym_triplets)
            .map_err(|e| Error::domain(format!("sparse pattern: {e:?}")))?;
        let symbolic = symbolic_lu(probe.symbolic())?;
        Ok(SparseBackend {
            n,
            row_ptr,
            cols,
            vals,
            pattern: merged,
            symbolic,
            constants,
        })
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entry `(i, j)`, zero when outside the pattern.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let row = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[row.clone()]
            .iter()
            .position(|&c| c == j)
            .map_or(0.0, |p| self.vals[row.start + p])
    }
}

fn symbolic_lu(pattern: SymbolicSparseColMatRef<'_, usize>) -> Result<SymbolicLu<usize>> {
    SymbolicLu::try_new(pattern).map_err(|e| Error::domain(format!("symbolic LU: {e:?}")))
}

impl GeneratorBackend for SparseBackend {
    fn dimension(&self) -> usize {
        self.n
    }

    fn constants(&self) -> SemigroupConstants {
        self.constants
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += x[self.cols[p]] * self.vals[p];
                }
                acc
            })
            .collect()
    }

    fn solve_raw(&self, z: Complex64, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let triplets: Vec<Triplet<usize, usize, Complex64>> = self
            .pattern
            .iter()
            .map(|&(i, j, v)| {
                let d = if i == j { z } else { Complex64::new(0.0, 0.0) };
                Triplet::new(i, j, d - v)
            })
            .collect();
        let shifted =
            SparseColMat::<usize, Complex64>::try_new_from_triplets(self.n, self.n, &triplets)
                .map_err(|e| Error::Solver {
                    z,
                    reason: format!("assembly failed: {e:?}"),
                })?;
        let lu =
            Lu::try_new_with_symbolic(self.symbolic.clone(), shifted.as_ref()).map_err(|e| {
                Error::Solver {
                    z,
                    reason: format!("numeric LU failed: {e:?}"),
                }
            })?;
        let mut rhs = Mat::<Complex64>::from_fn(self.n, 1, |i, _| x[i]);
        lu.solve_in_place(rhs.as_mut());
        Ok((0..self.n).map(|i| rhs[(i, 0)]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar(a: f64) -> DenseBackend {
        DenseBackend::new(
            Mat::from_fn(1, 1, |_, _| a),
            SemigroupConstants::contraction(),
        )
        .unwrap()
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let b = scalar(-1.0);
        let s = solve_shifted(&b, Complex64::new(2.0, 1.0), &[c(0.0)]).unwrap();
        assert_eq!(s.u, vec![c(0.0)]);
        assert_eq!(s.residual, 0.0);
    }

    #[test]
    fn scalar_solve() {
        let b = scalar(-1.0);
        let s = solve_shifted(&b, c(2.0), &[c(3.0)]).unwrap();
        assert_relative_eq!(s.u[0].re, 1.0, max_relative = 1e-15);
        assert_eq!(s.residual, 0.0);
    }

    #[test]
    fn rejects_left_half_plane_and_bad_length() {
        let b = scalar(-1.0);
        assert!(solve_shifted(&b, c(0.0), &[c(1.0)]).is_err());
        assert!(solve_shifted(&b, c(-1.0), &[c(1.0)]).is_err());
        assert!(matches!(
            solve_shifted(&b, c(1.0), &[c(1.0), c(2.0)]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn singular_shift_is_reported() {
        let b = scalar(2.0);
        let err = solve_shifted(&b, c(2.0), &[c(1.0)]).unwrap_err();
        assert!(matches!(err, Error::Solver { .. }));
    }

    #[test]
    fn aposteriori_examples() {
        assert_eq!(aposteriori_bound(0.0, 2.0).unwrap(), 0.0);
        assert_eq!(aposteriori_bound(1e-8, 2.0).unwrap(), 5e-9);
        assert!(aposteriori_bound(1.0, 0.0).is_err());
    }

    #[test]
    fn shift_poly_examples() {
        let b = scalar(-1.0);
        assert_eq!(
            apply_shift_poly(&b, &[c(1.0)], 4.0, 1).unwrap(),
            vec![c(5.0)]
        );
        let once = apply_shift_poly(&b, &[c(0.7)], 4.0, 1).unwrap();
        let twice = apply_shift_poly(&b, &once, 4.0, 1).unwrap();
        assert_eq!(twice, apply_shift_poly(&b, &[c(0.7)], 4.0, 2).unwrap());
        let zero = scalar(0.0);
        assert_eq!(graph_norm(&zero, &[1.0], 1.0, 3).unwrap(), 8.0);
        assert_eq!(graph_norm(&b, &[0.0], 1.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(sup_norm_real(&[-3.0, 3.0, -3.0]), 3.0);
        assert_eq!(sup_norm_real(&[1.0, -2.5]), sup_norm_real(&[-1.0, 2.5]));
        assert_eq!(sup_norm(&[Complex64::new(3.0, 4.0)]), 5.0);
    }

    #[test]
    fn sparse_matches_dense() {
        let entries = [
            (0, 0, -2.0),
            (0, 1, 1.0),
            (1, 0, 1.0),
            (1, 1, -2.0),
            (1, 2, 1.0),
            (2, 1, 1.0),
            (2, 2, -2.0),
            (2, 2, 0.5),
        ];
        let sparse =
            SparseBackend::from_triplets(3, &entries, SemigroupConstants::contraction()).unwrap();
        assert_eq!(sparse.entry(2, 2), -1.5);
        assert_eq!(sparse.entry(0, 2), 0.0);
        let dense = DenseBackend::new(
            Mat::from_fn(3, 3, |i, j| sparse.entry(i, j)),
            SemigroupConstants::contraction(),
        )
        .unwrap();
        let x = [c(1.0), Complex64::new(-0.5, 0.25), c(2.0)];
        let z = Complex64::new(1.5, -3.0);
        let ys = sparse.apply(&x);
        let yd = dense.apply(&x);
        for (a, b) in ys.iter().zip(&yd) {
            assert!((a - b).norm() < 1e-15);
        }
        let us = solve_shifted(&sparse, z, &x).unwrap();
        let ud = solve_shifted(&dense, z, &x).unwrap();
        for (a, b) in us.u.iter().zip(&ud.u) {
            assert!((a - b).norm() < 1e-13);
        }
        assert!(us.residual < 1e-14);
        // the cached symbolic factorization serves a second shift too
        let again = solve_shifted(&sparse, Complex64::new(0.5, 7.0), &x).unwrap();
        assert!(again.residual < 1e-14);
    }

    #[test]
    fn sparse_rejects_bad_entries() {
        let k = SemigroupConstants::contraction();
        assert!(SparseBackend::from_triplets(2, &[(2, 0, 1.0)], k).is_err());
        assert!(SparseBackend::from_triplets(2, &[(0, 0, f64::NAN)], k).is_err());
        assert!(SparseBackend::from_triplets(0, &[], k).is_err());
    }
}
