//! Sparse matrices and the linear solvers behind the Poisson and
//! preconditioner solves.
//!
//! Factorizations are delegated to faer's supernodal sparse Cholesky, run
//! sequentially so that every solve is bit-for-bit reproducible. A
//! Jacobi-preconditioned conjugate gradient is kept as an independent route.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMat, SparseColMatRef, SymbolicSparseColMat, Triplet};
use faer::{MatMut, Par, Side};

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from per-row entry lists; duplicate columns are summed
    /// and explicit zeros are kept out.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows.iter().cloned() {
            row.sort_by_key(|&(c, _)| c);
            let start = cols.len();
            for (c, v) in row {
                debug_assert!(c < ncols);
                if cols.len() > start && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            // drop exact cancellations so the pattern stays minimal
            let mut k = start;
            for idx in start..cols.len() {
                if vals[idx] != 0.0 {
                    cols[k] = cols[idx];
                    vals[k] = vals[idx];
                    k += 1;
                }
            }
            cols.truncate(k);
            vals.truncate(k);
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            nrows: rows.len(),
            ncols,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yr = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec(x, &mut y);
        y
    }

    /// `y = A^T x`
    pub fn mul_transpose_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        y.iter_mut().for_each(|v| *v = 0.0);
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.cols[k]] += self.vals[k] * xr;
            }
        }
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        self.mul_transpose_vec(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|r| self.row(r).find(|&(c, _)| c == r).map_or(0.0, |(_, v)| v))
            .collect()
    }

    /// `A * s` for a scalar `s`.
    pub fn scaled(&self, s: f64) -> CsrMatrix {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                triplets.push(Triplet::new(r, c, v));
            }
        }
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &triplets)
            .map_err(|e| Error::Factorization(format!("{e:?}")))
    }
}

fn sequential() {
    faer::set_global_parallelism(Par::Seq);
}

/// Sparse Cholesky factor of a symmetric positive definite matrix.
pub struct Cholesky {
    n: usize,
    factor: Llt<usize, f64>,
}

impl std::fmt::Debug for Cholesky {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Cholesky").field("n", &self.n).finish()
    }
}

impl Cholesky {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::Factorization("matrix is not square".into()));
        }
        sequential();
        let m = a.to_faer()?;
        let symbolic = SymbolicLlt::try_new(m.symbolic(), Side::Lower)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let factor = Llt::try_new_with_symbolic(symbolic, m.as_ref(), Side::Lower)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(Cholesky { n: a.nrows, factor })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        sequential();
        self.factor
            .solve_in_place(MatMut::from_column_major_slice_mut(b, self.n, 1));
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// The weighted normal matrix `L^T diag(d) L` of a rectangular operator,
/// with its sparsity pattern and symbolic factorization computed once so that
/// re-weighting only costs a numeric refactorization.
pub struct NormalMatrix {
    n: usize,
    symbolic: SymbolicSparseColMat<usize>,
    analysis: SymbolicLlt<usize>,
    /// (value slot, row of L, L[row, a] * L[row, b])
    contributions: Vec<(usize, usize, f64)>,
}

impl std::fmt::Debug for NormalMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NormalMatrix")
            .field("n", &self.n)
            .field("nnz", &self.symbolic.row_idx().len())
            .finish()
    }
}

impl NormalMatrix {
    pub fn new(l: &CsrMatrix) -> Result<Self> {
        sequential();
        let n = l.ncols;
        let mut columns: Vec<Vec<usize>> = vec![Vec::new(); n];
        for r in 0..l.nrows {
            for (a, _) in l.row(r) {
                for (b, _) in l.row(r) {
                    columns[b].push(a);
                }
            }
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for col in columns.iter_mut() {
            col.sort_unstable();
            col.dedup();
            row_idx.extend_from_slice(col);
            col_ptr.push(row_idx.len());
        }
        let mut contributions = Vec::new();
        for r in 0..l.nrows {
            for (a, va) in l.row(r) {
                for (b, vb) in l.row(r) {
                    let slice = &row_idx[col_ptr[b]..col_ptr[b + 1]];
                    let pos = col_ptr[b] + slice.binary_search(&a).expect("pattern entry");
                    contributions.push((pos, r, va * vb));
                }
            }
        }
        let symbolic = SymbolicSparseColMat::new_checked(n, n, col_ptr, None, row_idx);
        let analysis = SymbolicLlt::try_new(symbolic.as_ref(), Side::Lower)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(NormalMatrix {
            n,
            symbolic,
            analysis,
            contributions,
        })
    }

    fn values(&self, weights: &[f64]) -> Vec<f64> {
        let mut vals = vec![0.0; self.symbolic.row_idx().len()];
        for &(pos, r, c) in &self.contributions {
            vals[pos] += weights[r] * c;
        }
        vals
    }

    /// Factorizes `L^T diag(weights) L`.
    pub fn factor(&self, weights: &[f64]) -> Result<Cholesky> {
        sequential();
        let vals = self.values(weights);
        let m = SparseColMatRef::new(self.symbolic.as_ref(), &vals);
        let factor = Llt::try_new_with_symbolic(self.analysis.clone(), m, Side::Lower)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(Cholesky { n: self.n, factor })
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradient for a symmetric positive definite
/// matrix. Starts from zero.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgReport)> {
    let n = b.len();
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| 1.0 / d).collect();
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((
            x,
            CgReport {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.mul_vec(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm2(&r) / bnorm;
        if rel <= rel_tol {
            // confirm against the true residual, the recurrence drifts
            let true_rel = residual_norm(a, &x, b) / bnorm;
            if true_rel <= rel_tol {
                return Ok((
                    x,
                    CgReport {
                        iterations: it,
                        relative_residual: true_rel,
                    },
                ));
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::LinearSolve {
        residual: residual_norm(a, &x, b) / bnorm,
        bound: rel_tol,
    })
}

/// `||b - A x||_2`
pub fn residual_norm(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.apply(x);
    ax.iter()
        .zip(b)
        .map(|(u, v)| (v - u) * (v - u))
        .sum::<f64>()
        .sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lap1d(n: usize) -> CsrMatrix {
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, 2.0)];
                if i > 0 {
                    r.push((i - 1, -1.0));
                }
                if i + 1 < n {
                    r.push((i + 1, -1.0));
                }
                r
            })
            .collect();
        CsrMatrix::from_rows(n, rows)
    }

    #[test]
    fn cholesky_and_cg_agree() {
        let a = lap1d(50);
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin() + 1.0).collect();
        let x1 = Cholesky::new(&a).unwrap().solve(&b);
        let (x2, rep) = conjugate_gradient(&a, &b, 1e-12, 500).unwrap();
        assert!(rep.relative_residual <= 1e-12);
        for (u, v) in x1.iter().zip(&x2) {
            assert!((u - v).abs() < 1e-8 * (1.0 + u.abs()));
        }
        assert!(residual_norm(&a, &x1, &b) / norm2(&b) < 1e-12);
    }

    #[test]
    fn duplicate_entries_are_summed() {
        let m = CsrMatrix::from_rows(2, vec![vec![(1, 1.0), (0, 2.0), (1, 3.0)], vec![(0, 1.0), (0, -1.0)]]);
        assert_eq!(m.row(0).collect::<Vec<_>>(), vec![(0, 2.0), (1, 4.0)]);
        assert_eq!(m.row(1).count(), 0);
        assert_eq!(m.apply(&[1.0, 1.0]), vec![6.0, 0.0]);
        assert_eq!(m.apply_transpose(&[1.0, 1.0]), vec![2.0, 4.0]);
    }

    #[test]
    fn normal_matrix_matches_dense_product() {
        // rectangular operator with 3 rows, 2 columns
        let l = CsrMatrix::from_rows(2, vec![vec![(0, 1.0), (1, -2.0)], vec![(1, 3.0)], vec![(0, 2.0)]]);
        let w = [0.5, 2.0, 1.0];
        let chol = NormalMatrix::new(&l).unwrap().factor(&w).unwrap();
        // dense L^T W L = [[0.5 + 4, -1], [-1, 2 + 18]]
        let a = [[4.5, -1.0], [-1.0, 20.0]];
        let b = [1.0, 2.0];
        let x = chol.solve(&b);
        for i in 0..2 {
            let r = a[i][0] * x[0] + a[i][1] * x[1] - b[i];
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn cg_reports_non_convergence() {
        let a = lap1d(200);
        let b = vec![1.0; 200];
        assert!(matches!(conjugate_gradient(&a, &b, 1e-14, 3), Err(Error::LinearSolve { .. })));
    }
}
