//! Complete sparse factorizations for the exact inner solves.
//!
//! Both kinds are computed by `faer`: supernodal/simplicial Cholesky after an
//! approximate-minimum-degree ordering, and partial-pivoting LU after a
//! COLAMD column ordering.

use faer::col::ColMut;
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::Side;

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    /// `A = L Lᵀ`; requires symmetric positive definite input.
    Cholesky,
    /// `P A Q = L U`; general square input.
    Lu,
}

enum Inner {
    Llt(Llt<usize, f64>),
    Lu(Lu<usize, f64>),
}

/// A factorized square matrix, reusable across many right-hand sides.
pub struct Factorization {
    inner: Inner,
    n: usize,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization")
            .field("kind", &self.kind())
            .field("n", &self.n)
            .finish()
    }
}

impl Factorization {
    pub fn new(a: &CsrMatrix, kind: FactorKind) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch {
                op: "factor",
                left: a.shape(),
                right: (a.ncols(), a.nrows()),
            });
        }
        let n = a.nrows();
        let inner = match kind {
            FactorKind::Cholesky => {
                let csc = a.to_faer_csc(true);
                let llt = csc.sp_cholesky(Side::Lower).map_err(|e| match e {
                    faer::sparse::linalg::LltError::Numeric(
                        faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index },
                    ) => Error::NotPositiveDefinite { pivot: index },
                    other => Error::InvalidInput(format!("cholesky: {other:?}")),
                })?;
                Inner::Llt(llt)
            }
            FactorKind::Lu => {
                let csc = a.to_faer_csc(false);
                let lu = csc.sp_lu().map_err(|e| match e {
                    faer::sparse::linalg::LuError::SymbolicSingular { index } => {
                        Error::Singular { step: index }
                    }
                    other => Error::InvalidInput(format!("lu: {other:?}")),
                })?;
                Inner::Lu(lu)
            }
        };
        Ok(Self { inner, n })
    }

    pub fn kind(&self) -> FactorKind {
        match self.inner {
            Inner::Llt(_) => FactorKind::Cholesky,
            Inner::Lu(_) => FactorKind::Lu,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Overwrites `b` with `A⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n, "rhs length");
        if self.n == 0 {
            return;
        }
        let col = ColMut::from_slice_mut(b);
        match &self.inner {
            Inner::Llt(f) => f.solve_in_place(col.as_mat_mut()),
            Inner::Lu(f) => f.solve_in_place(col.as_mat_mut()),
        }
    }

    /// Overwrites `b` with `A⁻ᵀ b`.
    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n, "rhs length");
        if self.n == 0 {
            return;
        }
        let col = ColMut::from_slice_mut(b);
        match &self.inner {
            Inner::Llt(f) => f.solve_transpose_in_place(col.as_mat_mut()),
            Inner::Lu(f) => f.solve_transpose_in_place(col.as_mat_mut()),
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::norm2;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    /// Thomas algorithm for a constant tridiagonal (-1, 2, -1) system.
    fn thomas(b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let (a, d, c) = (-1.0, 2.0, -1.0);
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        cp[0] = c / d;
        dp[0] = b[0] / d;
        for i in 1..n {
            let m = d - a * cp[i - 1];
            cp[i] = c / m;
            dp[i] = (b[i] - a * dp[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = dp[i] - cp[i] * x[i + 1];
        }
        x
    }

    #[test]
    fn diagonal_solve() {
        let d: Vec<f64> = (1..=5).map(|i| i as f64).collect();
        let a = CsrMatrix::from_diagonal(&d);
        let b = vec![1.0, 4.0, 9.0, 16.0, 25.0];
        for kind in [FactorKind::Cholesky, FactorKind::Lu] {
            let x = Factorization::new(&a, kind).unwrap().solve(&b);
            for i in 0..5 {
                assert!((x[i] - b[i] / d[i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn tridiagonal_matches_thomas() {
        let n = 50;
        let a = laplacian_1d(n);
        let b: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64 - 3.0).collect();
        let reference = thomas(&b);
        for kind in [FactorKind::Cholesky, FactorKind::Lu] {
            let x = Factorization::new(&a, kind).unwrap().solve(&b);
            let diff: Vec<f64> = x.iter().zip(&reference).map(|(p, q)| p - q).collect();
            assert!(norm2(&diff) <= 1e-12 * norm2(&reference));
            let r: Vec<f64> = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
            assert!(norm2(&r) <= 1e-12 * norm2(&b));
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = CsrMatrix::from_dense_fn(2, 2, |i, j| [[1.0, 2.0], [2.0, 1.0]][i][j]);
        assert!(matches!(
            Factorization::new(&a, FactorKind::Cholesky),
            Err(Error::NotPositiveDefinite { .. })
        ));
        // LU handles it
        let f = Factorization::new(&a, FactorKind::Lu).unwrap();
        let x = f.solve(&[3.0, 3.0]);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lu_transpose_solve() {
        let a = CsrMatrix::from_dense_fn(3, 3, |i, j| [[4.0, 1.0, 0.0], [2.0, 5.0, 1.0], [0.0, 3.0, 6.0]][i][j]);
        let f = Factorization::new(&a, FactorKind::Lu).unwrap();
        let b = vec![1.0, 2.0, 3.0];
        let mut x = b.clone();
        f.solve_transpose_in_place(&mut x);
        let r = a.mul_vec_transpose(&x);
        for i in 0..3 {
            assert!((r[i] - b[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn structurally_singular_lu() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 1.0)]);
        assert!(Factorization::new(&a, FactorKind::Lu).is_err());
    }
}
