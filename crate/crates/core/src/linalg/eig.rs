//! Dense eigenvalue probe for small preconditioned operators.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default largest dimension accepted by [`dense_eigs`].
pub const DEFAULT_EIG_CAP: usize = 2000;

/// Eigenvalues of a general real square matrix given row-major.
///
/// Returns them sorted by real part, then imaginary part.
pub fn dense_eigs(a: &[Vec<f64>], cap: usize) -> Result<Vec<Complex64>> {
    let n = a.len();
    if n > cap {
        return Err(Error::SizeCap {
            what: "dense eigenvalue problem",
            size: n,
            cap,
        });
    }
    if let Some(bad) = a.iter().find(|row| row.len() != n) {
        return Err(Error::DimensionMismatch {
            op: "dense_eigs",
            left: (n, n),
            right: (n, bad.len()),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[i][j]);
    let mut ev: Vec<Complex64> = m
        .eigenvalues()
        .map_err(|_| Error::EigenFailure)?
        .into_iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn diagonal_spectrum() {
        let a = vec![vec![3.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]];
        let ev = dense_eigs(&a, 10).unwrap();
        for (k, z) in ev.iter().enumerate() {
            assert!((z.re - (k + 1) as f64).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let ev = dense_eigs(&[vec![0.0, 1.0], vec![-1.0, 0.0]], 10).unwrap();
        assert_eq!(ev.len(), 2);
        for z in &ev {
            assert!(z.re.abs() < 1e-12 && (z.im.abs() - 1.0).abs() < 1e-12);
        }
        assert!((ev[0].im + ev[1].im).abs() < 1e-12);
    }

    #[test]
    fn tridiagonal_closed_form() {
        let n = 10;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i: usize| {
                (0..n)
                    .map(|j| match i.abs_diff(j) {
                        0 => 2.0,
                        1 => -1.0,
                        _ => 0.0,
                    })
                    .collect()
            })
            .collect();
        let ev = dense_eigs(&a, 100).unwrap();
        let mut expected: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (k as f64 * PI / (n as f64 + 1.0)).cos())
            .collect();
        expected.sort_by(f64::total_cmp);
        for (z, e) in ev.iter().zip(&expected) {
            assert!((z.re - e).abs() < 1e-8, "{} vs {}", z.re, e);
            assert!(z.im.abs() < 1e-8);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let a = vec![vec![1.0; 3]; 3];
        assert!(matches!(dense_eigs(&a, 2), Err(Error::SizeCap { .. })));
    }
}
