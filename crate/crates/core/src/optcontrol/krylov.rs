//! GMRES (right preconditioned, no restart), a left-preconditioned
//! variant, and preconditioned MINRES.
//!
//! Operators are passed as closures `apply(x, y)` writing `y = A x`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2};

#[derive(Debug, Clone)]
pub struct KrylovResult {
    pub x: Vec<f64>,
    /// Arnoldi / Lanczos steps taken.
    pub iterations: usize,
    pub converged: bool,
    /// Relative residual estimate after every step (preconditioned norm for
    /// MINRES).
    pub history: Vec<f64>,
    /// `||b - A x|| / ||b||` of the returned iterate.
    pub true_rel_residual: f64,
}

fn true_residual(apply_a: &impl Fn(&[f64], &mut [f64]), b: &[f64], x: &[f64], bnorm: f64) -> f64 {
    let mut ax = vec![0.0; b.len()];
    apply_a(x, &mut ax);
    let r: f64 = b.iter().zip(&ax).map(|(bi, ai)| (bi - ai) * (bi - ai)).sum();
    r.sqrt() / bnorm
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

/// Right-preconditioned GMRES started from `x0 = 0`.
///
/// Iterates until the true relative residual `||b - A x||_2 / ||b||_2` is at
/// most `tol`; the least-squares residual is used as a cheap indicator and
/// confirmed against the true residual before stopping. Returns the last
/// iterate with `converged = false` if `max_it` steps do not suffice.
pub fn gmres(
    apply_a: impl Fn(&[f64], &mut [f64]),
    apply_pinv: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    tol: f64,
    max_it: usize,
) -> KrylovResult {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return KrylovResult {
            x: vec![0.0; n],
            iterations: 0,
            converged: true,
            history: vec![0.0],
            true_rel_residual: 0.0,
        };
    }

    let mut basis: Vec<Vec<f64>> = vec![b.iter().map(|v| v / bnorm).collect()];
    // column j of the Hessenberg matrix, already rotated
    let mut hess: Vec<Vec<f64>> = Vec::new();
    let mut rot: Vec<(f64, f64)> = Vec::new();
    let mut g = vec![bnorm];
    let mut history = vec![1.0];

    // x = Z y with the stored z_j = P⁻¹ v_j, so the iterate never depends on
    // re-applying an ill-conditioned P⁻¹
    let mut zs: Vec<Vec<f64>> = Vec::new();
    let solution = |zs: &[Vec<f64>], hess: &[Vec<f64>], g: &[f64]| -> Vec<f64> {
        let k = hess.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= hess[j][i] * y[j];
            }
            y[i] = s / hess[i][i];
        }
        let mut x = vec![0.0; n];
        for (yi, zi) in y.iter().zip(zs) {
            axpy(*yi, zi, &mut x);
        }
        x
    };

    let mut x = vec![0.0; n];
    let mut true_rel = 1.0;
    let mut converged = false;
    for j in 0..max_it {
        let mut z = vec![0.0; n];
        apply_pinv(&basis[j], &mut z);
        let mut w = vec![0.0; n];
        apply_a(&z, &mut w);
        zs.push(z);
        let mut h = Vec::with_capacity(j + 2);
        for v in &basis {
            let hij = dot(&w, v);
            axpy(-hij, v, &mut w);
            h.push(hij);
        }
        let hnext = norm2(&w);
        h.push(hnext);
        for (i, &(c, s)) in rot.iter().enumerate() {
            let (a, bb) = (h[i], h[i + 1]);
            h[i] = c * a + s * bb;
            h[i + 1] = -s * a + c * bb;
        }
        let (c, s) = givens(h[j], h[j + 1]);
        h[j] = c * h[j] + s * h[j + 1];
        h[j + 1] = 0.0;
        rot.push((c, s));
        let gj = g[j];
        g[j] = c * gj;
        g.push(-s * gj);
        hess.push(h);

        let estimate = g[j + 1].abs() / bnorm;
        history.push(estimate);
        let breakdown = hnext <= 1e-14 * bnorm || h_is_singular(&hess);
        if estimate <= tol || breakdown || j + 1 == max_it {
            x = solution(&zs, &hess, &g);
            true_rel = true_residual(&apply_a, b, &x, bnorm);
            if true_rel <= tol {
                converged = true;
                break;
            }
            if breakdown {
                break;
            }
        }
        basis.push(w.iter().map(|v| v / hnext).collect());
    }
    KrylovResult {
        x,
        iterations: hess.len(),
        converged,
        history,
        true_rel_residual: true_rel,
    }
}

/// Left-preconditioned GMRES: runs [`gmres`] on `P⁻¹ A x = P⁻¹ b` and stops
/// when the preconditioned residual `||P⁻¹(b - A x)|| / ||P⁻¹ b||` is at most
/// `tol`. `history` holds preconditioned residuals; `true_rel_residual` is
/// the unpreconditioned `||b - A x|| / ||b||`, which this stopping rule does
/// not control.
pub fn gmres_left(
    apply_a: impl Fn(&[f64], &mut [f64]),
    apply_pinv: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    tol: f64,
    max_it: usize,
) -> KrylovResult {
    let n = b.len();
    let mut pb = vec![0.0; n];
    apply_pinv(b, &mut pb);
    let mut res = gmres(
        |x, y| {
            let mut t = vec![0.0; n];
            apply_a(x, &mut t);
            apply_pinv(&t, y);
        },
        |r, z| z.copy_from_slice(r),
        &pb,
        tol,
        max_it,
    );
    let bnorm = norm2(b);
    res.true_rel_residual = if bnorm == 0.0 { 0.0 } else { true_residual(&apply_a, b, &res.x, bnorm) };
    res
}

fn h_is_singular(hess: &[Vec<f64>]) -> bool {
    let j = hess.len() - 1;
    hess[j][j] == 0.0
}

/// Checks `<A v, w> = <v, A w>` on two random probe vectors.
pub fn symmetry_probe(apply_a: &impl Fn(&[f64], &mut [f64]), n: usize, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (mut av, mut aw) = (vec![0.0; n], vec![0.0; n]);
    apply_a(&v, &mut av);
    apply_a(&w, &mut aw);
    let scale = norm2(&av) * norm2(&w) + norm2(&aw) * norm2(&v);
    let defect = (dot(&av, &w) - dot(&v, &aw)).abs();
    if defect > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric { defect });
    }
    Ok(())
}

/// Preconditioned MINRES started from `x0 = 0`.
///
/// `apply_a` must be symmetric and `apply_pinv` symmetric positive definite.
/// Stops when the preconditioned residual `||r||_{P^{-1}} / ||b||_{P^{-1}}`
/// is at most `tol`; the true residual of the result is reported alongside.
pub fn minres(
    apply_a: impl Fn(&[f64], &mut [f64]),
    apply_pinv: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    tol: f64,
    max_it: usize,
) -> Result<KrylovResult> {
    let n = b.len();
    symmetry_probe(&apply_a, n, 0x5eed)?;
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(KrylovResult {
            x,
            iterations: 0,
            converged: true,
            history: vec![0.0],
            true_rel_residual: 0.0,
        });
    }

    let mut v_old = vec![0.0; n];
    let mut v = b.to_vec();
    let mut z = vec![0.0; n];
    apply_pinv(&v, &mut z);
    let zv = dot(&z, &v);
    if !(zv > 0.0) {
        return Err(Error::InvalidInput("preconditioner is not positive definite".into()));
    }
    let mut gamma = zv.sqrt();
    let gamma1 = gamma;
    let mut gamma_old = 1.0;
    let mut eta = gamma;
    let (mut s_old, mut s) = (0.0, 0.0);
    let (mut c_old, mut c) = (1.0, 1.0);
    let mut w_old = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut az = vec![0.0; n];
    let mut z_next = vec![0.0; n];
    let mut history = vec![1.0];
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..max_it {
        iterations += 1;
        z.iter_mut().for_each(|zi| *zi /= gamma);
        apply_a(&z, &mut az);
        let delta = dot(&az, &z);
        // v_next = A z - (delta / gamma) v - (gamma / gamma_old) v_old
        let mut v_next = az.clone();
        axpy(-delta / gamma, &v, &mut v_next);
        axpy(-gamma / gamma_old, &v_old, &mut v_next);
        apply_pinv(&v_next, &mut z_next);
        let gnext_sq = dot(&z_next, &v_next);
        if gnext_sq < 0.0 {
            return Err(Error::InvalidInput("preconditioner is not positive definite".into()));
        }
        let gamma_next = gnext_sq.sqrt();

        let alpha0 = c * delta - c_old * s * gamma;
        let alpha1 = alpha0.hypot(gamma_next);
        let alpha2 = s * delta + c_old * c * gamma;
        let alpha3 = s_old * gamma;
        let c_next = alpha0 / alpha1;
        let s_next = gamma_next / alpha1;

        let mut w_next = z.clone();
        axpy(-alpha3, &w_old, &mut w_next);
        axpy(-alpha2, &w, &mut w_next);
        w_next.iter_mut().for_each(|wi| *wi /= alpha1);
        axpy(c_next * eta, &w_next, &mut x);
        eta *= -s_next;

        let rel = eta.abs() / gamma1;
        history.push(rel);

        v_old = std::mem::replace(&mut v, v_next);
        std::mem::swap(&mut z, &mut z_next);
        w_old = std::mem::replace(&mut w, w_next);
        gamma_old = gamma;
        gamma = gamma_next;
        c_old = c;
        c = c_next;
        s_old = s;
        s = s_next;

        if rel <= tol {
            converged = true;
            break;
        }
        if gamma == 0.0 {
            // invariant subspace reached: the iterate is exact
            converged = true;
            break;
        }
    }
    let true_rel_residual = true_residual(&apply_a, b, &x, bnorm);
    Ok(KrylovResult {
        x,
        iterations,
        converged,
        history,
        true_rel_residual,
    })
}
