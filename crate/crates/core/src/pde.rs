//! Discrete state equation, harmonic extension, adjoint and Kirchhoff map.
//!
//! All solves go through one Cholesky factorization of `K_FF`, shared by
//! every call on the same [`ForwardSolver`].

use crate::assembly::FeOperators;
use crate::error::{Error, Result};
use crate::linalg::{FactorKind, Factorization};
use crate::mesh::PiecewiseLinear;

/// State `y = S_h u + y_f` together with both parts.
#[derive(Debug, Clone)]
pub struct StateSolution {
    pub y: PiecewiseLinear,
    /// Harmonic extension of the Dirichlet data.
    pub y_u: PiecewiseLinear,
    /// Response to the source with homogeneous Dirichlet data.
    pub y_f: PiecewiseLinear,
}

pub struct ForwardSolver<'a> {
    ops: &'a FeOperators,
    kff: Factorization,
}

impl<'a> ForwardSolver<'a> {
    /// Factorizes `K_FF`. Fails with [`Error::NotCoercive`] when `K_FF` is
    /// singular (a component without Dirichlet vertex and with `c0 = 0`).
    pub fn new(ops: &'a FeOperators) -> Result<Self> {
        let kff = match Factorization::new(&ops.k.ff, FactorKind::Cholesky) {
            Ok(f) => f,
            Err(Error::NotPositiveDefinite { .. }) | Err(Error::Singular { .. }) => {
                return Err(Error::NotCoercive)
            }
            Err(e) => return Err(e),
        };
        Ok(Self { ops, kff })
    }

    pub fn ops(&self) -> &'a FeOperators {
        self.ops
    }

    /// `K_FF^{-1} b`.
    pub fn solve_free(&self, b: &[f64]) -> Vec<f64> {
        self.kff.solve(b)
    }

    fn check_controls(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.ops.n_dirichlet() {
            return Err(Error::InvalidInput(format!(
                "{} control values for {} Dirichlet vertices",
                u.len(),
                self.ops.n_dirichlet()
            )));
        }
        Ok(())
    }

    fn glue(&self, free: Vec<f64>, u: &[f64]) -> PiecewiseLinear {
        let mut v = free;
        v.extend_from_slice(u);
        PiecewiseLinear::new(self.ops.mesh.clone(), v).expect("length n_dof")
    }

    /// Solves `K_FF y_F = b_F - K_FD u`, `y_D = u` for a load vector over
    /// all DOFs.
    fn solve_with(&self, u: &[f64], load: &[f64]) -> PiecewiseLinear {
        let mut rhs = load[self.ops.mesh.free_range()].to_vec();
        self.ops.k.fd.mul_vec_add(-1.0, u, &mut rhs);
        self.kff.solve_in_place(&mut rhs);
        self.glue(rhs, u)
    }

    /// Discrete state for Dirichlet data `u` and load vector `f_vec`.
    pub fn solve_state(&self, u: &[f64], f_vec: &[f64]) -> Result<StateSolution> {
        self.check_controls(u)?;
        if f_vec.len() != self.ops.mesh.n_dof() {
            return Err(Error::InvalidInput(format!(
                "load vector of length {} for {} DOFs",
                f_vec.len(),
                self.ops.mesh.n_dof()
            )));
        }
        let zero_load = vec![0.0; f_vec.len()];
        let zero_u = vec![0.0; u.len()];
        Ok(StateSolution {
            y: self.solve_with(u, f_vec),
            y_u: self.solve_with(u, &zero_load),
            y_f: self.solve_with(&zero_u, f_vec),
        })
    }

    /// `S_h u`.
    pub fn harmonic_extension(&self, u: &[f64]) -> Result<PiecewiseLinear> {
        self.check_controls(u)?;
        Ok(self.solve_with(u, &vec![0.0; self.ops.mesh.n_dof()]))
    }

    /// `P_h r`: `a(w, p) = (r, w)` for all free test functions, `p_D = 0`.
    pub fn solve_adjoint(&self, residual: &[f64]) -> Result<PiecewiseLinear> {
        if residual.len() != self.ops.mesh.n_dof() {
            return Err(Error::InvalidInput(format!(
                "residual of length {} for {} DOFs",
                residual.len(),
                self.ops.mesh.n_dof()
            )));
        }
        let mr = self.ops.mass.mul_vec(residual);
        let mut rhs = mr[self.ops.mesh.free_range()].to_vec();
        self.kff.solve_transpose_in_place(&mut rhs);
        Ok(self.glue(rhs, &vec![0.0; self.ops.n_dirichlet()]))
    }

    /// `K_h p = [K p - M y]_D`, i.e. `a(phi_v, p) - (y, phi_v)` at every
    /// Dirichlet vertex `v`.
    pub fn discrete_kirchhoff(&self, p: &[f64], y: &[f64]) -> Vec<f64> {
        discrete_kirchhoff(self.ops, p, y)
    }
}

/// `[K p - M y]_D` without a factorization.
pub fn discrete_kirchhoff(ops: &FeOperators, p: &[f64], y: &[f64]) -> Vec<f64> {
    let dir = ops.mesh.dirichlet_range();
    let mut out = ops.k.df.mul_vec(&p[ops.mesh.free_range()]);
    ops.k.dd.mul_vec_add(1.0, &p[dir.clone()], &mut out);
    let m_rows = ops.m.df.mul_vec(&y[ops.mesh.free_range()]);
    let m_dd = ops.m.dd.mul_vec(&y[dir]);
    for ((o, a), b) in out.iter_mut().zip(m_rows).zip(m_dd) {
        *o -= a + b;
    }
    out
}
