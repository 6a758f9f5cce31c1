//! Finite element operators on the extended graph.
//!
//! Stiffness and mass matrices are built from the extended incidence matrix
//! `Ẽ`:
//!
//! ```text
//! A = Ẽ W_E Ẽᵀ,                    W_E = blkdiag(1/h_e I)
//! M = (|Ẽ| Ŵ |Ẽ|ᵀ + diag(|Ẽ| Ŵ |Ẽ|ᵀ)) / 6,   Ŵ = blkdiag(c_e h_e I)
//! ```
//!
//! with `c_e = 1` for the plain mass matrix and `c_e = c0_e` for the
//! potential term. `K = A + M_c0`.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{dot, CsrMatrix};
use crate::mesh::{ExtendedMesh, NodeLocation};

/// Scalar data on the graph: constant, constant per edge, or sampled at the
/// grid nodes and interpolated.
#[derive(Clone)]
pub enum Field {
    Constant(f64),
    PerEdge(Vec<f64>),
    Nodal(Arc<dyn Fn(NodeLocation) -> f64 + Send + Sync>),
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Constant(c) => write!(f, "Constant({c})"),
            Field::PerEdge(v) => write!(f, "PerEdge({v:?})"),
            Field::Nodal(_) => write!(f, "Nodal(..)"),
        }
    }
}

impl Field {
    pub fn nodal(f: impl Fn(NodeLocation) -> f64 + Send + Sync + 'static) -> Self {
        Field::Nodal(Arc::new(f))
    }

    /// Per-edge constants, if the field is piecewise constant.
    fn edge_values(&self, m: usize) -> Result<Option<Vec<f64>>> {
        match self {
            Field::Constant(c) => Ok(Some(vec![*c; m])),
            Field::PerEdge(v) if v.len() == m => Ok(Some(v.clone())),
            Field::PerEdge(v) => Err(Error::InvalidInput(format!(
                "per-edge field has {} values for {m} edges",
                v.len()
            ))),
            Field::Nodal(_) => Ok(None),
        }
    }
}

/// Data of the control problem
/// `min 1/2 |y - ybar|^2_{L2} + beta/2 |u|^2` s.t. `-y'' + c0 y = f`.
#[derive(Debug, Clone)]
pub struct ProblemData {
    pub beta: f64,
    /// Potential, piecewise constant per edge.
    pub c0: Field,
    pub f: Field,
    pub ybar: Field,
}

impl ProblemData {
    pub fn new(beta: f64, c0: Field, f: Field, ybar: Field) -> Result<Self> {
        let d = Self { beta, c0, f, ybar };
        d.validate()?;
        Ok(d)
    }

    /// Constant data everywhere.
    pub fn constant(beta: f64, c0: f64, f: f64, ybar: f64) -> Result<Self> {
        Self::new(beta, Field::Constant(c0), Field::Constant(f), Field::Constant(ybar))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidInput(format!("beta must be positive, got {}", self.beta)));
        }
        match &self.c0 {
            Field::Constant(c) if *c < 0.0 => {
                Err(Error::InvalidInput(format!("c0 must be nonnegative, got {c}")))
            }
            Field::PerEdge(v) if v.iter().any(|c| *c < 0.0) => {
                Err(Error::InvalidInput("c0 must be nonnegative on every edge".into()))
            }
            Field::Nodal(_) => Err(Error::InvalidInput("c0 must be constant per edge".into())),
            _ => Ok(()),
        }
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(beta, self.c0.clone(), self.f.clone(), self.ybar.clone())
    }
}

/// `A = Ẽ W_E Ẽᵀ`.
pub fn assemble_stiffness(mesh: &ExtendedMesh) -> CsrMatrix {
    let e = mesh.extended_incidence();
    let inv_h: Vec<f64> = mesh.interval_widths().iter().map(|h| 1.0 / h).collect();
    e.scale_cols(&inv_h)
        .matmul(&e.transpose())
        .expect("incidence shapes agree")
}

/// Mass matrix weighted by a per-edge coefficient (`1` gives `M`, `c0`
/// gives `M_c0`).
pub fn assemble_mass(mesh: &ExtendedMesh, coefficient: &[f64]) -> Result<CsrMatrix> {
    let m = mesh.graph().n_edges();
    if coefficient.len() != m {
        return Err(Error::InvalidInput(format!(
            "{} mass coefficients for {m} edges",
            coefficient.len()
        )));
    }
    if let Some(e) = coefficient.iter().position(|c| !(*c >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "mass coefficient on edge {e} is negative ({})",
            coefficient[e]
        )));
    }
    let abs_e = mesh.extended_incidence().abs();
    let mut weights = Vec::with_capacity(mesh.total_intervals());
    for (e, &c) in coefficient.iter().enumerate() {
        let w = c * mesh.h(e);
        weights.extend(std::iter::repeat(w).take(mesh.n_intervals(e)));
    }
    let g = abs_e.scale_cols(&weights).matmul(&abs_e.transpose())?;
    let diag = g.diagonal();
    Ok(g.add_diagonal(&diag)?.scale(1.0 / 6.0))
}

/// Load vector `b_i = (g, phi_i)_{L2}`.
///
/// Piecewise-constant fields are integrated exactly edge by edge; nodal
/// fields use `M * interpolant`.
pub fn assemble_load(mesh: &ExtendedMesh, mass: &CsrMatrix, g: &Field) -> Result<Vec<f64>> {
    match g.edge_values(mesh.graph().n_edges())? {
        Some(vals) => {
            let mut b = vec![0.0; mesh.n_dof()];
            for (e, &c) in vals.iter().enumerate() {
                // each linear element contributes c h / 2 to both endpoints
                let half = 0.5 * c * mesh.h(e);
                for k in 0..mesh.n_intervals(e) {
                    b[mesh.edge_node_dof(e, k)] += half;
                    b[mesh.edge_node_dof(e, k + 1)] += half;
                }
            }
            Ok(b)
        }
        None => {
            let Field::Nodal(f) = g else { unreachable!() };
            Ok(mass.mul_vec(&mesh.interpolate(|loc| f(loc))))
        }
    }
}

/// `(g, g)_{L2}`, exact for piecewise constants and computed from the
/// interpolant otherwise.
fn field_sq_norm(mesh: &ExtendedMesh, mass: &CsrMatrix, g: &Field) -> Result<f64> {
    match g.edge_values(mesh.graph().n_edges())? {
        Some(vals) => Ok(vals
            .iter()
            .zip(mesh.graph().lengths())
            .map(|(c, l)| c * c * l)
            .sum()),
        None => {
            let Field::Nodal(f) = g else { unreachable!() };
            let v = mesh.interpolate(|loc| f(loc));
            Ok(dot(&v, &mass.mul_vec(&v)))
        }
    }
}

/// Free/Dirichlet blocks of an `n_dof x n_dof` matrix.
#[derive(Debug, Clone)]
pub struct Blocks {
    pub ff: CsrMatrix,
    pub fd: CsrMatrix,
    pub df: CsrMatrix,
    pub dd: CsrMatrix,
}

/// Splits `a` along `free` (interior and Kirchhoff DOFs) and `dir`
/// (Dirichlet DOFs).
pub fn partition_blocks(a: &CsrMatrix, free: Range<usize>, dir: Range<usize>) -> Blocks {
    Blocks {
        ff: a.submatrix(free.clone(), free.clone()),
        fd: a.submatrix(free.clone(), dir.clone()),
        df: a.submatrix(dir.clone(), free),
        dd: a.submatrix(dir.clone(), dir),
    }
}

/// All assembled operators and load vectors for one mesh and data set.
#[derive(Debug, Clone)]
pub struct FeOperators {
    pub mesh: Arc<ExtendedMesh>,
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub mass_c0: CsrMatrix,
    /// `K = A + M_c0`.
    pub system: CsrMatrix,
    pub k: Blocks,
    pub m: Blocks,
    pub f_vec: Vec<f64>,
    pub ybar_vec: Vec<f64>,
    /// `||ybar||^2_{L2}`, the constant part of the tracking term.
    pub ybar_sq: f64,
}

impl FeOperators {
    pub fn assemble(mesh: Arc<ExtendedMesh>, data: &ProblemData) -> Result<Self> {
        data.validate()?;
        let n_edges = mesh.graph().n_edges();
        let c0 = data
            .c0
            .edge_values(n_edges)?
            .ok_or_else(|| Error::InvalidInput("c0 must be constant per edge".into()))?;
        let stiffness = assemble_stiffness(&mesh);
        let mass = assemble_mass(&mesh, &vec![1.0; n_edges])?;
        let mass_c0 = assemble_mass(&mesh, &c0)?;
        let system = stiffness.add(&mass_c0)?;
        let (free, dir) = (mesh.free_range(), mesh.dirichlet_range());
        let k = partition_blocks(&system, free.clone(), dir.clone());
        let m = partition_blocks(&mass, free, dir);
        let f_vec = assemble_load(&mesh, &mass, &data.f)?;
        let ybar_vec = assemble_load(&mesh, &mass, &data.ybar)?;
        let ybar_sq = field_sq_norm(&mesh, &mass, &data.ybar)?;
        Ok(Self {
            mesh,
            stiffness,
            mass,
            mass_c0,
            system,
            k,
            m,
            f_vec,
            ybar_vec,
            ybar_sq,
        })
    }

    pub fn n_free(&self) -> usize {
        self.mesh.n_free()
    }

    pub fn n_dirichlet(&self) -> usize {
        self.mesh.n_dirichlet()
    }

    pub fn f_free(&self) -> &[f64] {
        &self.f_vec[self.mesh.free_range()]
    }

    pub fn ybar_free(&self) -> &[f64] {
        &self.ybar_vec[self.mesh.free_range()]
    }

    pub fn ybar_dirichlet(&self) -> &[f64] {
        &self.ybar_vec[self.mesh.dirichlet_range()]
    }

    /// `(a, b)_{L2}` of two nodal vectors.
    pub fn l2_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        dot(a, &self.mass.mul_vec(b))
    }

    pub fn l2_norm(&self, a: &[f64]) -> f64 {
        self.l2_inner(a, a).max(0.0).sqrt()
    }

    /// `|a|_{H1}` (seminorm).
    pub fn h1_seminorm(&self, a: &[f64]) -> f64 {
        dot(a, &self.stiffness.mul_vec(a)).max(0.0).sqrt()
    }

    /// `||a||_{H1} = (||a||^2_{L2} + |a|^2_{H1})^{1/2}`.
    pub fn h1_norm(&self, a: &[f64]) -> f64 {
        (self.l2_inner(a, a) + dot(a, &self.stiffness.mul_vec(a))).max(0.0).sqrt()
    }

    /// `1/2 ||y - ybar||^2_{L2} + beta/2 |u|^2` for a state `y` in DOF order.
    pub fn objective(&self, beta: f64, y: &[f64], u: &[f64]) -> f64 {
        let tracking = self.l2_inner(y, y) - 2.0 * dot(y, &self.ybar_vec) + self.ybar_sq;
        0.5 * tracking.max(0.0) + 0.5 * beta * dot(u, u)
    }
}
