//! Optimal Dirichlet boundary control of elliptic equations on metric graphs.
//!
//! The crate discretizes `-y'' + c0 y = f` on every edge of a metric graph
//! with continuous piecewise-linear finite elements, Kirchhoff-Neumann
//! conditions at free vertices and Dirichlet controls at the remaining ones.
//! The first-order optimality system of the tracking-type objective
//! `1/2 |y - ybar|^2_{L2} + beta/2 |u|^2` is assembled as a symmetric
//! saddle-point (KKT) system and solved with GMRES or MINRES using
//! Schur-complement based block preconditioners.
//!
//! Module map:
//! - [`graphs`]: combinatorial / metric graphs, generators and loaders
//! - [`mesh`]: extended graph, DOF ordering, extended incidence matrices
//! - [`linalg`]: CSR kernel, sparse factorizations, dense eigenvalues
//! - [`assembly`]: stiffness, mass and load assembly, block partition
//! - [`pde`]: state, harmonic extension, adjoint and discrete Kirchhoff map
//! - [`optcontrol`]: KKT operator, preconditioners, Krylov solvers, oracle
//! - [`experiments`]: iteration / convergence / eigenvalue studies

pub mod assembly;
pub mod error;
pub mod experiments;
pub mod graphs;
pub mod linalg;
pub mod mesh;
pub mod optcontrol;
pub mod par;
pub mod pde;

pub use error::{Error, Result};
