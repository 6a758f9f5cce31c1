//! Discrete optimality system and its preconditioned iterative solution.

pub mod kkt;
pub mod krylov;
pub mod precond;
pub mod solve;

pub use kkt::{KktSystem, KKT_DENSE_CAP};
pub use krylov::{gmres, gmres_left, minres, KrylovResult};
pub use precond::{mass_schur_complement, PreconKind, Preconditioner, IDEAL_CAP};
pub use solve::{
    kkt_block_residuals, optimality_residual, reduced_oracle, solve_ocp, solve_ocp_with, OcpSolution,
    SolveOptions, SolveStats, SolverKind, ORACLE_CAP,
};
