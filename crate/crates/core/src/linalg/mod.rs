//! Sparse linear algebra used by assembly, preconditioners and probes.

pub mod eig;
pub mod factor;
pub mod mm;
pub mod sparse;

pub use eig::{dense_eigs, DEFAULT_EIG_CAP};
pub use factor::{FactorKind, Factorization};
pub use sparse::{axpy, dot, norm2, CsrMatrix};
