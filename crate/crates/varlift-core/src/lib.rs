//! varlift-core: lifts of control-affine systems to tangent and cotangent
//! bundles, variational and differential Hamiltonian dynamics, differential
//! Riccati / Lyapunov / HJB residual checks, CARE solving, and fixed-step
//! simulation with pairing and constraint-drift monitors.

pub mod error;
pub mod expr;
pub mod geometry;
pub mod report;
pub mod riccati;
pub mod sim;
pub mod systems;

pub use error::{Error, Result};
pub use expr::{
    AdScalar, Dual, Expr, HessianField, MatrixField, MetricField, SmoothMap, SymmetricMatrixField,
};
pub use report::{Domain, ResidualReport, SampleRecord, SampleSpec};
