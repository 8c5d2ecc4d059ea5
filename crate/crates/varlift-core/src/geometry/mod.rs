//! Tangent/cotangent bundle lifts, Lie operations, and subbundle checks.

pub mod lie;
pub mod lift;
pub mod state;
pub mod subbundle;

pub use lie::{eigen_section_check, lie_bracket, lie_derivative_oneform, SectionKind};
pub use lift::{
    whitney_combine, CompleteHamiltonianLift, CompleteLiftFn, CompleteLiftVf, CotangentVectorField,
    HamiltonianFunction, TangentVectorField, VerticalHamiltonianLift, VerticalLiftFn,
    VerticalLiftVf, WhitneySum,
};
pub use state::{BundleRate, CotangentState, TangentState, WhitneyRate, WhitneyState};
pub use subbundle::{
    graph_invariance_at, graph_invariance_residual, integrability_residual, lagrangian_check,
    SubbundleUV,
};
