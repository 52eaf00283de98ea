//! Vertex couplings on star-shaped quantum graphs.
//!
//! The crate covers the unitary parametrization of self-adjoint vertex
//! couplings, on-shell scattering matrices, closed-form half-line resolvent
//! kernels with Krein point insertions, a finite-difference resolvent used as
//! an independent check, and sweeps that measure how fast scaled δ couplings
//! approach the δ'_s and δ' couplings.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*F64` aliases below fix the scalar to `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approximation;
pub mod coupling;
pub mod error;
pub mod greens;
pub mod linalg;
pub mod oracle;
pub mod scalar;
pub mod scattering;

pub use approximation::{
    convergence_sweep, effective_robin, hs_norm, schedule, sector_difference, ApproximationStage,
    ConvergenceReport, DifferenceKernel, StageRecord, TargetFamily,
};
pub use coupling::{
    ABDiagnostics, ABPair, BoundaryValues, CouplingFamily, FamilyTag, VertexCoupling,
};
pub use error::{Error, Result};
pub use greens::{
    halfline_green, krein_insert, krein_insert_all, sector_decompose, star_green, HalflineBc,
    PointInteraction, SectorRole, SectorSpec, StarModel,
};
pub use oracle::{
    compare_kernels, error_budget, fd_resolvent_halfline, fd_resolvent_star, ErrorStats, GridSpec,
    SampledKernel,
};
pub use scalar::{ExtendedReal, Real, C};
pub use scattering::{bound_states, s_matrix, BoundState, SpectralParameter};

pub type VertexCouplingF64 = VertexCoupling<f64>;
pub type VertexCouplingF32 = VertexCoupling<f32>;
pub type ABPairF64 = ABPair<f64>;
pub type HalflineBcF64 = HalflineBc<f64>;
pub type StarModelF64 = StarModel<f64>;
pub type GridSpecF64 = GridSpec<f64>;
pub type ConvergenceReportF64 = ConvergenceReport<f64>;
pub type Complex64 = C<f64>;
