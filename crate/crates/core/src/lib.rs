//! Computational differential geometry for singular spaces: Lie groupoids
//! and Lie algebroids on manifolds with corners, real blow-ups, adiabatic
//! deformations, edge modifications, gluing and blow-up desingularization,
//! together with numerical verification suites for the defining properties
//! of each construction.
//!
//! The crate is organised in layers:
//!
//! * [`jet`] — forward-mode automatic differentiation (order ≤ 2);
//! * [`geometry`] — block manifolds with corners, smooth maps, tame
//!   submersions, blow-ups;
//! * [`groupoid`] — Lie groupoids as structural data plus axiom suites;
//! * [`algebroid`] — Lie algebroids, bracket computations and comparisons;
//! * deformation / desingularization / convolution layers built on top.

pub mod algebroid;
pub mod deformation;
pub mod desing;
pub mod geometry;
pub mod groupoid;
pub mod jet;

mod error;

pub use error::Error;

pub use algebroid::{
    algebroid_suite, compare_algebroids, lie_algebroid_of, tangent_algebroid, Algebroid,
    AlgebroidCheckConfig, Section, StructuredAlgebroid,
};
pub use deformation::{
    adiabatic_groupoid, edge_comparison, edge_modification, edge_modification_ni,
    scaling_groupoid, AdiabaticGroupoid,
};
pub use desing::{
    check_desing_algebroid_iso, check_desing_algebroid_iso_ni, desing_algebroid,
    desingularize, desingularize_ni, glue, hyperbolic_desingularize, Desingularization, GlueData,
    TameSubmanifold,
};
pub use geometry::{
    blow_up, check_tame_submersion, depth, inward_cone_membership, BlowUpData,
    CoordinateManifold, Factor, ModelBlock, Point, SamplePlan, SmoothMap, SubmanifoldSpec,
    TangentVector,
};
pub use groupoid::{axiom_suite, GroupoidMorphism, LieGroupoid, SuiteConfig};
pub use jet::Jet;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
