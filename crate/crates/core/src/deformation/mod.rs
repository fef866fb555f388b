//! Deformation constructions: the adiabatic family of a groupoid, the
//! scaling groupoid of the half-line, and edge modifications along a
//! fibered projection.

pub mod adiabatic;
pub mod edge;
pub mod scaling;

pub use adiabatic::{adiabatic_groupoid, scaling_action, scaling_morphism, AdiabaticGroupoid};
pub use edge::{
    edge_comparison, edge_modification, edge_modification_ni, edge_positive_model,
    edge_zero_model, lifted_projection,
};
pub use scaling::scaling_groupoid;
