//! Manifolds with corners presented by explicit coordinate blocks, smooth
//! maps between them, corner invariants, tame-submersion checking and real
//! blow-ups.

pub mod blowup;
pub mod factor;
pub mod manifold;
pub mod map;
pub mod ops;
pub mod sample;

pub use blowup::{blow_up, BlowUpData, SubmanifoldSpec};
pub use factor::{Factor, ModelBlock};
pub use manifold::{pack_product, unpack_product, CoordinateManifold, Point, TangentVector};
pub use map::{EvalFn, SmoothMap};
pub use ops::{
    check_tame_submersion, depth, inward_cone_membership, TamenessReport, TamenessWitness,
};
pub use sample::SamplePlan;

/// Tolerance under which a boundary coordinate counts as vanishing.
pub const VANISH_TOL: f64 = 1e-12;
