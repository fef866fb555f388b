//! Desingularization of a groupoid along a tame submanifold of its units:
//! the real blow-up of the unit space carries a glued groupoid that meets
//! the boundary front in an edge modification and recovers the original
//! groupoid away from it.

pub mod algebroid;
pub mod desingularize;
pub mod glue;
pub mod tame;

pub use algebroid::{
    bracket_closure_report, check_desing_algebroid_iso, check_desing_algebroid_iso_ni,
    desing_algebroid, desing_algebroid_ni, desing_correspondence, ideal_report,
};
pub use desingularize::{
    anisotropy_comparison, canonical_form_check, desingularize, desingularize_ni,
    hyperbolic_desingularize, hyperbolic_model, hyperbolic_model_morphism, hyperbolic_model_ni,
    locus_restriction_model, off_locus_recovery, pair_section, Desingularization,
};
pub use glue::{check_glue_hypothesis, glue, piece_recovery, GlueConfig, GlueData, GluePiece};
pub use tame::TameSubmanifold;
