//! horoforge: distances, horofunction embeddings, boundary limits and
//! translation lengths induced by a bifunctional I: M x N -> R.
//!
//! Any map I that separates points induces a (possibly asymmetric) distance
//! d_{I,M}(x, y) = sup_z { I(x, z) - I(y, z) }. This crate realizes the
//! supremum as an exact maximum over finite witness sets plus derivative-free
//! refinement, embeds N into basepoint-normalized Lipschitz functions via
//! horofunctions, follows boundary limits, and estimates translation lengths
//! of group actions — together with built-in geometries (Euclidean inner
//! product, half-plane, Funk polytopes, flat-torus Teichmüller space with
//! slope currents) on which everything is checkable against closed forms.

pub mod bifunctional;
pub mod cli;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod geometries;
pub mod horospace;
pub mod point;
pub mod verify;

pub use bifunctional::{
    check_separation, evaluate, lipschitz_defect, quotient_points, Bifunctional,
    CustomBifunctional, Provenance, WitnessSet,
};
pub use engine::{
    distance, distance_on_witnesses, extend_to_completion, refine_witnesses, symmetrize,
    triangle_deviation, CauchySequence, DistanceEstimate, SearchConfig,
};
pub use dynamics::{
    act_horofunction, detect_north_south, invariance_defect, translation_length_functional,
    translation_length_metric, GroupElement, NsReport, TranslationEstimate,
};
pub use error::{Error, Result};
pub use horospace::{
    attain_sup, boundary_limit, embed_sample, horo_sup_distance, horofunction, BoundaryOutcome,
    Horofunction, LandmarkSet,
};
pub use point::{Domain, Point};
