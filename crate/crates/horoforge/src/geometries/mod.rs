//! Built-in geometries: each one is a bifunctional whose induced distance is
//! known in closed form or bounded by one, so the engine can be checked
//! against it.

pub mod euclidean;
pub mod funk;
pub mod liouville;
pub mod minsky;
pub mod nnls;
pub mod torus;
