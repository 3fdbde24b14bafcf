//! Drop box location: choose ballot drop box sites and a collection tour that
//! trade total cost against the worst-off population's voting access.
//!
//! [`exact`] solves a single access bound to optimality, [`heuristic`] traces
//! an approximate cost/access frontier, [`eval`] scores solutions, and
//! [`gen`] builds reproducible random instances.

pub mod model;

pub use model::*;
pub mod eval;
pub mod exact;
pub mod gen;
pub mod heuristic;
