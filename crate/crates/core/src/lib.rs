//! Facilitated asymmetric exclusion on rings and closed windows: event-driven
//! simulation, exact finite-state solution, closed-form final measures and the
//! coupling with plain exclusion.

pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod lattice;
pub mod rng;
pub mod stats;
pub mod tasep;
pub mod verify;

pub use dynamics::{ClockScheme, Direction, Model, Move, MoveSet, RateParams, RunRecord};
pub use error::{Error, Result};
pub use lattice::{Component, ComponentList, DensityValue, LatticeConfig, Topology};
