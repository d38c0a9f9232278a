//! Incomplete intermodal terminal location.
//!
//! Decide which candidate terminals to open and which rail links to build
//! between them so that road plus intermodal routing cost, plus terminal
//! and link costs, is minimal. The crate provides the data model, a seeded
//! instance generator, the four model variants as solver-agnostic MIPs, a
//! bounded-variable simplex, an exact branch-and-bound, a brute-force
//! oracle and a local-search matheuristic.

pub mod config;
pub mod exact;
pub mod error;
pub mod formulation;
pub mod generator;
pub mod heuristic;
pub mod instance;
pub mod io;
pub mod lp;
pub mod naming;
pub mod solution;
pub mod variant;

pub use config::Configuration;
pub use error::{Error, Result};
pub use instance::{Instance, Matrix, Point};
pub use variant::{LinkMode, VariantKind, VariantSpec};
