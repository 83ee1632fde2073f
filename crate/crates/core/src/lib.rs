//! Agent-based simulation of dynamic team composition, coordination modes and
//! individual learning on NK performance landscapes.
//!
//! The crate is organized along the model's sequence of events:
//!
//! - [`landscape`]: interdependence structures, NK landscapes, exact optima.
//! - [`population`]: agents, beliefs, utility and error-perturbed estimates.
//! - [`formation`]: signaling-based team (re-)formation.
//! - [`coordination`]: fully autonomous, sequential, liaison and lateral protocols.
//! - [`learning`]: outcome updates, memory decay, discovery and forgetting.
//! - [`engine`]: scenario grid, the per-period loop and the seeded round runner.
//! - [`metrics`]: performance measures, confidence intervals, grouped tables.
//! - [`output`] and [`config`]: CSV schemas, run manifests and config files.
//! - [`oracle`]: brute-force verification checks exposed through the CLI.

pub mod config;
pub mod coordination;
pub mod engine;
pub mod error;
pub mod formation;
pub mod landscape;
pub mod learning;
pub mod metrics;
pub mod oracle;
pub mod output;
pub mod population;
pub mod rng;

pub use error::{Error, Result};
