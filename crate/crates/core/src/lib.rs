//! Data-driven adaptive impedance matching for tunable L-networks whose
//! behavior is deformed by fixed parasitics.
//!
//! The crate is layered bottom-up:
//!
//! - [`network`]: two-port ABCD / S-parameter algebra and reflection relations.
//! - [`circuit`]: the exact circuit oracle, the ideal L-network and its closed form.
//! - [`nn`]: the feed-forward surrogate (forward, reverse mode, Adam, training, model files).
//! - [`data`]: sweeps, inverse datasets, mismatch scenarios, noise, persistence.
//! - [`matching`]: SAPSO, AD-Adam, inverse-network, grid and ideal-analytic strategies.
//! - [`bench`]: run configuration, scenario benchmark and reports.

pub mod bench;
pub mod circuit;
pub mod data;
pub mod error;
pub mod matching;
pub mod network;
pub mod nn;
pub mod stats;

pub use error::{Error, Result};
