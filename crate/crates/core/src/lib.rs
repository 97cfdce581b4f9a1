//! Robust joint spectrum and power allocation for cellular V2X under
//! imperfect CSI: channel model, Bernstein and self-learning per-pair
//! allocators, baselines, bipartite matching and a Monte Carlo harness.

pub mod baselines;
pub mod bernstein;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry_channel;
pub mod harness;
pub mod matching;
pub mod pair;
pub mod selflearn;
pub mod validation;

pub use config::{Method, ScenarioConfig, SweepParam};
pub use error::{ConfigError, Error, ModelError, Result};
