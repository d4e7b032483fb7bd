//! File formats, parallel grid work and experiment drivers on top of
//! [`hedgehog_core`].

pub use hedgehog_core;

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod parallel;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
