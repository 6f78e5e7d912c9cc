//! Config-driven experiments on top of `d2d-core`: TOML in, versioned CSV
//! tables and a manifest out.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod summary;

pub use config::{ConfigErrors, FieldError, LabConfig};
pub use error::{LabError, EXIT_CONFIG, EXIT_RUNTIME};
pub use experiment::{run_experiment, Experiment};
