//! Experiment orchestration: configuration, seeded ensembles, sweeps over
//! a worker pool, aggregation and file output.
//!
//! Realizations run independently; results are reassembled in
//! (sweep point, realization) order, so the thread count never changes
//! the output bytes.

mod config;
mod experiments;
mod output;
mod seeds;
mod stats;
mod table;

pub use config::{
    CriteriaSettings, ExperimentConfig, ExperimentKind, SwSettings, Sweep, SweepVariable,
};
pub use experiments::{
    run_bath_liom_sweep, run_chain_spectrum, run_criteria, run_distance_sweep, run_experiment,
    run_percolation_1d, run_sw_step, ExperimentRecord, Skip,
};
pub use output::{write_record, OutputFiles};
pub use seeds::{derive_seed, realization_rng, splitmix64};
pub use stats::{linear_fit, Aggregate, LinearFit};
pub use table::Table;

use thiserror::Error;

use crate::diagnostics::DiagnosticsError;
use crate::linalg::LinalgError;
use crate::models::ModelError;
use crate::resonance::ResonanceError;
use crate::rotation::RotationError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl HarnessError {
    /// Process exit status for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Capacity(_) => 3,
            Self::Numerical(_) => 4,
            Self::Io(_) => 1,
        }
    }
}

impl From<ModelError> for HarnessError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Capacity { .. } => Self::Capacity(e.to_string()),
            ModelError::Linalg(l) => l.into(),
            other => Self::Config(other.to_string()),
        }
    }
}

impl From<LinalgError> for HarnessError {
    fn from(e: LinalgError) -> Self {
        Self::Numerical(e.to_string())
    }
}

impl From<DiagnosticsError> for HarnessError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::InvalidFraction(_) => Self::Config(e.to_string()),
            other => Self::Numerical(other.to_string()),
        }
    }
}

impl From<ResonanceError> for HarnessError {
    fn from(e: ResonanceError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<RotationError> for HarnessError {
    fn from(e: RotationError) -> Self {
        match e {
            RotationError::InvalidSchedule(_) => Self::Config(e.to_string()),
            other => Self::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(HarnessError::Config(String::new()).exit_code(), 2);
        assert_eq!(
            HarnessError::from(ModelError::Capacity { dim: 8, cap: 4 }).exit_code(),
            3
        );
        assert_eq!(HarnessError::from(LinalgError::NonFinite).exit_code(), 4);
    }
}
