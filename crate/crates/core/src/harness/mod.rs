//! Scenario configuration, policy comparisons, ANFIS training-data generation and
//! CSV output.

pub mod canonical;
mod compare;
mod config;
mod csv_out;
mod training;

use thiserror::Error;

use crate::anfis::AnfisError;
use crate::netsim::NetsimError;
use crate::reckoning::ReckoningError;

pub use crate::netsim::{MetricsReport, Sample};
pub use compare::{run_compare, run_policies, with_policy, ComparisonRow, ComparisonTable};
pub use config::*;
pub use csv_out::{emit_csv, parse_series_csv, report_csv, table_csv, CsvSource};
pub use training::{
    generate_training_set, input_universes, sweep, train_anfis, train_threshold_policy, SweepOptions, SweepOutcome,
    TrainOptions, TrainedPolicy, CALIBRATION_ROUNDS,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Config(#[from] ConfigErrors),
    #[error(transparent)]
    Netsim(#[from] NetsimError),
    #[error(transparent)]
    Reckoning(#[from] ReckoningError),
    #[error(transparent)]
    Anfis(#[from] AnfisError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
