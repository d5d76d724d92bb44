//! Scenario configuration, calibration, batch runs, reports, and sweeps.

mod calibrate;
mod config;
pub mod presets;
mod report;
mod sweep;

pub use calibrate::{calibrate, expected_metrics, CalibrationTarget, ExpectedMetrics};
pub use config::{
    load_config, load_config_str, ChannelConfig, CountRange, CropSpec, FrameSpec, MatrixRef,
    PlatformPair, PlatformRef, Scenario, ScenarioConfig,
};
pub use report::{emit, run, ComparisonRow, ModeReport, Report, ReportFormat, CSV_METRICS};
pub use sweep::{sweep, sweep_csv, Grid, SweepPoint};

use std::path::PathBuf;

use thiserror::Error;

use crate::accounting::AccountingError;
use crate::pipeline::PipelineError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },
    #[error("unknown {kind} preset `{name}`")]
    UnknownPreset { kind: &'static str, name: String },
    #[error("unattainable {target} = {value}: {bound}")]
    Unattainable {
        target: &'static str,
        value: f64,
        bound: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Accounting(#[from] AccountingError),
}

impl HarnessError {
    pub(crate) fn validation(field: impl Into<String>, reason: impl ToString) -> Self {
        HarnessError::Validation {
            field: field.into(),
            reason: reason.to_string(),
        }
    }

    /// Process exit code: 2 invalid input, 3 unattainable calibration, 4 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Unattainable { .. } => 3,
            HarnessError::Io { .. } => 4,
            _ => 2,
        }
    }
}
