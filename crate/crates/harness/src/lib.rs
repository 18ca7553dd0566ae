//! Scenario configuration, beam-management schemes, SNR sweeps, gain maps
//! and result files for omni-surface experiments.

use std::path::PathBuf;

use omnisurf_beamforming::BeamformingError;
use omnisurf_channel::ChannelError;
use omnisurf_codebook::CodebookError;
use omnisurf_geometry::GeometryError;
use omnisurf_surface::SurfaceError;
use omnisurf_training::TrainingError;
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod gainmap;
pub mod output;
pub mod scene;
pub mod schemes;
pub mod sweep;
pub mod verify;

pub use config::{ScenarioConfig, OUT_DIR_ENV};
pub use schemes::{build_schemes, DropInstance, Environment, Scheme, SchemeOutcome, SCHEME_NAMES};
pub use sweep::{snr_sweep, Execution, ExperimentResult, SummaryRow, SweepRow};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
    #[error(transparent)]
    Training(#[from] TrainingError),
    #[error(transparent)]
    Beamforming(#[from] BeamformingError),
    #[error("{0}")]
    Numerical(String),
}

impl HarnessError {
    /// Process exit code: 1 for bad input or I/O, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io { .. } | HarnessError::Csv { .. } => 1,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }
}
