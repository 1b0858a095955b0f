//! Batch front end for `duskfcm-core`: dataset indexing and image files,
//! JSON pipeline configs, parallel runs with per-sample reports, method
//! benchmarks, feature-subset calibration and the `duskfcm` command line.

pub mod bench;
pub mod calibrate;
pub mod cli;
pub mod config;
pub mod dataio;
pub mod error;
pub mod phantoms;
pub mod report;
pub mod runner;

pub use config::{PipelineConfig, ReportFormat};
pub use error::{Error, Result};
pub use report::RunReport;
