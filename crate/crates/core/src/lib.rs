//! Empirical estimation of an algorithm's time and memory complexity.
//!
//! The target is run on growing samples of a dataset, seven complexity
//! families are fitted to the measurements, the family with the lowest
//! leave-one-out error wins, and its fit is extrapolated to the full dataset.

pub mod alloc;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod estimate;
pub mod family;
pub mod measurement;
pub mod models;
pub mod paragon;
pub mod plot;
pub mod probe;
pub mod report;
pub mod sampling;
pub mod schedule;

pub use dataset::{ingest_dataset, Dataset, DatasetFormat};
pub use error::{Error, Result};
pub use estimate::{estimate, Estimate};
pub use family::ComplexityFamily;
pub use measurement::{run_campaign, CampaignConfig, Measurement, Target, TargetSpec};
pub use models::{fit_all, BenchmarkResult, FittedModel, MeasurementSeries, Resource};
pub use probe::MemoryProbe;
pub use report::ComplexityReport;
