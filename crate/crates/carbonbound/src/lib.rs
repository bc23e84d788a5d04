//! Uncertainty quantification for grid carbon-intensity forecasts and
//! uncertainty-aware load-shifting simulation.
//!
//! The crate turns point forecasts of hourly carbon intensity into
//! calibrated confidence intervals using sequential conformal prediction
//! with a sliding residual window and quantile regression forests, then
//! evaluates what those intervals buy a suspend-and-resume scheduler that
//! shifts datacenter load across time or regions.
//!
//! Module map:
//!
//! - [`timeseries`]: hour-indexed series, stamps, regions, intervals.
//! - [`ingest`]: delimited-file parsers, gap filling, energy-mix to
//!   carbon-intensity conversion.
//! - [`forecast`]: baseline point forecasters and accuracy analyses
//!   (MAPE, seasonal grouping, horizon buckets).
//! - [`conformal`]: residual windows, empirical quantiles, split
//!   conformal intervals, quantile regression forests, and the sequential
//!   interval loop.
//! - [`evaluate`]: coverage, the four-way coverage breakdown, and width
//!   statistics.
//! - [`shiftsim`]: emissions accounting and temporal/spatial
//!   suspend-and-resume shifting case studies.
//! - [`synthetic`]: deterministic synthetic series for demos and tests.
//! - [`config`] / [`pipeline`]: declarative run configuration and the
//!   end-to-end orchestration behind the `carbonbound` binary.
//!
//! Each major capability has a runnable example under `examples/`; start
//! with `spci_coverage` for the interval engine or `full_pipeline` for the
//! file-driven workflow.

pub mod config;
pub mod conformal;
pub mod evaluate;
pub mod forecast;
pub mod ingest;
pub mod pipeline;
pub mod shiftsim;
pub mod synthetic;
pub mod timeseries;

pub use timeseries::{HourlySeries, HourlyStamp, Interval, IntervalSeries, RegionId, Unit};
