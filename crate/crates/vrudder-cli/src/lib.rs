//! Command-line front end of the differential-thrust flight-control
//! toolkit: configuration ingestion, pipeline orchestration, and emission
//! of traces, reports, plots, and a run manifest.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod plot;
pub mod report;
