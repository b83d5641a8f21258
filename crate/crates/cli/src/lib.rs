//! Parameter sweeps over `maxbound-core`: bracket verification, tail tables
//! and experts simulations, with CSV and JSON reports.

pub mod config;
pub mod experts;
pub mod report;
pub mod tails;
pub mod verify;

pub use config::{Format, Suite, SweepArgs, SweepConfig};
