//! Setpoint projection and control-loop simulation for a grid-connected
//! battery energy storage system.
//!
//! Droop control turns grid frequency and voltage deviations into an initial
//! (P, Q) request. The request is then mapped onto the set of setpoints the
//! converter and battery can actually deliver, either exactly
//! ([`optimizer::solve`]) or through a precomputed per-degree radius table
//! ([`discretizer::fast_project`]).

pub mod battery;
pub mod capability;
pub mod cli;
pub mod config;
pub mod discretizer;
pub mod droop;
pub mod harness;
mod kv;
pub mod optimizer;
pub mod units;

pub use kv::KvError;
pub use units::{BaseQuantities, ControlParams, GridMeasurement, Setpoint};
