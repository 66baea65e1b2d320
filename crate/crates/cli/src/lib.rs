//! Config-driven experiment runner around `sensebench-core`.

pub mod config;
pub mod experiments;
