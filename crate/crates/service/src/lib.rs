//! Project store, HTTP API and command-line front end for `reqprio-core`.

pub mod api;
pub mod cli;
pub mod report;
pub mod store;

/// Environment variable naming the project store directory.
pub const STORE_ENV: &str = "REQPRIO_STORE";
