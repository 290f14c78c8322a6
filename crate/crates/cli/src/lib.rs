//! Command-line front end for the `catsim` model: figure data, distance
//! sweeps and the self-check suite.

pub mod app;
pub mod check;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use app::run;
