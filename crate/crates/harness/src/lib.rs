//! Configuration, run directories, parameter sweeps and the acceptance suite for
//! `kramers-core`. The `kramers` binary is a thin CLI over [`commands`] and [`verify`].

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod setup;
pub mod verify;

pub use config::RunConfig;
pub use error::{HarnessError, Result};
