//! IO, parallel evaluation and command-line plumbing around `tokamak-uq-core`.

pub mod cli;
pub mod config;
pub mod eval;
pub mod io;

pub use tokamak_uq_core as core;
