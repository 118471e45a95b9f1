//! Simulation, key-rate evaluation and placement optimisation for one-way
//! quantum repeater chains built on GKP qubits, optionally concatenated with a
//! small outer stabilizer code.

pub mod analytic;
pub mod app;
pub mod cache;
pub mod codes;
pub mod config;
pub mod cost;
pub mod error;
pub mod io;
pub mod keyrate;
pub mod mc;
pub mod quad;
pub mod rescale;

pub use error::{Error, Result};
