//! Support library for the `riesz` command-line harness: configuration
//! loading/merging, Matrix Market I/O, and report rendering.

pub mod config;
pub mod mm;
pub mod outputs;
