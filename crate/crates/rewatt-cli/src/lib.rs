//! Harness library behind the `rewatt` binary: configuration, seeded
//! pipelines, and CSV reporting. Kept as a library so integration tests can
//! drive full experiments in-process.

pub mod config;
pub mod pipeline;
pub mod report;
