//! Batch front end for the dfcb pipeline: JSON config in, CSV/JSON out.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_compare_explicit, cmd_sample, cmd_sweep, cmd_verify, CorruptTarget, CriterionLine,
    SampleSummary, SweepSummary, VerifyReport,
};
pub use config::{FdSteps, RunConfig, SweepAxis, SweepSpec, Tolerances};
