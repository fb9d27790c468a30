//! Experiment driver for the `hardedge` library.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod output;
pub mod spec;
pub mod verify;

use std::path::Path;

pub use output::{Check, Outcome};
pub use spec::{Command, ExperimentSpec};

/// Validates `spec`, prepares `out` and runs `cmd`.
pub fn run(cmd: Command, spec: &ExperimentSpec, out: &Path) -> anyhow::Result<Outcome> {
    spec.validate(cmd)?;
    ExperimentSpec::prepare_out(out)?;
    match cmd {
        Command::Kernel => commands::kernel(spec, out),
        Command::Statistic => commands::statistic(spec, out),
        Command::Verify => verify::verify(spec, out),
        Command::Mc => commands::mc(spec, out),
        Command::Equilibrium => commands::equilibrium(spec, out),
    }
}
