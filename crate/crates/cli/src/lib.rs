//! Command-line front end: argument parsing into a validated [`CommandPlan`],
//! execution against `qunip-core`, and the amplitude benchmark sweep.

pub mod args;
pub mod bench;
pub mod run;

pub use args::{max_qubits_from_env, parse_args, Command, CommandPlan, Format};
pub use bench::{bench_sweep, BenchRow, BenchSpec};
pub use run::{execute, render, CliError};
