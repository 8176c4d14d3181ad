//! Configuration-driven runner for the `swe-afc` solver.
//!
//! Runs write, per scheme and resolution, solution snapshots
//! (`x,h,hv,v,b,H`), a per-step diagnostics table and, for convergence
//! studies, an error/EOC table. Each file starts with the run configuration
//! as `# `-prefixed TOML, so any artifact can be fed back to `--config`.

pub mod config;
pub mod error;
pub mod expr;
pub mod runner;

pub use config::{CustomProblem, OutputSection, RunConfig, TimeSection};
pub use error::CliError;
pub use runner::{convergence_study, exact_csv, run, EocTable, RunRecord};
