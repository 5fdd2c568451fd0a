//! Experiment runner for the preconditioned Helmholtz solvers: builds the
//! test problems, runs GMRES with the selected preconditioner and writes the
//! result tables, convergence histories and field slices as CSV.

pub mod bench;
pub mod config;
pub mod emit;
pub mod model;
pub mod run;

pub use config::{BoundaryChoice, ConfigFile, ExperimentSpec, PrecondId, ProblemId, SolverKind};
pub use run::{run, run_grid, ResultRow, RunOutcome};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] helmholtz_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("configuration: {0}")]
    Config(String),
}
