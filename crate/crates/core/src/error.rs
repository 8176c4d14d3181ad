use crate::boundary::Side;

/// Errors reported by the solver and its building blocks.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("structural error: {0}")]
    Structure(String),

    #[error("degenerate edge ({i}, {j}): zero viscosity between distinct states")]
    DegenerateEdge { i: usize, j: usize },

    #[error("numerical failure at node {node}: {what}")]
    Numerical { node: usize, what: String },

    #[error("{side} boundary: {what}")]
    Boundary { side: Side, what: String },

    #[error("time step failed at t = {t:.6e} (step {step}): {what}")]
    StepFailure { t: f64, step: usize, what: String },

    #[error("benchmark error: {0}")]
    Benchmark(String),
}

pub type Result<T> = std::result::Result<T, Error>;
