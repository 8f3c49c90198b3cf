//! Batch runner: one experiment per invocation, JSON report plus CSV traces.
//!
//! Exit codes: `0` success, `1` internal failure, `2` invalid configuration or
//! input, `3` numerical budget exceeded.

pub mod config;
pub mod describe;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind};
pub use run::{run_experiment, RunOutput};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Failure(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Failure(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<ehlab::Error> for CliError {
    fn from(e: ehlab::Error) -> Self {
        use ehlab::Error as E;
        match e {
            E::InvalidArgument(_) | E::InvalidProcess(_) | E::Domain(_) => CliError::Schema(e.to_string()),
            E::HorizonExceeded(_) | E::BudgetExceeded(_) => CliError::Budget(e.to_string()),
            E::Invariant(_) => CliError::Failure(e.to_string()),
        }
    }
}
