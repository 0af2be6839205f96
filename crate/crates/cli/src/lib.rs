//! Batch driver: configuration, point cache, pipeline, reports and plot data.

pub mod cache;
pub mod config;
pub mod pipeline;
pub mod plot;
pub mod report;

use zenoprep_core::Error;

pub use config::RunConfig;
pub use pipeline::{run_pipeline, Pipeline};
pub use report::Report;

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;
pub const EXIT_DEGENERATE: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{op} failed for {params}: {source}")]
    Stage {
        op: &'static str,
        params: String,
        #[source]
        source: Error,
    },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn stage(op: &'static str, params: impl Into<String>, source: Error) -> Self {
        CliError::Stage {
            op,
            params: params.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        let core = match self {
            CliError::Config(_) => return EXIT_CONFIG,
            CliError::Io(_) => return EXIT_OTHER,
            CliError::Stage { source, .. } | CliError::Core(source) => source.root(),
        };
        match core {
            Error::InvalidLattice { .. } | Error::InvalidSector(_) | Error::InvalidParameter(_) => EXIT_CONFIG,
            Error::Capacity { .. } | Error::Overflow(_) => EXIT_CAPACITY,
            Error::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
            Error::DegenerateGroundState { .. } => EXIT_DEGENERATE,
            _ => EXIT_OTHER,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let cases = [
            CliError::Config("x".into()),
            CliError::stage(
                "solve",
                "2x1",
                Error::Capacity {
                    what: "dim",
                    requested: 2,
                    limit: 1,
                },
            ),
            CliError::Core(Error::PointFailed {
                s: 0.5,
                source: Box::new(Error::NoConvergence {
                    iterations: 3,
                    residual: 1.0,
                }),
            }),
            CliError::Core(Error::DegenerateGroundState { gap: 0.0, tol: 1e-8 }),
        ];
        let codes: Vec<i32> = cases.iter().map(|c| c.exit_code()).collect();
        assert_eq!(codes, [EXIT_CONFIG, EXIT_CAPACITY, EXIT_NO_CONVERGENCE, EXIT_DEGENERATE]);
    }
}
