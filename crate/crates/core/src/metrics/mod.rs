//! Graph statistics, distribution similarity, a brute-force feasibility
//! oracle and an adapter for external solvers.

mod community;
mod oracle;
mod similarity;
mod solver;
mod stats;

pub use community::{greedy_communities, modularity, square_clustering, Graph};
pub use oracle::{check_solution, feasibility_bruteforce, row_tolerance, FeasStatus, FeasVerdict, Violation};
pub use similarity::{jsd, jsd_mass, similarity_score, SimilarityReport, StatDivergence, DEFAULT_BINS};
pub use solver::{solve_external, OutputProfile, SolveResult, SolveStatus, SolverConfig};
pub use stats::{bipartite_graph, compute_stats, mean_std, GraphStats};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("instance has no rows or no columns")]
    EmptyInstance,
    #[error("sample has no finite values")]
    EmptySample,
    #[error("bin count must be positive")]
    BadBins,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("outside oracle scope: {0}")]
    OutOfScope(String),
    #[error("solver not found: {0}")]
    SolverNotFound(String),
    #[error("solver run failed: {0}")]
    Solver(String),
    #[error("bad output profile: {0}")]
    Profile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
