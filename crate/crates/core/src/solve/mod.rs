//! Exact and heuristic backends, the independent verifier, and LP export.

mod bnb;
mod heuristic;
mod lpfile;
pub mod simplex;
mod verify;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use bnb::{solve_exact, solve_exact_with};
pub use heuristic::solve_heuristic;
pub use lpfile::{export_lp, parse_lp, LpDocument, LpRowDoc};
pub use verify::{verify, VerificationReport, Violation, VERIFY_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    BudgetExhausted,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible | SolveStatus::BudgetExhausted)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub nodes: u64,
    pub lp_iterations: u64,
    pub heuristic_iterations: u64,
    /// Milliseconds; never written to report files.
    #[serde(skip)]
    pub wall_time_ms: u128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// One value per model variable; empty when infeasible without incumbent.
    pub assignment: Vec<f64>,
    pub objective_value: f64,
    pub status: SolveStatus,
    pub stats: SolverStats,
    /// Name of a row or bound proven unsatisfiable, when known.
    pub certificate: Option<String>,
}

impl Solution {
    pub(crate) fn infeasible(stats: SolverStats, certificate: Option<String>) -> Self {
        Solution {
            assignment: Vec::new(),
            objective_value: f64::INFINITY,
            status: SolveStatus::Infeasible,
            stats,
            certificate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveBudget {
    /// Seconds. Results stay deterministic only while this limit is not hit.
    pub max_wall_time: f64,
    /// Branch-and-bound nodes.
    pub max_nodes: u64,
    /// Local-search moves.
    pub max_iterations: u64,
    /// Relative optimality gap for pruning.
    pub gap_tolerance: f64,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget { max_wall_time: 600.0, max_nodes: 200_000, max_iterations: 20_000, gap_tolerance: 1e-9 }
    }
}

impl SolveBudget {
    pub fn wall_time(&self) -> Duration {
        Duration::from_secs_f64(self.max_wall_time.max(0.0))
    }
}
