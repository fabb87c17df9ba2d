//! Classification with strategic agents who can either game the classifier
//! or genuinely improve.
//!
//! The discrete model is a weighted bipartite graph between agents and
//! criteria whose edges are Blue (improving) or Red (gaming); the linear model
//! is a halfspace in feature space where some dimensions are improvement
//! dimensions and the rest only change how an agent looks.

pub mod error;
pub mod generators;
pub mod io;
pub mod learning;
pub mod linear;
pub mod model;
pub mod oracles;
pub mod solver;

/// Default tolerance for cost ties, affordability and halfspace membership.
pub const TAU: f64 = 1e-9;

pub use error::{Error, Result};
pub use learning::{
    batch_size_partial, exact_performance_error, learn_full, learn_full_with_samples,
    learn_partial, partial_total_bound, run_trials, sample_size_full, AgentDistribution,
    LearnResult, LearnTrace, Learner, TrialConfig, TrialRow, TrialTable,
};
pub use linear::{
    count_tp_fp, find_dimj_classifier, find_linear_classifier, improvement_margin,
    shifted_classifier, solve_2d_general, solve_2d_linear, ProjectionPoints, ThreeSets,
};
pub use model::{
    agent_outcomes, best_response_linear, best_response_targets, compile_linear_to_discrete, cost,
    evaluate_criteria, movement_dimension, target_color, true_position, AgentNode, AgentOutcome,
    Color, CriteriaSet, DiscreteInstance, Edge, EvalReport, LinearAgent, LinearClassifier,
    LinearInstance, LinearResponse, TiePolicy,
};
pub use oracles::{oracle_linear_grid, oracle_subsets, oracle_targets_2d, FpBudget, OracleResult};
pub use solver::{solve_no_fp, solve_with_policy, verify_zero_fp, SolveResult};
