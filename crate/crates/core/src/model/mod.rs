//! Domain types shared by every solver, plus the agents' best responses.

pub mod discrete;
pub mod linear;

pub use discrete::{
    agent_outcomes, best_response_targets, evaluate_criteria, AgentNode, AgentOutcome, Color,
    CriteriaSet, DiscreteInstance, Edge, EvalReport, TiePolicy,
};
pub use linear::{
    best_response_linear, compile_linear_to_discrete, cost, movement_dimension, target_color,
    true_position, LinearAgent, LinearClassifier, LinearInstance, LinearResponse,
};
