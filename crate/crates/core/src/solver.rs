//! Maximum true positives subject to zero false positives on a discrete
//! instance.
//!
//! Start from every criterion and sweep the agents in order. Whenever an
//! agent's cheapest surviving criterion is reached through a Red edge, that
//! criterion is deleted on the spot. Sweeps repeat until one makes no
//! deletion or nothing is left. Any criteria set without a gaming agent is a
//! subset of the result, so the result is optimal for weighted agents too.

use serde::Serialize;

use crate::model::discrete::{
    cheapest_edge, evaluate_criteria, Color, CriteriaSet, DiscreteInstance, EvalReport, TiePolicy,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Deletion {
    pub round: usize,
    /// Index of the gaming agent.
    pub agent: usize,
    /// Index of the deleted criterion.
    pub criterion: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub p_final: CriteriaSet,
    pub report: EvalReport,
    pub rounds: usize,
    pub deletions: Vec<Deletion>,
    /// Cheapest-edge lookups performed; at most `|P| * n`.
    pub evaluations: usize,
}

pub fn solve_no_fp(instance: &DiscreteInstance) -> SolveResult {
    solve_with_policy(instance, instance.tie_policy())
}

/// Runs the solver as if agents broke equal-cost ties with `tie`. Under
/// `Optimistic` the zero-FP guarantee holds only if agents really do prefer
/// Blue on ties.
pub fn solve_with_policy(instance: &DiscreteInstance, tie: TiePolicy) -> SolveResult {
    if tie != instance.tie_policy() {
        return solve_with_policy(&instance.with_tie_policy(tie), tie);
    }
    let tau = instance.tau();
    let agents = instance.agents();
    let mut alive = CriteriaSet::full(instance.criteria().len());
    // Deletions are permanent, so each agent's first live edge only moves forward.
    let mut cursor = vec![0usize; agents.len()];
    let mut deletions = Vec::new();
    let mut rounds = 0;
    let mut evaluations = 0;

    while !alive.is_empty() {
        rounds += 1;
        let mut deleted = false;
        for (i, agent) in agents.iter().enumerate() {
            evaluations += 1;
            let edges = &agent.edges;
            while cursor[i] < edges.len() && !alive.contains(edges[cursor[i]].to) {
                cursor[i] += 1;
            }
            let Some(k) = cheapest_edge(edges, cursor[i], |c| alive.contains(c), tie, tau) else {
                continue;
            };
            if edges[k].color == Color::Red {
                alive.remove(edges[k].to);
                deletions.push(Deletion {
                    round: rounds,
                    agent: i,
                    criterion: edges[k].to,
                });
                deleted = true;
            }
        }
        if !deleted {
            break;
        }
    }

    let report = evaluate_criteria(instance, &alive);
    SolveResult {
        p_final: alive,
        report,
        rounds,
        deletions,
        evaluations,
    }
}

/// True iff no agent takes a Red edge into `selected`.
pub fn verify_zero_fp(instance: &DiscreteInstance, selected: &CriteriaSet) -> bool {
    evaluate_criteria(instance, selected).fp_count == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::discrete::AgentNode;
    use Color::{Blue, Red};

    fn worked_example() -> DiscreteInstance {
        DiscreteInstance::new(
            vec!["p1".into(), "p2".into()],
            vec![
                AgentNode::unit("x1", &[(0, 0.5, Blue)]),
                AgentNode::unit("x2", &[(0, 0.3, Red), (1, 0.4, Blue)]),
            ],
            TiePolicy::Pessimistic,
        )
        .unwrap()
    }

    #[test]
    fn worked_example_keeps_only_p2() {
        let inst = worked_example();
        let res = solve_no_fp(&inst);
        assert_eq!(inst.ids_of(&res.p_final), vec!["p2"]);
        assert_eq!(res.report.tp_count, 1);
        assert_eq!(res.report.fp_count, 0);
        assert_eq!(
            res.deletions,
            vec![Deletion {
                round: 1,
                agent: 1,
                criterion: 0
            }]
        );
        assert_eq!(res.rounds, 2);
    }

    #[test]
    fn all_blue_keeps_everything() {
        let inst = DiscreteInstance::new(
            vec!["p1".into(), "p2".into()],
            vec![
                AgentNode::unit("x1", &[(0, 0.5, Blue), (1, 0.2, Blue)]),
                AgentNode::unit("x2", &[(1, 0.9, Blue)]),
            ],
            TiePolicy::Pessimistic,
        )
        .unwrap();
        let res = solve_no_fp(&inst);
        assert_eq!(res.p_final, CriteriaSet::full(2));
        assert!(res.deletions.is_empty());
        assert_eq!(res.rounds, 1);
    }

    #[test]
    fn red_everywhere_cheaper_than_blue_empties_the_set() {
        let inst = DiscreteInstance::new(
            vec!["p1".into(), "p2".into(), "p3".into()],
            vec![AgentNode::unit(
                "x",
                &[(0, 0.1, Red), (1, 0.2, Red), (2, 0.3, Red)],
            )],
            TiePolicy::Pessimistic,
        )
        .unwrap();
        let res = solve_no_fp(&inst);
        assert!(res.p_final.is_empty());
        assert_eq!(res.deletions.len(), 3);
        assert!(res.evaluations <= 3);
    }

    #[test]
    fn verify_examples() {
        let inst = worked_example();
        assert!(verify_zero_fp(&inst, &solve_no_fp(&inst).p_final));
        assert!(!verify_zero_fp(&inst, &CriteriaSet::full(2)));
        assert!(verify_zero_fp(&inst, &CriteriaSet::empty(2)));
    }

    #[test]
    fn optimistic_run_differs_on_ties() {
        let inst = DiscreteInstance::new(
            vec!["p1".into(), "p2".into()],
            vec![AgentNode::unit("x", &[(0, 0.5, Red), (1, 0.5, Blue)])],
            TiePolicy::Pessimistic,
        )
        .unwrap();
        assert_eq!(
            solve_no_fp(&inst).p_final,
            CriteriaSet::from_indices(2, [1])
        );
        let opt = solve_with_policy(&inst, TiePolicy::Optimistic);
        assert_eq!(opt.p_final, CriteriaSet::full(2));
    }
}
