//! The weighted, colored bipartite model: agents on the left, criteria on the
//! right, and the best response of an agent to a selected criteria subset.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TAU;

/// Whether taking an edge leaves the agent truly qualified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Blue,
    Red,
}

/// Ordering applied to an agent's edges whose costs agree within the
/// instance tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiePolicy {
    /// Red before Blue, then lower criterion index.
    #[default]
    Pessimistic,
    /// Blue before Red, then lower criterion index.
    Optimistic,
}

impl TiePolicy {
    fn rank(self, color: Color) -> u8 {
        match (self, color) {
            (TiePolicy::Pessimistic, Color::Red) | (TiePolicy::Optimistic, Color::Blue) => 0,
            _ => 1,
        }
    }
}

impl std::str::FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pessimistic" => Ok(TiePolicy::Pessimistic),
            "optimistic" => Ok(TiePolicy::Optimistic),
            other => Err(Error::param(
                "tie",
                format!("expected `pessimistic` or `optimistic`, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// Index into the instance's criteria list.
    pub to: usize,
    pub cost: f64,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentNode {
    pub id: String,
    pub weight: f64,
    pub edges: Vec<Edge>,
}

impl AgentNode {
    pub fn new(id: impl Into<String>, weight: f64, edges: Vec<Edge>) -> Self {
        AgentNode {
            id: id.into(),
            weight,
            edges,
        }
    }

    /// Unit-weight agent from `(criterion, cost, color)` triples.
    pub fn unit(id: impl Into<String>, edges: &[(usize, f64, Color)]) -> Self {
        let edges = edges
            .iter()
            .map(|&(to, cost, color)| Edge { to, cost, color })
            .collect();
        AgentNode::new(id, 1.0, edges)
    }
}

/// A subset of an instance's criteria, stored as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CriteriaSet {
    members: Vec<bool>,
}

impl CriteriaSet {
    pub fn full(universe: usize) -> Self {
        CriteriaSet {
            members: vec![true; universe],
        }
    }

    pub fn empty(universe: usize) -> Self {
        CriteriaSet {
            members: vec![false; universe],
        }
    }

    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = CriteriaSet::empty(universe);
        for i in indices {
            set.insert(i);
        }
        set
    }

    /// Bit `i` of `mask` selects criterion `i`. Requires `universe <= 64`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        debug_assert!(universe <= 64);
        CriteriaSet {
            members: (0..universe).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn universe(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.get(i).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, i: usize) {
        self.members[i] = true;
    }

    pub fn remove(&mut self, i: usize) -> bool {
        std::mem::replace(&mut self.members[i], false)
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn is_subset(&self, other: &CriteriaSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInstance {
    criteria: Vec<String>,
    agents: Vec<AgentNode>,
    tie_policy: TiePolicy,
    tau: f64,
}

impl DiscreteInstance {
    /// Validates the graph and sorts every agent's edges by cost, breaking
    /// exact ties with the tie policy and then the criterion index.
    pub fn new(
        criteria: Vec<String>,
        mut agents: Vec<AgentNode>,
        tie_policy: TiePolicy,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &criteria {
            if !seen.insert(c.as_str()) {
                return Err(Error::invalid(format!("duplicate criterion `{c}`")));
            }
        }
        for agent in &mut agents {
            if !(agent.weight.is_finite() && agent.weight > 0.0) {
                return Err(Error::invalid(format!(
                    "agent `{}` has weight {}, expected a finite positive number",
                    agent.id, agent.weight
                )));
            }
            let mut targets = HashSet::new();
            for e in &agent.edges {
                if e.to >= criteria.len() {
                    return Err(Error::invalid(format!(
                        "agent `{}` has an edge to criterion index {} (only {} criteria)",
                        agent.id,
                        e.to,
                        criteria.len()
                    )));
                }
                if !(e.cost.is_finite() && e.cost >= 0.0) {
                    return Err(Error::invalid(format!(
                        "agent `{}` has edge cost {} to `{}`",
                        agent.id, e.cost, criteria[e.to]
                    )));
                }
                if !targets.insert(e.to) {
                    return Err(Error::invalid(format!(
                        "agent `{}` has two edges to `{}`",
                        agent.id, criteria[e.to]
                    )));
                }
            }
            agent.edges.sort_by(|x, y| {
                x.cost
                    .total_cmp(&y.cost)
                    .then(tie_policy.rank(x.color).cmp(&tie_policy.rank(y.color)))
                    .then(x.to.cmp(&y.to))
            });
        }
        Ok(DiscreteInstance {
            criteria,
            agents,
            tie_policy,
            tau: TAU,
        })
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    /// Same graph under a different tie policy (edges are re-sorted).
    pub fn with_tie_policy(&self, tie_policy: TiePolicy) -> Self {
        DiscreteInstance::new(self.criteria.clone(), self.agents.clone(), tie_policy)
            .expect("already validated")
            .with_tau(self.tau)
    }

    pub fn criteria(&self) -> &[String] {
        &self.criteria
    }

    pub fn agents(&self) -> &[AgentNode] {
        &self.agents
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.tie_policy
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn criterion_index(&self, id: &str) -> Result<usize> {
        self.criteria
            .iter()
            .position(|c| c == id)
            .ok_or_else(|| Error::UnknownCriterion(id.to_string()))
    }

    pub fn select(&self, ids: &[impl AsRef<str>]) -> Result<CriteriaSet> {
        let mut set = CriteriaSet::empty(self.criteria.len());
        for id in ids {
            set.insert(self.criterion_index(id.as_ref())?);
        }
        Ok(set)
    }

    pub fn ids_of(&self, set: &CriteriaSet) -> Vec<String> {
        set.iter().map(|i| self.criteria[i].clone()).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.agents.iter().map(|a| a.weight).sum()
    }

    /// The instance restricted to `keep`; edges to dropped criteria vanish
    /// and the remaining criteria are renumbered in order.
    pub fn restrict(&self, keep: &CriteriaSet) -> DiscreteInstance {
        let mut remap = vec![usize::MAX; self.criteria.len()];
        let mut criteria = Vec::new();
        for i in keep.iter() {
            remap[i] = criteria.len();
            criteria.push(self.criteria[i].clone());
        }
        let agents = self
            .agents
            .iter()
            .map(|a| AgentNode {
                id: a.id.clone(),
                weight: a.weight,
                edges: a
                    .edges
                    .iter()
                    .filter(|e| keep.contains(e.to))
                    .map(|e| Edge {
                        to: remap[e.to],
                        ..*e
                    })
                    .collect(),
            })
            .collect();
        DiscreteInstance {
            criteria,
            agents,
            tie_policy: self.tie_policy,
            tau: self.tau,
        }
    }
}

/// What one agent does when facing a criteria subset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentOutcome {
    pub chosen: Option<usize>,
    pub cost: f64,
    pub classified: bool,
    pub qualified_after: bool,
    pub color: Option<Color>,
}

impl AgentOutcome {
    pub const UNCLASSIFIED: AgentOutcome = AgentOutcome {
        chosen: None,
        cost: 0.0,
        classified: false,
        qualified_after: false,
        color: None,
    };
}

/// Aggregate true/false positives, both as weighted mass and as counts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp_mass: f64,
    pub fp_mass: f64,
    pub tp_count: usize,
    pub fp_count: usize,
}

impl EvalReport {
    pub fn add(&mut self, weight: f64, color: Option<Color>) {
        match color {
            Some(Color::Blue) => {
                self.tp_mass += weight;
                self.tp_count += 1;
            }
            Some(Color::Red) => {
                self.fp_mass += weight;
                self.fp_count += 1;
            }
            None => {}
        }
    }

    /// `tp_count - fp_count`.
    pub fn objective(&self) -> i64 {
        self.tp_count as i64 - self.fp_count as i64
    }
}

/// Index into `edges` of the edge the agent takes among those accepted by
/// `alive`, scanning from `start`. Edges whose cost is within `tau` of the
/// cheapest live edge are tied and ordered by `tie`, then criterion index.
pub(crate) fn cheapest_edge(
    edges: &[Edge],
    start: usize,
    alive: impl Fn(usize) -> bool,
    tie: TiePolicy,
    tau: f64,
) -> Option<usize> {
    let first = (start..edges.len()).find(|&k| alive(edges[k].to))?;
    let limit = edges[first].cost + tau;
    let mut best = first;
    for k in first + 1..edges.len() {
        let e = &edges[k];
        if e.cost > limit {
            break;
        }
        if !alive(e.to) {
            continue;
        }
        let key = (tie.rank(e.color), e.to);
        if key < (tie.rank(edges[best].color), edges[best].to) {
            best = k;
        }
    }
    Some(best)
}

/// The agent takes its cheapest edge into `selected`; with no such edge it is
/// classified negative and does not move.
pub fn best_response_targets(
    agent: &AgentNode,
    selected: &CriteriaSet,
    tie: TiePolicy,
    tau: f64,
) -> AgentOutcome {
    match cheapest_edge(&agent.edges, 0, |c| selected.contains(c), tie, tau) {
        Some(k) => {
            let e = agent.edges[k];
            AgentOutcome {
                chosen: Some(e.to),
                cost: e.cost,
                classified: true,
                qualified_after: e.color == Color::Blue,
                color: Some(e.color),
            }
        }
        None => AgentOutcome::UNCLASSIFIED,
    }
}

pub fn agent_outcomes(instance: &DiscreteInstance, selected: &CriteriaSet) -> Vec<AgentOutcome> {
    instance
        .agents
        .iter()
        .map(|a| best_response_targets(a, selected, instance.tie_policy, instance.tau))
        .collect()
}

/// Exact TP/FP mass of `selected` over every agent of the instance.
pub fn evaluate_criteria(instance: &DiscreteInstance, selected: &CriteriaSet) -> EvalReport {
    let mut report = EvalReport::default();
    for agent in &instance.agents {
        let out = best_response_targets(agent, selected, instance.tie_policy, instance.tau);
        report.add(agent.weight, out.color);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use Color::{Blue, Red};

    fn two_criteria(edges: &[(usize, f64, Color)], tie: TiePolicy) -> DiscreteInstance {
        DiscreteInstance::new(
            vec!["p1".into(), "p2".into()],
            vec![AgentNode::unit("x", edges)],
            tie,
        )
        .unwrap()
    }

    #[test]
    fn strict_cost_order_wins() {
        let inst = two_criteria(&[(0, 0.3, Red), (1, 0.4, Blue)], TiePolicy::Pessimistic);
        let agent = &inst.agents()[0];
        let out = best_response_targets(agent, &CriteriaSet::full(2), inst.tie_policy(), TAU);
        assert_eq!(out.chosen, Some(0));
        assert_eq!(out.color, Some(Red));

        let only_p2 = CriteriaSet::from_indices(2, [1]);
        let out = best_response_targets(agent, &only_p2, inst.tie_policy(), TAU);
        assert_eq!(out.chosen, Some(1));
        assert_eq!(out.color, Some(Blue));
    }

    #[test]
    fn tie_policy_decides_equal_costs() {
        let edges = [(0, 0.5, Red), (1, 0.5, Blue)];
        let pess = two_criteria(&edges, TiePolicy::Pessimistic);
        let out = best_response_targets(
            &pess.agents()[0],
            &CriteriaSet::full(2),
            pess.tie_policy(),
            TAU,
        );
        assert_eq!((out.chosen, out.color), (Some(0), Some(Red)));

        let opt = two_criteria(&edges, TiePolicy::Optimistic);
        let out = best_response_targets(
            &opt.agents()[0],
            &CriteriaSet::full(2),
            opt.tie_policy(),
            TAU,
        );
        assert_eq!((out.chosen, out.color), (Some(1), Some(Blue)));
    }

    #[test]
    fn near_ties_within_tau_use_policy() {
        let inst = two_criteria(
            &[(0, 0.5, Red), (1, 0.5 + 1e-12, Blue)],
            TiePolicy::Optimistic,
        );
        let out = best_response_targets(
            &inst.agents()[0],
            &CriteriaSet::full(2),
            inst.tie_policy(),
            TAU,
        );
        assert_eq!(out.color, Some(Blue));
    }

    #[test]
    fn empty_selection_leaves_agent_unclassified() {
        let inst = two_criteria(&[(0, 0.3, Red)], TiePolicy::Pessimistic);
        let out = best_response_targets(
            &inst.agents()[0],
            &CriteriaSet::empty(2),
            inst.tie_policy(),
            TAU,
        );
        assert_eq!(out, AgentOutcome::UNCLASSIFIED);
        let report = evaluate_criteria(&inst, &CriteriaSet::empty(2));
        assert_eq!(report, EvalReport::default());
    }

    #[test]
    fn rejects_malformed_graphs() {
        let dup = DiscreteInstance::new(
            vec!["p".into()],
            vec![AgentNode::unit("x", &[(0, 0.1, Red), (0, 0.2, Blue)])],
            TiePolicy::Pessimistic,
        );
        assert!(matches!(dup, Err(Error::InvalidInstance(_))));

        let dangling = DiscreteInstance::new(
            vec!["p".into()],
            vec![AgentNode::unit("x", &[(3, 0.1, Red)])],
            TiePolicy::Pessimistic,
        );
        assert!(dangling.is_err());

        let negative = DiscreteInstance::new(
            vec!["p".into()],
            vec![AgentNode::unit("x", &[(0, -0.1, Red)])],
            TiePolicy::Pessimistic,
        );
        assert!(negative.is_err());

        let zero_weight = DiscreteInstance::new(
            vec!["p".into()],
            vec![AgentNode::new("x", 0.0, vec![])],
            TiePolicy::Pessimistic,
        );
        assert!(zero_weight.is_err());
    }

    #[test]
    fn edges_are_sorted_on_construction() {
        let inst = two_criteria(&[(1, 0.4, Blue), (0, 0.3, Red)], TiePolicy::Pessimistic);
        let costs: Vec<f64> = inst.agents()[0].edges.iter().map(|e| e.cost).collect();
        assert_eq!(costs, vec![0.3, 0.4]);
    }

    #[test]
    fn restrict_renumbers_criteria() {
        let inst = two_criteria(&[(0, 0.3, Red), (1, 0.4, Blue)], TiePolicy::Pessimistic);
        let sub = inst.restrict(&CriteriaSet::from_indices(2, [1]));
        assert_eq!(sub.criteria(), &["p2".to_string()]);
        assert_eq!(
            sub.agents()[0].edges,
            vec![Edge {
                to: 0,
                cost: 0.4,
                color: Blue
            }]
        );
    }
}
