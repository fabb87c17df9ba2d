//! The linear model: agents are points in R^d, a ground-truth halfspace `f*`
//! decides true qualification, and only some dimensions move `x_true`.
//!
//! Dimensions are 0-based throughout; a construction described with 1-based
//! coordinates maps coordinate `k` to index `k - 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::discrete::{AgentNode, Color, DiscreteInstance, Edge, TiePolicy};
use crate::TAU;

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `sum_j c_j * max(y_j - x_j, 0)`: increasing a coordinate costs `c_j` per
/// unit, decreasing is free.
pub fn cost(x: &[f64], y: &[f64], c: &[f64]) -> Result<f64> {
    check_dims(x.len(), y.len())?;
    check_dims(x.len(), c.len())?;
    Ok(cost_unchecked(x, y, c))
}

pub(crate) fn cost_unchecked(x: &[f64], y: &[f64], c: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(c)
        .map(|((xi, yi), ci)| ci * (yi - xi).max(0.0))
        .sum()
}

/// Takes the moved coordinate in improvement dimensions and the initial one
/// in gaming dimensions.
pub fn true_position(x_init: &[f64], x_perc: &[f64], improvement: &[bool]) -> Result<Vec<f64>> {
    check_dims(x_init.len(), x_perc.len())?;
    check_dims(x_init.len(), improvement.len())?;
    Ok(x_init
        .iter()
        .zip(x_perc)
        .zip(improvement)
        .map(|((&init, &perc), &imp)| if imp { perc } else { init })
        .collect())
}

pub(crate) fn dot(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(a, x)| a * x).sum()
}

/// Halfspace `a . x >= b` with non-negative, not-all-zero weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearClassifier {
    a: Vec<f64>,
    b: f64,
}

impl LinearClassifier {
    pub fn new(a: Vec<f64>, b: f64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::invalid("classifier has no weights"));
        }
        if a.iter().any(|w| !w.is_finite() || *w < 0.0) || !b.is_finite() {
            return Err(Error::invalid(format!(
                "classifier weights must be finite and non-negative (a = {a:?}, b = {b})"
            )));
        }
        if a.iter().all(|&w| w == 0.0) {
            return Err(Error::invalid("classifier weights are all zero"));
        }
        Ok(LinearClassifier { a, b })
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn dims(&self) -> usize {
        self.a.len()
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        dot(&self.a, x)
    }

    pub fn accepts(&self, x: &[f64], tau: f64) -> bool {
        self.score(x) >= self.b - tau
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearAgent {
    pub id: String,
    pub x: Vec<f64>,
    pub weight: f64,
}

impl LinearAgent {
    pub fn new(id: impl Into<String>, x: Vec<f64>) -> Self {
        LinearAgent {
            id: id.into(),
            x,
            weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearInstance {
    cost: Vec<f64>,
    improvement: Vec<bool>,
    fstar: LinearClassifier,
    agents: Vec<LinearAgent>,
    targets: Option<Vec<Vec<f64>>>,
    tau: f64,
}

impl LinearInstance {
    pub fn new(
        cost: Vec<f64>,
        improvement_dims: &[usize],
        fstar: LinearClassifier,
        agents: Vec<LinearAgent>,
        targets: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let d = cost.len();
        if d == 0 {
            return Err(Error::invalid("instance has zero dimensions"));
        }
        if cost.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::invalid(format!(
                "movement costs must be finite and positive, got {cost:?}"
            )));
        }
        let mut improvement = vec![false; d];
        for &j in improvement_dims {
            if j >= d {
                return Err(Error::invalid(format!(
                    "improvement dimension {j} out of range for {d} dimensions"
                )));
            }
            improvement[j] = true;
        }
        check_dims(d, fstar.dims())?;
        for agent in &agents {
            check_dims(d, agent.x.len())?;
            if agent.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "agent `{}` has a non-finite coordinate",
                    agent.id
                )));
            }
            if !(agent.weight.is_finite() && agent.weight > 0.0) {
                return Err(Error::invalid(format!(
                    "agent `{}` has weight {}",
                    agent.id, agent.weight
                )));
            }
        }
        if let Some(targets) = &targets {
            for t in targets {
                check_dims(d, t.len())?;
            }
        }
        Ok(LinearInstance {
            cost,
            improvement,
            fstar,
            agents,
            targets,
            tau: TAU,
        })
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_targets(mut self, targets: Vec<Vec<f64>>) -> Result<Self> {
        for t in &targets {
            check_dims(self.dims(), t.len())?;
        }
        self.targets = Some(targets);
        Ok(self)
    }

    pub fn with_agents(mut self, agents: Vec<LinearAgent>) -> Result<Self> {
        let inst = LinearInstance::new(
            std::mem::take(&mut self.cost),
            &self.improvement_dims(),
            self.fstar.clone(),
            agents,
            self.targets.take(),
        )?;
        Ok(inst.with_tau(self.tau))
    }

    pub fn dims(&self) -> usize {
        self.cost.len()
    }

    pub fn cost_vector(&self) -> &[f64] {
        &self.cost
    }

    pub fn improvement_mask(&self) -> &[bool] {
        &self.improvement
    }

    pub fn improvement_dims(&self) -> Vec<usize> {
        (0..self.dims()).filter(|&j| self.improvement[j]).collect()
    }

    pub fn is_improvement(&self, j: usize) -> bool {
        self.improvement[j]
    }

    pub fn fstar(&self) -> &LinearClassifier {
        &self.fstar
    }

    pub fn agents(&self) -> &[LinearAgent] {
        &self.agents
    }

    pub fn targets(&self) -> Option<&[Vec<f64>]> {
        self.targets.as_deref()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn cost_between(&self, x: &[f64], y: &[f64]) -> f64 {
        cost_unchecked(x, y, &self.cost)
    }

    pub fn true_position(&self, x_init: &[f64], x_perc: &[f64]) -> Vec<f64> {
        x_init
            .iter()
            .zip(x_perc)
            .zip(&self.improvement)
            .map(|((&init, &perc), &imp)| if imp { perc } else { init })
            .collect()
    }

    pub fn is_qualified(&self, x_true: &[f64]) -> bool {
        self.fstar.accepts(x_true, self.tau)
    }

    pub fn initially_qualified(&self, agent: usize) -> bool {
        self.is_qualified(&self.agents[agent].x)
    }

    pub fn movement_dimension(&self, g: &LinearClassifier) -> usize {
        movement_dimension_with(g.a(), &self.cost, &self.improvement, self.tau)
    }

    /// Label for target `k` (0-based) when compiled to a discrete instance.
    pub fn target_id(k: usize) -> String {
        format!("p{}", k + 1)
    }
}

/// Blue iff reaching `p` from `x_init` leaves the agent truly qualified.
pub fn target_color(x_init: &[f64], p: &[f64], instance: &LinearInstance) -> Result<Color> {
    check_dims(instance.dims(), x_init.len())?;
    check_dims(instance.dims(), p.len())?;
    let x_true = instance.true_position(x_init, p);
    Ok(if instance.is_qualified(&x_true) {
        Color::Blue
    } else {
        Color::Red
    })
}

/// `argmax_j a_j / c_j`; ratios within `tau` of the maximum tie, and ties go
/// to improvement dimensions first, then to the lowest index.
pub fn movement_dimension(a: &[f64], c: &[f64], improvement: &[bool]) -> Result<usize> {
    check_dims(a.len(), c.len())?;
    check_dims(a.len(), improvement.len())?;
    if a.iter().all(|&w| w == 0.0) {
        return Err(Error::invalid("classifier weights are all zero"));
    }
    Ok(movement_dimension_with(a, c, improvement, TAU))
}

pub(crate) fn movement_dimension_with(
    a: &[f64],
    c: &[f64],
    improvement: &[bool],
    tau: f64,
) -> usize {
    let ratios: Vec<f64> = a.iter().zip(c).map(|(a, c)| a / c).collect();
    let best = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied = |j: &usize| ratios[*j] >= best - tau;
    (0..a.len())
        .filter(tied)
        .find(|&j| improvement[j])
        .or_else(|| (0..a.len()).find(tied))
        .expect("at least one dimension attains the maximum")
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearResponse {
    pub x_perc: Vec<f64>,
    pub x_true: Vec<f64>,
    pub cost: f64,
    pub classified: bool,
    pub qualified_after: bool,
    /// Dimension moved along, if the agent moved at all.
    pub moved: Option<usize>,
}

impl LinearResponse {
    /// Blue for a true positive, Red for a false positive, None if negative.
    pub fn color(&self) -> Option<Color> {
        match (self.classified, self.qualified_after) {
            (false, _) => None,
            (true, true) => Some(Color::Blue),
            (true, false) => Some(Color::Red),
        }
    }
}

/// Best response against a halfspace. An agent already accepted stays put;
/// otherwise it moves to the boundary along the movement dimension when that
/// costs at most 1 (utility zero still counts), and stays negative if not.
pub fn best_response_linear(
    x_init: &[f64],
    g: &LinearClassifier,
    instance: &LinearInstance,
) -> Result<LinearResponse> {
    check_dims(instance.dims(), x_init.len())?;
    check_dims(instance.dims(), g.dims())?;
    Ok(respond(x_init, g, instance))
}

pub(crate) fn respond(
    x_init: &[f64],
    g: &LinearClassifier,
    instance: &LinearInstance,
) -> LinearResponse {
    let tau = instance.tau;
    let stay = |classified: bool| LinearResponse {
        x_perc: x_init.to_vec(),
        x_true: x_init.to_vec(),
        cost: 0.0,
        classified,
        qualified_after: instance.is_qualified(x_init),
        moved: None,
    };
    let gap = g.b() - g.score(x_init);
    if gap <= tau {
        return stay(true);
    }
    let j = instance.movement_dimension(g);
    let aj = g.a()[j];
    if aj <= 0.0 {
        return stay(false);
    }
    let delta = gap / aj;
    let cost = instance.cost[j] * delta;
    if cost > 1.0 + tau {
        return stay(false);
    }
    let mut x_perc = x_init.to_vec();
    x_perc[j] += delta;
    let x_true = instance.true_position(x_init, &x_perc);
    let qualified_after = instance.is_qualified(&x_true);
    LinearResponse {
        x_perc,
        x_true,
        cost,
        classified: true,
        qualified_after,
        moved: Some(j),
    }
}

/// One edge per affordable (agent, target) pair, colored by whether the
/// move leaves the agent truly qualified. Target `k` becomes criterion
/// `p{k+1}`; agent weights carry over.
pub fn compile_linear_to_discrete(
    instance: &LinearInstance,
    tie: TiePolicy,
) -> Result<DiscreteInstance> {
    let targets = instance.targets().ok_or(Error::MissingTargets)?;
    let criteria = (0..targets.len()).map(LinearInstance::target_id).collect();
    let agents = instance
        .agents
        .iter()
        .map(|agent| {
            let edges = targets
                .iter()
                .enumerate()
                .filter_map(|(k, p)| {
                    let c = instance.cost_between(&agent.x, p);
                    (c <= 1.0 + instance.tau).then(|| Edge {
                        to: k,
                        cost: c,
                        color: if instance.is_qualified(&instance.true_position(&agent.x, p)) {
                            Color::Blue
                        } else {
                            Color::Red
                        },
                    })
                })
                .collect();
            AgentNode::new(agent.id.clone(), agent.weight, edges)
        })
        .collect();
    Ok(DiscreteInstance::new(criteria, agents, tie)?.with_tau(instance.tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fstar_sum10() -> LinearClassifier {
        LinearClassifier::new(vec![1.0, 1.0], 10.0).unwrap()
    }

    fn inst(
        cost: Vec<f64>,
        imp: &[usize],
        fstar: LinearClassifier,
        agents: &[[f64; 2]],
    ) -> LinearInstance {
        let agents = agents
            .iter()
            .enumerate()
            .map(|(i, x)| LinearAgent::new(format!("x{}", i + 1), x.to_vec()))
            .collect();
        LinearInstance::new(cost, imp, fstar, agents, None).unwrap()
    }

    #[test]
    fn cost_examples() {
        assert_eq!(cost(&[0.0, 0.0], &[2.0, 3.0], &[1.0, 2.0]).unwrap(), 8.0);
        assert_eq!(cost(&[5.0, 5.0], &[5.0, 5.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cost(&[3.0, 9.0], &[7.0, 2.0], &[1.0, 1.0]).unwrap(), 4.0);
        assert_eq!(
            cost(&[0.0], &[1.0, 2.0], &[1.0]),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        );
    }

    #[test]
    fn true_position_examples() {
        let xi = [0.0, 0.0];
        let xp = [1.0, 1.0];
        assert_eq!(
            true_position(&xi, &xp, &[true, false]).unwrap(),
            vec![1.0, 0.0]
        );
        assert_eq!(true_position(&xi, &xp, &[true, true]).unwrap(), xp.to_vec());
        assert_eq!(
            true_position(&xi, &xp, &[false, false]).unwrap(),
            xi.to_vec()
        );
    }

    #[test]
    fn target_color_examples() {
        let i = inst(vec![1.0, 1.0], &[0], fstar_sum10(), &[]);
        assert_eq!(
            target_color(&[9.0, 0.0], &[10.0, 0.0], &i).unwrap(),
            Color::Blue
        );
        assert_eq!(
            target_color(&[9.0, 0.0], &[9.0, 1.0], &i).unwrap(),
            Color::Red
        );

        // Gaming example of the m = 8 lower-bound family.
        let lb = inst(
            vec![1.0, 1.0],
            &[0],
            LinearClassifier::new(vec![1.0, 1.0], 16.0).unwrap(),
            &[],
        );
        assert_eq!(
            target_color(&[6.0, 9.0], &[6.0, 10.0], &lb).unwrap(),
            Color::Red
        );
    }

    #[test]
    fn movement_dimension_examples() {
        assert_eq!(
            movement_dimension(&[2.0, 1.0], &[1.0, 1.0], &[false, false]).unwrap(),
            0
        );
        assert_eq!(
            movement_dimension(&[1.0, 1.0], &[1.0, 1.0], &[false, true]).unwrap(),
            1
        );
        assert_eq!(
            movement_dimension(&[1.0, 1.0], &[1.0, 1.0], &[true, true]).unwrap(),
            0
        );
        assert!(movement_dimension(&[0.0, 0.0], &[1.0, 1.0], &[true, true]).is_err());
    }

    #[test]
    fn best_response_moves_exactly_one_unit_of_budget() {
        let i = inst(vec![1.0, 1.0], &[0], fstar_sum10(), &[]);
        let r = best_response_linear(&[9.0, 0.0], &fstar_sum10(), &i).unwrap();
        assert!(r.classified && r.qualified_after);
        assert_eq!(r.x_perc, vec![10.0, 0.0]);
        assert_eq!(r.cost, 1.0);
    }

    #[test]
    fn best_response_rejects_unaffordable_boundary() {
        let i = inst(vec![1.0, 1.0], &[0], fstar_sum10(), &[]);
        let g = LinearClassifier::new(vec![1.0, 2.0], 12.0).unwrap();
        let r = best_response_linear(&[9.0, 0.0], &g, &i).unwrap();
        assert!(!r.classified);
        assert_eq!(r.x_perc, vec![9.0, 0.0]);
    }

    #[test]
    fn best_response_agent_above_stays() {
        let i = inst(vec![1.0, 1.0], &[0], fstar_sum10(), &[]);
        let r = best_response_linear(&[11.0, 3.0], &fstar_sum10(), &i).unwrap();
        assert!(r.classified);
        assert_eq!(r.cost, 0.0);
        assert_eq!(r.moved, None);
    }

    #[test]
    fn best_response_matches_grid_search() {
        // Cheapest accepted point on a 0.01 grid of moves with cost <= 1.
        let i = inst(vec![1.0, 1.0], &[0], fstar_sum10(), &[]);
        let g = LinearClassifier::new(vec![1.0, 2.0], 12.0).unwrap();
        let x = [9.0, 0.0];
        let mut reachable = false;
        for s in 0..=100 {
            for t in 0..=(100 - s) {
                let y = [x[0] + s as f64 * 0.01, x[1] + t as f64 * 0.01];
                if g.accepts(&y, 0.0) {
                    reachable = true;
                }
            }
        }
        assert!(!reachable);
        assert!(!best_response_linear(&x, &g, &i).unwrap().classified);
    }

    #[test]
    fn compile_skips_unaffordable_targets() {
        let i = inst(vec![1.0, 1.0], &[0], fstar_sum10(), &[[0.0, 0.0]])
            .with_targets(vec![vec![5.0, 5.0]])
            .unwrap();
        let d = compile_linear_to_discrete(&i, TiePolicy::Optimistic).unwrap();
        assert!(d.agents()[0].edges.is_empty());

        let no_targets = inst(vec![1.0, 1.0], &[0], fstar_sum10(), &[]);
        assert_eq!(
            compile_linear_to_discrete(&no_targets, TiePolicy::Optimistic),
            Err(Error::MissingTargets)
        );
    }

    #[test]
    fn classifier_rejects_negative_or_zero_weights() {
        assert!(LinearClassifier::new(vec![0.0, 0.0], 1.0).is_err());
        assert!(LinearClassifier::new(vec![1.0, -1.0], 1.0).is_err());
    }
}
