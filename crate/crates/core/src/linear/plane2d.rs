use serde::Serialize;

use super::{count_tp_fp, shifted_classifier};
use crate::error::{Error, Result};
use crate::model::discrete::EvalReport;
use crate::model::linear::{dot, LinearClassifier, LinearInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "agent")]
pub enum CandidateKind {
    /// `f*` itself, when it already makes agents improve.
    Fstar,
    /// `f*` shifted by one unit of budget along its movement dimension.
    Gaming,
    /// Slope-`c` line one unit of budget above the given agent.
    Agent(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub kind: CandidateKind,
    pub classifier: LinearClassifier,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linear2dResult {
    pub best: Candidate,
    /// Every candidate examined, in enumeration order.
    pub candidates: Vec<Candidate>,
}

impl Linear2dResult {
    pub fn classifier(&self) -> &LinearClassifier {
        &self.best.classifier
    }

    pub fn objective(&self) -> i64 {
        self.best.report.objective()
    }
}

/// The linear classifier maximizing `tp_count - fp_count` in the plane.
///
/// If `f*` already moves agents along an improvement dimension it is
/// returned; with two gaming dimensions the shifted `f*` is. Otherwise
/// dimension 0 must improve and dimension 1 game, and the best of the shifted
/// `f*` and the lines `c·x >= c·x_i + 1` wins. Equal objectives prefer more
/// true positives, then the shifted `f*`, then the lower intercept.
pub fn solve_2d_linear(instance: &LinearInstance) -> Result<Linear2dResult> {
    if instance.dims() != 2 {
        return Err(Error::Precondition(format!(
            "planar solver needs 2 dimensions, got {}",
            instance.dims()
        )));
    }
    let fstar = instance.fstar();
    let evaluate = |kind, g: LinearClassifier| -> Result<Candidate> {
        let report = count_tp_fp(instance, &g)?;
        Ok(Candidate {
            kind,
            classifier: g,
            report,
        })
    };
    let single = |cand: Candidate| Linear2dResult {
        best: cand.clone(),
        candidates: vec![cand],
    };

    if instance.is_improvement(instance.movement_dimension(fstar)) {
        return Ok(single(evaluate(CandidateKind::Fstar, fstar.clone())?));
    }
    if instance.improvement_dims().is_empty() {
        return Ok(single(evaluate(
            CandidateKind::Gaming,
            shifted_classifier(instance),
        )?));
    }
    if !instance.is_improvement(0) || instance.is_improvement(1) {
        return Err(Error::Precondition(
            "planar solver needs dimension 0 improving and dimension 1 gaming".into(),
        ));
    }

    let c = instance.cost_vector();
    let mut candidates = vec![evaluate(
        CandidateKind::Gaming,
        shifted_classifier(instance),
    )?];
    for (i, agent) in instance.agents().iter().enumerate() {
        let g =
            LinearClassifier::new(c.to_vec(), dot(c, &agent.x) + 1.0).expect("costs are positive");
        candidates.push(evaluate(CandidateKind::Agent(i), g)?);
    }

    let key = |cand: &Candidate| {
        (
            cand.report.objective(),
            cand.report.tp_count,
            cand.kind == CandidateKind::Gaming,
        )
    };
    let mut best = 0;
    for k in 1..candidates.len() {
        let (ck, bk) = (key(&candidates[k]), key(&candidates[best]));
        if ck > bk || (ck == bk && candidates[k].classifier.b() < candidates[best].classifier.b()) {
            best = k;
        }
    }
    Ok(Linear2dResult {
        best: candidates[best].clone(),
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::linear::LinearAgent;

    fn inst(a: Vec<f64>, b: f64, agents: Vec<Vec<f64>>) -> LinearInstance {
        LinearInstance::new(
            vec![1.0, 1.0],
            &[0],
            LinearClassifier::new(a, b).unwrap(),
            agents
                .into_iter()
                .enumerate()
                .map(|(i, x)| LinearAgent::new(format!("x{}", i + 1), x))
                .collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn improvement_encouraging_fstar_is_returned() {
        let i = inst(vec![1.0, 1.0], 10.0, vec![vec![9.0, 0.0]]);
        let r = solve_2d_linear(&i).unwrap();
        assert_eq!(r.best.kind, CandidateKind::Fstar);
        assert_eq!(r.classifier(), i.fstar());
    }

    #[test]
    fn agent_candidate_beats_gaming_candidate() {
        let i = inst(vec![1.0, 2.0], 10.0, vec![vec![9.0, 0.0]]);
        let r = solve_2d_linear(&i).unwrap();
        assert_eq!(r.candidates[0].report.objective(), 0);
        assert_eq!(r.best.kind, CandidateKind::Agent(0));
        assert_eq!(
            (r.classifier().a(), r.classifier().b()),
            (&[1.0, 1.0][..], 10.0)
        );
        assert_eq!(r.objective(), 1);
    }

    #[test]
    fn no_agents_gives_gaming_candidate() {
        let i = inst(vec![1.0, 2.0], 10.0, vec![]);
        let r = solve_2d_linear(&i).unwrap();
        assert_eq!(r.best.kind, CandidateKind::Gaming);
        assert_eq!(r.objective(), 0);
        assert_eq!(r.classifier().b(), 12.0);
    }

    #[test]
    fn wrong_dimension_count_is_rejected() {
        let i = LinearInstance::new(
            vec![1.0; 3],
            &[0],
            LinearClassifier::new(vec![1.0, 2.0, 3.0], 1.0).unwrap(),
            vec![],
            None,
        )
        .unwrap();
        assert!(matches!(solve_2d_linear(&i), Err(Error::Precondition(_))));
    }
}
