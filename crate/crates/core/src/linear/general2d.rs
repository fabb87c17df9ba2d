use crate::error::{Error, Result};
use crate::model::discrete::{evaluate_criteria, CriteriaSet, EvalReport, TiePolicy};
use crate::model::linear::{compile_linear_to_discrete, LinearInstance};

/// How far past the unit budget a point is pushed to put it out of reach of
/// an agent with no point of its own. Must exceed the affordability
/// tolerance.
pub const DEFAULT_EPS_PUSH: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct General2dResult {
    /// Selected target points in the original coordinates.
    pub targets: Vec<Vec<f64>>,
    /// Agent index each target was designed for, parallel to `targets`.
    pub owners: Vec<usize>,
    /// Per agent, its designated point if one was kept.
    pub designated: Vec<Option<Vec<f64>>>,
    /// Outcome when agents break cost ties toward Blue.
    pub report: EvalReport,
}

pub fn solve_2d_general(instance: &LinearInstance) -> Result<General2dResult> {
    solve_2d_general_with(instance, DEFAULT_EPS_PUSH)
}

/// Target points maximizing true positives with no false positives in the
/// plane, assuming agents prefer Blue among equally cheap targets.
///
/// Works in rescaled coordinates `y = c∘x` where every unit of movement costs
/// 1. Agents are handled from the lowest gaming coordinate upward. Each one
/// gets the point where its own row meets `f*`, pushed up the gaming axis
/// until no lower agent, which would arrive there unqualified, prefers it to
/// that agent's own point. Points pushed beyond the agent's budget are
/// dropped.
pub fn solve_2d_general_with(instance: &LinearInstance, eps_push: f64) -> Result<General2dResult> {
    if instance.dims() != 2 || !instance.is_improvement(0) || instance.is_improvement(1) {
        return Err(Error::Precondition(
            "needs 2 dimensions with dimension 0 improving and dimension 1 gaming".into(),
        ));
    }
    let f = instance.fstar();
    if !(f.a()[0] > 0.0 && f.a()[1] > 0.0) {
        return Err(Error::Precondition(
            "f* must weight both dimensions positively".into(),
        ));
    }
    if !(eps_push > instance.tau()) {
        return Err(Error::param(
            "eps_push",
            "must exceed the instance tolerance",
        ));
    }
    let tau = instance.tau();
    let c = instance.cost_vector();
    let a = [f.a()[0] / c[0], f.a()[1] / c[1]];
    let b = f.b();
    let agents = instance.agents();
    let ys: Vec<[f64; 2]> = agents
        .iter()
        .map(|ag| [ag.x[0] * c[0], ag.x[1] * c[1]])
        .collect();
    let cost =
        |from: &[f64; 2], to: &[f64; 2]| (to[0] - from[0]).max(0.0) + (to[1] - from[1]).max(0.0);

    let mut order: Vec<usize> = (0..agents.len()).collect();
    order.sort_by(|&p, &q| {
        ys[q][1]
            .total_cmp(&ys[p][1])
            .then(ys[p][0].total_cmp(&ys[q][0]))
            .then_with(|| agents[p].id.cmp(&agents[q].id))
    });

    let mut designated: Vec<Option<[f64; 2]>> = vec![None; agents.len()];
    let mut done: Vec<usize> = Vec::new();
    for &i in order.iter().rev() {
        let y = ys[i];
        let xmin = [(b - a[1] * y[1]) / a[0], y[1]];
        let gap = xmin[0] - y[0];
        if gap > 1.0 + tau {
            done.push(i);
            continue;
        }
        let xmax1 = y[1] + 1.0 - gap.max(0.0);
        let mut p = xmin;
        for &j in &done {
            let yj = ys[j];
            // Only an agent that would land there unqualified needs guarding.
            if a[0] * p[0] + a[1] * yj[1] >= b - tau {
                continue;
            }
            debug_assert!(yj[1] < y[1] + tau);
            let reach = cost(&yj, &p);
            match designated[j] {
                Some(dj) => {
                    let own = cost(&yj, &dj);
                    if own > reach + tau {
                        p[1] += own - reach;
                    }
                }
                None => {
                    if reach <= 1.0 + tau {
                        p[1] += 1.0 + eps_push - reach;
                    }
                }
            }
        }
        if p[1] <= xmax1 + tau {
            designated[i] = Some(p);
        }
        done.push(i);
    }

    let back = |p: [f64; 2]| vec![p[0] / c[0], p[1] / c[1]];
    let designated: Vec<Option<Vec<f64>>> = designated.into_iter().map(|p| p.map(back)).collect();
    let (owners, targets): (Vec<usize>, Vec<Vec<f64>>) = designated
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.clone().map(|p| (i, p)))
        .unzip();
    let report = evaluate_targets(instance, &targets)?;
    Ok(General2dResult {
        targets,
        owners,
        designated,
        report,
    })
}

/// TP/FP of a target set under the Blue-first tie policy.
pub(crate) fn evaluate_targets(
    instance: &LinearInstance,
    targets: &[Vec<f64>],
) -> Result<EvalReport> {
    let with = instance.clone().with_targets(targets.to_vec())?;
    let discrete = compile_linear_to_discrete(&with, TiePolicy::Optimistic)?;
    Ok(evaluate_criteria(
        &discrete,
        &CriteriaSet::full(targets.len()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::linear::{LinearAgent, LinearClassifier};

    fn inst(c: Vec<f64>, a: Vec<f64>, b: f64, agents: Vec<Vec<f64>>) -> LinearInstance {
        LinearInstance::new(
            c,
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
    fn worked_push_example() {
        let i = inst(
            vec![1.0, 1.0],
            vec![1.0, 3.0],
            10.0,
            vec![vec![0.0, 3.2], vec![1.4, 2.5]],
        );
        let r = solve_2d_general(&i).unwrap();
        assert_eq!(r.designated[1], None);
        let p = r.designated[0].as_ref().unwrap();
        assert!((p[0] - 0.4).abs() < 1e-12);
        assert!((p[1] - (3.5 + DEFAULT_EPS_PUSH)).abs() < 1e-12);
        assert_eq!((r.report.tp_count, r.report.fp_count), (1, 0));
    }

    #[test]
    fn qualified_agents_keep_their_own_points() {
        let i = inst(
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            4.0,
            vec![vec![3.0, 3.0], vec![5.0, 0.0], vec![0.0, 6.0]],
        );
        let r = solve_2d_general(&i).unwrap();
        assert_eq!(r.targets.len(), 3);
        for (k, &owner) in r.owners.iter().enumerate() {
            let x = &i.agents()[owner].x;
            assert_eq!(r.targets[k][1], x[1]);
            assert!(i.fstar().score(&r.targets[k]) - 4.0 < 1e-12);
        }
        assert_eq!((r.report.tp_count, r.report.fp_count), (3, 0));
    }

    #[test]
    fn boundary_budget_is_affordable() {
        let i = inst(vec![2.0, 1.0], vec![1.0, 1.0], 10.0, vec![vec![7.5, 2.0]]);
        let r = solve_2d_general(&i).unwrap();
        assert_eq!(r.targets, vec![vec![8.0, 2.0]]);
        assert_eq!(r.report.tp_count, 1);
    }

    #[test]
    fn preconditions() {
        let i = inst(vec![1.0, 1.0], vec![0.0, 1.0], 1.0, vec![]);
        assert!(solve_2d_general(&i).is_err());
        let i = inst(vec![1.0, 1.0], vec![1.0, 1.0], 1.0, vec![]);
        assert!(solve_2d_general_with(&i, 0.0).is_err());
    }
}
