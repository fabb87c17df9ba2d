//! Brute-force references for small inputs. All of them are exponential or
//! grid-based and refuse inputs above their caps.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear::general2d::evaluate_targets;
use crate::linear::{count_tp_fp, solve_2d_linear};
use crate::model::discrete::{evaluate_criteria, CriteriaSet, DiscreteInstance};
use crate::model::linear::{LinearClassifier, LinearInstance};

/// Largest criteria count `oracle_subsets` enumerates by default.
pub const DEFAULT_MAX_P: usize = 20;
pub const MAX_TARGET_AGENTS: usize = 5;
pub const MAX_PUSH_GRID: usize = 8;

/// Allowed false positives, as a count of agents or as weighted mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum FpBudget {
    Count(usize),
    Mass(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum Witness {
    Subset(Vec<usize>),
    Classifier(LinearClassifier),
    Targets(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub best_value: f64,
    pub witness: Witness,
    pub enumerated: usize,
}

/// Maximum TP mass over all `2^|P|` criteria subsets whose FP stays within
/// `budget`. Equal values keep the subset with the smallest bitmask.
pub fn oracle_subsets(
    instance: &DiscreteInstance,
    budget: FpBudget,
    max_p: usize,
) -> Result<OracleResult> {
    let p = instance.criteria().len();
    if p > max_p.min(63) {
        return Err(Error::CapExceeded {
            what: "criteria count",
            limit: max_p.min(63),
            found: p,
        });
    }
    if let FpBudget::Mass(k) = budget {
        if !(k >= 0.0) {
            return Err(Error::param("k", "FP budget must be non-negative"));
        }
    }
    let total = 1u64 << p;
    let (value, mask) = (0..total)
        .into_par_iter()
        .filter_map(|mask| {
            let r = evaluate_criteria(instance, &CriteriaSet::from_mask(p, mask));
            let ok = match budget {
                FpBudget::Count(k) => r.fp_count <= k,
                FpBudget::Mass(k) => r.fp_mass <= k + 1e-12,
            };
            ok.then_some((r.tp_mass, mask))
        })
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |x, y| match x.0.total_cmp(&y.0) {
                std::cmp::Ordering::Greater => x,
                std::cmp::Ordering::Less => y,
                std::cmp::Ordering::Equal => {
                    if x.1 <= y.1 {
                        x
                    } else {
                        y
                    }
                }
            },
        );
    Ok(OracleResult {
        best_value: value,
        witness: Witness::Subset(CriteriaSet::from_mask(p, mask).iter().collect()),
        enumerated: total as usize,
    })
}

/// Best `tp_count - fp_count` over the classifiers `(cos θ, sin θ)·x >= b`
/// with θ on an `angle_step`-degree grid over `[0°, 90°]` and `b` on multiples
/// of `intercept_step` spanning every agent, plus `f*` and the planar
/// solver's candidates. Equal values keep the earliest classifier.
pub fn oracle_linear_grid(
    instance: &LinearInstance,
    angle_step: f64,
    intercept_step: f64,
) -> Result<OracleResult> {
    if instance.dims() != 2 {
        return Err(Error::Precondition("grid oracle needs 2 dimensions".into()));
    }
    if !(angle_step > 0.0) || !(intercept_step > 0.0) {
        return Err(Error::param("grid_step", "steps must be positive"));
    }
    let mut pool = vec![instance.fstar().clone()];
    match solve_2d_linear(instance) {
        Ok(r) => pool.extend(r.candidates.into_iter().map(|c| c.classifier)),
        Err(Error::Precondition(_)) => {}
        Err(e) => return Err(e),
    }
    let c = instance.cost_vector();
    let agents = instance.agents();
    let steps = (90.0 / angle_step + 1e-9).floor() as usize;
    for s in 0..=steps {
        if agents.is_empty() {
            break;
        }
        let theta = (s as f64 * angle_step).to_radians();
        let snap = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
        let a = vec![snap(theta.cos()), snap(theta.sin())];
        let scores = agents.iter().map(|ag| a[0] * ag.x[0] + a[1] * ag.x[1]);
        let lo = scores.clone().fold(f64::INFINITY, f64::min) - 1.0;
        let hi = scores.fold(f64::NEG_INFINITY, f64::max) + (a[0] / c[0]).max(a[1] / c[1]) + 1.0;
        let (k0, k1) = (
            (lo / intercept_step).floor() as i64,
            (hi / intercept_step).ceil() as i64,
        );
        for k in k0..=k1 {
            pool.push(
                LinearClassifier::new(a.clone(), k as f64 * intercept_step).expect("unit weights"),
            );
        }
    }
    let scored = pool
        .par_iter()
        .enumerate()
        .map(|(idx, g)| count_tp_fp(instance, g).map(|r| (r.objective(), idx)))
        .collect::<Result<Vec<_>>>()?;
    let (value, idx) =
        scored.into_iter().fold(
            (i64::MIN, 0),
            |best, cur| if cur.0 > best.0 { cur } else { best },
        );
    Ok(OracleResult {
        best_value: value as f64,
        witness: Witness::Classifier(pool[idx].clone()),
        enumerated: pool.len(),
    })
}

/// Maximum TP count over zero-FP target sets in which each agent either gets
/// no point or the point where its row meets `f*`, raised by some
/// `t ∈ push_grid` it can still afford. Agents prefer Blue on cost ties.
pub fn oracle_targets_2d(instance: &LinearInstance, push_grid: &[f64]) -> Result<OracleResult> {
    if instance.dims() != 2 || !instance.is_improvement(0) || instance.is_improvement(1) {
        return Err(Error::Precondition(
            "needs 2 dimensions with dimension 0 improving and dimension 1 gaming".into(),
        ));
    }
    let n = instance.agents().len();
    if n > MAX_TARGET_AGENTS {
        return Err(Error::CapExceeded {
            what: "agent count",
            limit: MAX_TARGET_AGENTS,
            found: n,
        });
    }
    if push_grid.len() > MAX_PUSH_GRID {
        return Err(Error::CapExceeded {
            what: "push grid size",
            limit: MAX_PUSH_GRID,
            found: push_grid.len(),
        });
    }
    let f = instance.fstar();
    if !(f.a()[0] > 0.0) {
        return Err(Error::Precondition(
            "f* must weight dimension 0 positively".into(),
        ));
    }
    let c = instance.cost_vector();
    let tau = instance.tau();
    let options: Vec<Vec<Vec<f64>>> = instance
        .agents()
        .iter()
        .map(|ag| {
            let x0 = (f.b() - f.a()[1] * ag.x[1]) / f.a()[0];
            let spent = c[0] * (x0 - ag.x[0]).max(0.0);
            push_grid
                .iter()
                .filter(|&&t| t >= 0.0 && spent + c[1] * t <= 1.0 + tau)
                .map(|&t| vec![x0, ag.x[1] + t])
                .collect()
        })
        .collect();

    let radix: Vec<usize> = options.iter().map(|o| o.len() + 1).collect();
    let total: usize = radix.iter().product();
    let combos = (0..total)
        .into_par_iter()
        .map(|mut code| {
            let mut targets = Vec::new();
            for (i, &r) in radix.iter().enumerate() {
                let pick = code % r;
                code /= r;
                if pick > 0 {
                    targets.push(options[i][pick - 1].clone());
                }
            }
            evaluate_targets(instance, &targets).map(|rep| {
                let v = if rep.fp_count == 0 {
                    rep.tp_count as i64
                } else {
                    -1
                };
                (v, targets)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (value, targets) =
        combos.into_iter().fold(
            (-1, Vec::new()),
            |best, cur| if cur.0 > best.0 { cur } else { best },
        );
    Ok(OracleResult {
        best_value: value as f64,
        witness: Witness::Targets(targets),
        enumerated: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::discrete::{AgentNode, Color, TiePolicy};
    use crate::model::linear::LinearAgent;

    fn worked() -> DiscreteInstance {
        DiscreteInstance::new(
            vec!["p1".into(), "p2".into()],
            vec![
                AgentNode::unit("x1", &[(0, 0.5, Color::Blue)]),
                AgentNode::unit("x2", &[(0, 0.3, Color::Red), (1, 0.4, Color::Blue)]),
            ],
            TiePolicy::Pessimistic,
        )
        .unwrap()
    }

    #[test]
    fn subsets_worked_example() {
        let r = oracle_subsets(&worked(), FpBudget::Count(0), DEFAULT_MAX_P).unwrap();
        assert_eq!(r.best_value, 1.0);
        assert_eq!(r.witness, Witness::Subset(vec![1]));
        assert_eq!(r.enumerated, 4);
        let relaxed = oracle_subsets(&worked(), FpBudget::Count(2), DEFAULT_MAX_P).unwrap();
        assert!(relaxed.best_value >= r.best_value);
    }

    #[test]
    fn subsets_cap() {
        let inst = DiscreteInstance::new(
            (0..25).map(|i| format!("p{i}")).collect(),
            vec![],
            TiePolicy::Pessimistic,
        )
        .unwrap();
        assert!(matches!(
            oracle_subsets(&inst, FpBudget::Count(0), DEFAULT_MAX_P),
            Err(Error::CapExceeded { found: 25, .. })
        ));
    }

    fn plane(a: Vec<f64>, b: f64, agents: Vec<Vec<f64>>) -> LinearInstance {
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
    fn linear_grid_examples() {
        let i = plane(vec![1.0, 2.0], 10.0, vec![vec![9.0, 0.0]]);
        assert_eq!(oracle_linear_grid(&i, 1.0, 0.05).unwrap().best_value, 1.0);
        let i = plane(vec![1.0, 2.0], 10.0, vec![]);
        assert_eq!(oracle_linear_grid(&i, 1.0, 0.05).unwrap().best_value, 0.0);
        let i = plane(
            vec![1.0, 1.0],
            10.0,
            vec![vec![9.0, 0.0], vec![9.5, 0.3], vec![0.0, 0.0]],
        );
        assert_eq!(oracle_linear_grid(&i, 1.0, 0.05).unwrap().best_value, 2.0);
    }

    #[test]
    fn targets_examples() {
        let grid: Vec<f64> = (0..8).map(|k| k as f64 * 0.05).collect();
        let i = plane(vec![1.0, 3.0], 10.0, vec![vec![0.0, 3.2], vec![1.4, 2.5]]);
        let r = oracle_targets_2d(&i, &grid).unwrap();
        assert_eq!(r.best_value, 1.0);
        assert!(r.enumerated <= 81);
        let i = plane(vec![1.0, 1.0], 1.0, vec![vec![1.0, 1.0], vec![2.0, 0.0]]);
        assert_eq!(oracle_targets_2d(&i, &grid).unwrap().best_value, 2.0);
        let i = plane(vec![1.0, 1.0], 10.0, vec![vec![0.0, 0.0], vec![1.0, 2.0]]);
        assert_eq!(oracle_targets_2d(&i, &grid).unwrap().best_value, 0.0);
    }
}
