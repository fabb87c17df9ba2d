use minilp::{ComparisonOp, OptimizationDirection, Problem};

use super::{ProjectionPoints, ThreeSets};
use crate::error::{Error, Result};
use crate::model::linear::{respond, LinearClassifier, LinearInstance};

/// Margin that turns the strict "stays negative" constraint into `<=`.
pub const DEFAULT_EPS_STRICT: f64 = 1e-6;

/// A classifier with movement dimension `j` that makes every `s_yes` agent
/// positive, every `s_no` agent negative, and every `s_imp` agent positive
/// and truly qualified.
///
/// With the weight on `j` fixed to 1 the conditions are linear in the other
/// weights and the intercept. A slack `t` in `[0, 1]` is maximized so the
/// returned point sits inside the feasible region, and the result is checked
/// by simulating every agent.
pub fn find_dimj_classifier(
    instance: &LinearInstance,
    three: &ThreeSets,
    j: usize,
) -> Result<LinearClassifier> {
    find_dimj_classifier_with(instance, three, j, DEFAULT_EPS_STRICT)
}

pub fn find_dimj_classifier_with(
    instance: &LinearInstance,
    three: &ThreeSets,
    j: usize,
    eps_strict: f64,
) -> Result<LinearClassifier> {
    three.validate(instance.agents().len())?;
    let d = instance.dims();
    if j >= d {
        return Err(Error::param(
            "j",
            format!("dimension {j} out of range for {d}"),
        ));
    }
    if !three.s_imp.is_empty() && !instance.is_improvement(j) {
        return Err(Error::Precondition(format!(
            "dimension {j} is a gaming dimension but S^imp is non-empty"
        )));
    }
    if !(eps_strict > 0.0) {
        return Err(Error::param("eps_strict", "must be positive"));
    }
    // Moving along j cannot help anyone when f* ignores j.
    if instance.fstar().a()[j] == 0.0
        && three
            .s_imp
            .iter()
            .any(|&i| !instance.initially_qualified(i))
    {
        return Err(Error::Infeasible);
    }

    let g = solve_lp(instance, three, j, eps_strict, &[])?;
    match verify(instance, three, j, &g) {
        Ok(()) => return Ok(g),
        Err(Mismatch::Properties(reason)) => {
            return Err(Error::VerificationFailed { dim: j, reason })
        }
        Err(Mismatch::Dimension(_)) => {}
    }
    let imp = instance.improvement_mask();
    let winners: Vec<usize> = (0..d)
        .filter(|&k| k != j && ((imp[k] && !imp[j]) || (imp[k] == imp[j] && k < j)))
        .collect();
    let g = solve_lp(instance, three, j, eps_strict, &winners)?;
    verify(instance, three, j, &g).map_err(|m| Error::VerificationFailed {
        dim: j,
        reason: match m {
            Mismatch::Properties(r) => r,
            Mismatch::Dimension(k) => format!("agents move along dimension {k}"),
        },
    })?;
    Ok(g)
}

/// Tries every admissible dimension in order and returns the first verified
/// classifier. Only improvement dimensions are admissible when `s_imp` is
/// non-empty.
pub fn find_linear_classifier(
    instance: &LinearInstance,
    three: &ThreeSets,
) -> Result<LinearClassifier> {
    three.validate(instance.agents().len())?;
    let mut failure = None;
    for j in 0..instance.dims() {
        if !three.s_imp.is_empty() && !instance.is_improvement(j) {
            continue;
        }
        match find_dimj_classifier(instance, three, j) {
            Ok(g) => return Ok(g),
            Err(Error::Infeasible) => {}
            Err(e @ Error::VerificationFailed { .. }) => {
                failure.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(failure.unwrap_or(Error::Infeasible))
}

/// `strict` lists dimensions whose ratio must stay `eps_strict` below that
/// of `j`, so they cannot win the movement tie-break.
fn solve_lp(
    instance: &LinearInstance,
    three: &ThreeSets,
    j: usize,
    eps_strict: f64,
    strict: &[usize],
) -> Result<LinearClassifier> {
    let d = instance.dims();
    let c = instance.cost_vector();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let a: Vec<Option<minilp::Variable>> = (0..d)
        .map(|k| {
            (k != j).then(|| {
                let mut ub = c[k] / c[j];
                if strict.contains(&k) {
                    ub = (c[k] * (1.0 / c[j] - eps_strict)).max(0.0);
                }
                lp.add_var(0.0, (0.0, ub))
            })
        })
        .collect();
    let b = lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY));
    let t = lp.add_var(1.0, (0.0, 1.0));

    // Terms of `sum_{k != j} a_k x[k] - b + s * t`.
    let row = |x: &[f64], s: f64| {
        let mut r: Vec<(minilp::Variable, f64)> =
            (0..d).filter_map(|k| a[k].map(|v| (v, x[k]))).collect();
        r.push((b, -1.0));
        r.push((t, s));
        r
    };

    for &i in &three.s_yes {
        let x = &instance.agents()[i].x;
        let pts = ProjectionPoints::new(instance, x, j, None)?;
        lp.add_constraint(row(x, -1.0).as_slice(), ComparisonOp::Ge, -pts.x_max[j]);
    }
    for &i in &three.s_no {
        let x = &instance.agents()[i].x;
        let pts = ProjectionPoints::new(instance, x, j, None)?;
        lp.add_constraint(
            row(x, 1.0).as_slice(),
            ComparisonOp::Le,
            -eps_strict - pts.x_max[j],
        );
    }
    for &i in &three.s_imp {
        let x = &instance.agents()[i].x;
        let pts = ProjectionPoints::new(instance, x, j, None)?;
        // An agent already above f* stays qualified whatever it does along j.
        if !instance.initially_qualified(i) {
            let onto = pts
                .x_fstar
                .as_ref()
                .expect("a*_j > 0 checked by the caller");
            lp.add_constraint(row(x, 1.0).as_slice(), ComparisonOp::Le, -onto[j]);
        }
        lp.add_constraint(row(x, -1.0).as_slice(), ComparisonOp::Ge, -pts.x_max[j]);
    }

    let sol = match lp.solve() {
        Ok(sol) => sol,
        Err(minilp::Error::Infeasible) => return Err(Error::Infeasible),
        Err(minilp::Error::Unbounded) => unreachable!("objective is bounded by t <= 1"),
    };
    let weights = (0..d)
        .map(|k| a[k].map_or(1.0, |v| sol[v].max(0.0)))
        .collect();
    Ok(LinearClassifier::new(weights, sol[b]).expect("weight on j is 1"))
}

enum Mismatch {
    Dimension(usize),
    Properties(String),
}

fn verify(
    instance: &LinearInstance,
    three: &ThreeSets,
    j: usize,
    g: &LinearClassifier,
) -> Result<(), Mismatch> {
    let moved = instance.movement_dimension(g);
    if moved != j {
        return Err(Mismatch::Dimension(moved));
    }
    let agents = instance.agents();
    let check = |set: &[usize], want: &dyn Fn(&crate::LinearResponse) -> bool, what: &str| {
        for &i in set {
            if !want(&respond(&agents[i].x, g, instance)) {
                return Err(Mismatch::Properties(format!(
                    "agent `{}` is not {what}",
                    agents[i].id
                )));
            }
        }
        Ok(())
    };
    check(&three.s_yes, &|r| r.classified, "classified positive")?;
    check(&three.s_no, &|r| !r.classified, "classified negative")?;
    check(
        &three.s_imp,
        &|r| r.classified && r.qualified_after,
        "improving",
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::linear::LinearAgent;

    fn inst(improvement: &[usize], a: Vec<f64>, b: f64, agents: Vec<Vec<f64>>) -> LinearInstance {
        LinearInstance::new(
            vec![1.0; a.len()],
            improvement,
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
    fn qualified_yes_agent_is_feasible() {
        let i = inst(&[0], vec![1.0, 1.0], 10.0, vec![vec![8.0, 5.0]]);
        let three = ThreeSets::new(vec![0], vec![], vec![]);
        let g = find_linear_classifier(&i, &three).unwrap();
        assert!(respond(&i.agents()[0].x, &g, &i).classified);
    }

    #[test]
    fn improve_one_exclude_other() {
        let i = inst(
            &[0],
            vec![1.0, 1.0],
            10.0,
            vec![vec![9.0, 0.0], vec![9.0, -2.0]],
        );
        let three = ThreeSets::new(vec![], vec![1], vec![0]);
        let g = find_dimj_classifier(&i, &three, 0).unwrap();
        let r0 = respond(&[9.0, 0.0], &g, &i);
        assert!(r0.classified && r0.qualified_after);
        assert!(!respond(&[9.0, -2.0], &g, &i).classified);
        // The hand-derived point satisfies the same checks.
        let hand = LinearClassifier::new(vec![1.0, 1.0], 10.0).unwrap();
        assert!(verify(&i, &three, 0, &hand).is_ok());
        assert_eq!(find_linear_classifier(&i, &three).unwrap(), g);
    }

    #[test]
    fn no_improvement_dimension_is_infeasible() {
        let i = inst(&[], vec![1.0, 1.0], 10.0, vec![vec![9.0, 0.0]]);
        let three = ThreeSets::new(vec![], vec![], vec![0]);
        assert_eq!(find_linear_classifier(&i, &three), Err(Error::Infeasible));
        assert!(matches!(
            find_dimj_classifier(&i, &three, 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn conflicting_sets_are_infeasible() {
        let i = inst(
            &[0],
            vec![1.0, 1.0],
            10.0,
            vec![vec![9.0, 0.0], vec![9.0, 0.0]],
        );
        let three = ThreeSets::new(vec![0], vec![1], vec![]);
        assert_eq!(find_linear_classifier(&i, &three), Err(Error::Infeasible));
    }

    #[test]
    fn fstar_blind_to_dimension_needs_qualified_imp() {
        let i = inst(&[0], vec![0.0, 1.0], 1.0, vec![vec![0.0, 0.0]]);
        let three = ThreeSets::new(vec![], vec![], vec![0]);
        assert_eq!(find_linear_classifier(&i, &three), Err(Error::Infeasible));
    }

    #[test]
    fn tie_break_resolved_by_resolve() {
        // Dimension 1 is asked for but dimension 0 wins equal ratios.
        let i = inst(&[0, 1], vec![1.0, 1.0], 10.0, vec![vec![5.0, 9.5]]);
        let three = ThreeSets::new(vec![], vec![], vec![0]);
        let g = find_dimj_classifier(&i, &three, 1).unwrap();
        assert_eq!(i.movement_dimension(&g), 1);
    }
}
