//! Linear-classifier tools: the improvement margin, shifted classifiers, the
//! three-set LP search, and the two planar algorithms.

pub(crate) mod general2d;
mod lp;
mod plane2d;

pub use general2d::{solve_2d_general, solve_2d_general_with, General2dResult, DEFAULT_EPS_PUSH};
pub use lp::{
    find_dimj_classifier, find_dimj_classifier_with, find_linear_classifier, DEFAULT_EPS_STRICT,
};
pub use plane2d::{solve_2d_linear, Candidate, CandidateKind, Linear2dResult};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::discrete::{Color, EvalReport};
use crate::model::linear::{respond, LinearClassifier, LinearInstance};

/// Distance to a qualifying region when the near boundary is touched.
const REGION_SLACK: f64 = 1e-6;

/// Unqualified agents that can reach `f*` by paying at most 1 along a single
/// improvement dimension. Returned as agent indices.
pub fn improvement_margin(instance: &LinearInstance) -> Vec<usize> {
    let f = instance.fstar();
    let c = instance.cost_vector();
    let tau = instance.tau();
    (0..instance.agents().len())
        .filter(|&i| {
            let gap = f.b() - f.score(&instance.agents()[i].x);
            gap > tau
                && instance.improvement_dims().into_iter().any(|j| {
                    let aj = f.a()[j];
                    aj > 0.0 && c[j] * gap / aj <= 1.0 + tau
                })
        })
        .collect()
}

/// `f*` moved out by what an agent can buy along its movement dimension:
/// `a*·x >= b* + a*_j / c_j`.
pub fn shifted_classifier(instance: &LinearInstance) -> LinearClassifier {
    let f = instance.fstar();
    let j = instance.movement_dimension(f);
    LinearClassifier::new(f.a().to_vec(), f.b() + f.a()[j] / instance.cost_vector()[j])
        .expect("shifting the intercept keeps the weights valid")
}

/// The points an agent reaches along dimension `j`: onto `f*`, onto `f`, and
/// as far as a unit budget allows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionPoints {
    /// `None` when `a*_j = 0`.
    pub x_fstar: Option<Vec<f64>>,
    /// `None` when `a_j = 0` or no `f` was given.
    pub x_f: Option<Vec<f64>>,
    pub x_max: Vec<f64>,
}

impl ProjectionPoints {
    pub fn new(
        instance: &LinearInstance,
        x_init: &[f64],
        j: usize,
        f: Option<&LinearClassifier>,
    ) -> Result<Self> {
        let d = instance.dims();
        if x_init.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: x_init.len(),
            });
        }
        if j >= d {
            return Err(Error::param(
                "j",
                format!("dimension {j} out of range for {d}"),
            ));
        }
        let project = |g: &LinearClassifier| {
            let aj = g.a()[j];
            (aj != 0.0).then(|| {
                let mut p = x_init.to_vec();
                p[j] = x_init[j] + (g.b() - g.score(x_init)) / aj;
                p
            })
        };
        let mut x_max = x_init.to_vec();
        x_max[j] += 1.0 / instance.cost_vector()[j];
        Ok(ProjectionPoints {
            x_fstar: project(instance.fstar()),
            x_f: f.and_then(project),
            x_max,
        })
    }
}

/// Agents that must end classified positive (`s_yes`), negative (`s_no`),
/// or positive and truly qualified (`s_imp`). Entries are agent indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ThreeSets {
    pub s_yes: Vec<usize>,
    pub s_no: Vec<usize>,
    pub s_imp: Vec<usize>,
}

impl ThreeSets {
    pub fn new(s_yes: Vec<usize>, s_no: Vec<usize>, s_imp: Vec<usize>) -> Self {
        ThreeSets { s_yes, s_no, s_imp }
    }

    pub fn validate(&self, agents: usize) -> Result<()> {
        let mut seen = vec![false; agents];
        for &i in self.s_yes.iter().chain(&self.s_no).chain(&self.s_imp) {
            if i >= agents {
                return Err(Error::param(
                    "three_sets",
                    format!("agent index {i} out of range"),
                ));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::param(
                    "three_sets",
                    format!("agent {i} appears in two sets"),
                ));
            }
        }
        Ok(())
    }
}

/// TP/FP of `g` by simulating every agent's best response.
///
/// In the plane with dimension 0 improving, dimension 1 gaming, `f*` pushing
/// agents to game and `g` pushing them to improve, the count is cross-checked
/// against the geometric description: an agent is positive iff
/// `a·x + a_0/c_0 >= b`, and then a true positive iff it starts above `f*` or
/// at least as high as the crossing point of `g` and `f*`.
pub fn count_tp_fp(instance: &LinearInstance, g: &LinearClassifier) -> Result<EvalReport> {
    if g.dims() != instance.dims() {
        return Err(Error::DimensionMismatch {
            expected: instance.dims(),
            found: g.dims(),
        });
    }
    let region = region_predicate(instance, g);
    let mut report = EvalReport::default();
    for agent in instance.agents() {
        let resp = respond(&agent.x, g, instance);
        let color = resp.color();
        if let Some(predict) = &region {
            if let Some(expected) = predict(&agent.x) {
                if expected != color {
                    return Err(Error::RegionMismatch {
                        agent: agent.id.clone(),
                    });
                }
            }
        }
        report.add(agent.weight, color);
    }
    Ok(report)
}

type Predicate<'a> = Box<dyn Fn(&[f64]) -> Option<Option<Color>> + 'a>;

/// `None` when the geometric setting does not apply. The predicate itself
/// returns `None` for agents within `REGION_SLACK` of a boundary.
fn region_predicate<'a>(
    instance: &'a LinearInstance,
    g: &'a LinearClassifier,
) -> Option<Predicate<'a>> {
    if instance.dims() != 2 || !instance.is_improvement(0) || instance.is_improvement(1) {
        return None;
    }
    let f = instance.fstar();
    if instance.movement_dimension(g) != 0 || instance.movement_dimension(f) != 1 {
        return None;
    }
    let (a, b) = (g.a(), g.b());
    let (fa, fb) = (f.a(), f.b());
    let det = a[0] * fa[1] - a[1] * fa[0];
    if det.abs() < 1e-12 || a[0] <= 0.0 {
        return None;
    }
    let z1 = (a[0] * fb - fa[0] * b) / det;
    let reach = a[0] / instance.cost_vector()[0];
    Some(Box::new(move |x: &[f64]| {
        let pos = g.score(x) + reach - b;
        let above = f.score(x) - fb;
        let high = x[1] - z1;
        if pos.abs() < REGION_SLACK || above.abs() < REGION_SLACK || high.abs() < REGION_SLACK {
            return None;
        }
        Some(if pos < 0.0 {
            None
        } else if high > 0.0 || above > 0.0 {
            Some(Color::Blue)
        } else {
            Some(Color::Red)
        })
    }))
}
