//! PAC learners over a finite-support distribution of agents.
//!
//! Samples are drawn with replacement using `ChaCha8Rng::seed_from_u64(seed)`:
//! each draw takes one `f64` in `[0, 1)` and returns the first support entry
//! whose cumulative probability exceeds it. Recorded traces, not the
//! generator, are the reproducibility contract.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::discrete::{
    best_response_targets, evaluate_criteria, AgentNode, Color, CriteriaSet, DiscreteInstance,
    EvalReport,
};
use crate::oracles::{oracle_subsets, FpBudget, DEFAULT_MAX_P};
use crate::solver::solve_no_fp;

/// Tolerance on the total probability of a distribution.
pub const PROB_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentDistribution {
    support: DiscreteInstance,
    cumulative: Vec<f64>,
}

impl AgentDistribution {
    /// Builds a distribution from an instance whose agent weights are the
    /// probabilities. Ids must be distinct and the weights must sum to 1.
    pub fn from_instance(support: DiscreteInstance) -> Result<Self> {
        let mut ids = std::collections::HashSet::new();
        for a in support.agents() {
            if !ids.insert(a.id.as_str()) {
                return Err(Error::invalid(format!(
                    "duplicate support entry `{}`",
                    a.id
                )));
            }
        }
        let total = support.total_weight();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::invalid(format!(
                "support probabilities sum to {total}, expected 1"
            )));
        }
        let mut acc = 0.0;
        let cumulative = support
            .agents()
            .iter()
            .map(|a| {
                acc += a.weight;
                acc
            })
            .collect();
        Ok(AgentDistribution {
            support,
            cumulative,
        })
    }

    /// Like [`from_instance`](Self::from_instance) but drops zero-probability
    /// entries first; they can never be drawn.
    pub fn new(
        criteria: Vec<String>,
        support: Vec<AgentNode>,
        tie: crate::model::TiePolicy,
    ) -> Result<Self> {
        if let Some(bad) = support
            .iter()
            .find(|a| !(a.weight >= 0.0 && a.weight.is_finite()))
        {
            return Err(Error::invalid(format!(
                "support entry `{}` has probability {}",
                bad.id, bad.weight
            )));
        }
        let support = support.into_iter().filter(|a| a.weight > 0.0).collect();
        AgentDistribution::from_instance(DiscreteInstance::new(criteria, support, tie)?)
    }

    pub fn instance(&self) -> &DiscreteInstance {
        &self.support
    }

    pub fn criteria_count(&self) -> usize {
        self.support.criteria().len()
    }

    pub fn sample_index(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen::<f64>() * self.cumulative.last().copied().unwrap_or(0.0);
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

/// Ceiling that ignores floating-point noise just above an integer.
fn ceil_bound(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

fn check_unit_interval(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must lie in (0, 1], got {v}")))
    }
}

/// `ceil((ln 2 * |P| + ln(1/delta)) / eps)`, enough samples for the
/// full-information learner.
pub fn sample_size_full(eps: f64, delta: f64, p_count: usize) -> Result<usize> {
    check_unit_interval("eps", eps)?;
    check_unit_interval("delta", delta)?;
    if p_count == 0 {
        return Err(Error::param("p_count", "must be at least 1"));
    }
    Ok(ceil_bound(
        (std::f64::consts::LN_2 * p_count as f64 + (1.0 / delta).ln()) / eps,
    ))
}

/// `ceil(ln(|P| / delta) / eps)`, the batch size of the partial-information
/// learner. `p_count` is real so the bound can be probed off the integers.
pub fn batch_size_partial(eps: f64, delta: f64, p_count: f64) -> Result<usize> {
    check_unit_interval("eps", eps)?;
    check_unit_interval("delta", delta)?;
    if p_count / delta <= 1.0 {
        return Err(Error::param(
            "p_count",
            format!("|P| / delta must exceed 1, got {}", p_count / delta),
        ));
    }
    Ok(ceil_bound((p_count / delta).ln() / eps))
}

/// The unrounded total-sample bound `|P| ln(|P|/delta) / eps` next to the
/// bound the rounded batches actually respect, `|P| * batch`.
pub fn partial_total_bound(eps: f64, delta: f64, p_count: usize) -> Result<(f64, usize)> {
    let batch = batch_size_partial(eps, delta, p_count as f64)?;
    let p = p_count as f64;
    Ok((p * (p / delta).ln() / eps, p_count * batch))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    /// Index of the drawn support entry.
    pub sample: usize,
    pub chosen: Option<usize>,
    pub color: Option<Color>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchRecord {
    pub batch: usize,
    pub drawn: usize,
    /// Observations up to and including the first Red.
    pub observations: Vec<Observation>,
    pub deleted: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullDeletion {
    pub round: usize,
    /// Support index of the sampled agent that gamed.
    pub sample: usize,
    pub criterion: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "learner", rename_all = "lowercase")]
pub enum LearnTrace {
    Full {
        samples: Vec<usize>,
        deletions: Vec<FullDeletion>,
    },
    Partial {
        batch_size: usize,
        batches: Vec<BatchRecord>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnResult {
    pub p_final: CriteriaSet,
    pub samples_used: usize,
    pub trace: LearnTrace,
    /// Performance (`tp_mass`) and error (`fp_mass`) under the distribution.
    pub exact_eval: EvalReport,
}

/// Draws `sample_size_full(eps, delta, |P|)` agents with their full
/// neighborhoods and keeps the zero-FP criteria set of that sample.
pub fn learn_full(
    dist: &AgentDistribution,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<LearnResult> {
    let n = sample_size_full(eps, delta, dist.criteria_count().max(1))?;
    Ok(learn_full_with_samples(dist, n, seed))
}

/// The full-information learner on exactly `samples` draws.
pub fn learn_full_with_samples(dist: &AgentDistribution, samples: usize, seed: u64) -> LearnResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support = dist.instance();
    let drawn: Vec<usize> = (0..samples).map(|_| dist.sample_index(&mut rng)).collect();
    let agents = drawn
        .iter()
        .map(|&k| {
            let a = &support.agents()[k];
            AgentNode::new(a.id.clone(), 1.0, a.edges.clone())
        })
        .collect();
    let sample = DiscreteInstance::new(support.criteria().to_vec(), agents, support.tie_policy())
        .expect("sample inherits a valid graph")
        .with_tau(support.tau());
    let solved = solve_no_fp(&sample);
    let deletions = solved
        .deletions
        .iter()
        .map(|d| FullDeletion {
            round: d.round,
            sample: drawn[d.agent],
            criterion: d.criterion,
        })
        .collect();
    let exact_eval = exact_performance_error(dist, &solved.p_final);
    LearnResult {
        p_final: solved.p_final,
        samples_used: samples,
        trace: LearnTrace::Full {
            samples: drawn,
            deletions,
        },
        exact_eval,
    }
}

/// Partial-information learner: each draw reveals only the criterion the
/// agent picked and the color of the edge it took. A batch containing a Red
/// deletes the first such criterion and the rest of the batch is discarded;
/// a clean batch ends the search.
pub fn learn_partial(
    dist: &AgentDistribution,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<LearnResult> {
    let p = dist.criteria_count();
    let batch_size = batch_size_partial(eps, delta, p as f64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support = dist.instance();
    let mut p_final = CriteriaSet::full(p);
    let mut batches = Vec::new();
    let mut samples_used = 0;

    while !p_final.is_empty() {
        let drawn: Vec<usize> = (0..batch_size)
            .map(|_| dist.sample_index(&mut rng))
            .collect();
        samples_used += batch_size;
        let mut observations = Vec::new();
        let mut deleted = None;
        for &k in &drawn {
            let out = best_response_targets(
                &support.agents()[k],
                &p_final,
                support.tie_policy(),
                support.tau(),
            );
            observations.push(Observation {
                sample: k,
                chosen: out.chosen,
                color: out.color,
            });
            if out.color == Some(Color::Red) {
                deleted = out.chosen;
                break;
            }
        }
        batches.push(BatchRecord {
            batch: batches.len() + 1,
            drawn: batch_size,
            observations,
            deleted,
        });
        match deleted {
            Some(c) => {
                p_final.remove(c);
            }
            None => break,
        }
    }

    let exact_eval = exact_performance_error(dist, &p_final);
    Ok(LearnResult {
        p_final,
        samples_used,
        trace: LearnTrace::Partial {
            batch_size,
            batches,
        },
        exact_eval,
    })
}

/// Exact performance and error of `p_final` over the finite support.
pub fn exact_performance_error(dist: &AgentDistribution, p_final: &CriteriaSet) -> EvalReport {
    evaluate_criteria(dist.instance(), p_final)
}

/// Maximum zero-FP true-positive mass. Exhaustive when `|P|` is within the
/// oracle cap, otherwise the exact greedy solver on the weighted support.
pub fn optimum(dist: &AgentDistribution) -> f64 {
    let inst = dist.instance();
    if inst.criteria().len() <= DEFAULT_MAX_P {
        oracle_subsets(inst, FpBudget::Count(0), DEFAULT_MAX_P)
            .expect("within cap")
            .best_value
    } else {
        solve_no_fp(inst).report.tp_mass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Learner {
    Full,
    Partial,
}

impl std::str::FromStr for Learner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Learner::Full),
            "partial" => Ok(Learner::Partial),
            other => Err(Error::param(
                "learner",
                format!("unknown learner `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub learner: Learner,
    pub eps: f64,
    pub delta: f64,
    pub trials: usize,
    pub base_seed: u64,
    /// Overrides the full learner's sample size.
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub samples_used: usize,
    pub performance: f64,
    pub error: f64,
    pub opt: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialTable {
    pub rows: Vec<TrialRow>,
    pub opt: f64,
}

impl TrialTable {
    pub fn failure_rate(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| !r.success).count() as f64 / self.rows.len() as f64
    }

    pub fn mean_error(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().map(|r| r.error).sum::<f64>() / self.rows.len() as f64
    }
}

/// Runs independent trials with seeds `base_seed + trial`. A trial succeeds
/// when performance is at least `OPT - eps` and error at most `eps`.
/// Trials run on the ambient rayon pool; rows come back in trial order.
pub fn run_trials(dist: &AgentDistribution, config: &TrialConfig) -> Result<TrialTable> {
    if config.trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    check_unit_interval("eps", config.eps)?;
    check_unit_interval("delta", config.delta)?;
    let opt = optimum(dist);
    let rows = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = config.base_seed.wrapping_add(trial as u64);
            let res = match (config.learner, config.samples) {
                (Learner::Full, Some(n)) => Ok(learn_full_with_samples(dist, n, seed)),
                (Learner::Full, None) => learn_full(dist, config.eps, config.delta, seed),
                (Learner::Partial, _) => learn_partial(dist, config.eps, config.delta, seed),
            }?;
            let performance = res.exact_eval.tp_mass;
            let error = res.exact_eval.fp_mass;
            Ok(TrialRow {
                trial,
                seed,
                samples_used: res.samples_used,
                performance,
                error,
                opt,
                success: performance >= opt - config.eps - PROB_TOLERANCE
                    && error <= config.eps + PROB_TOLERANCE,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialTable { rows, opt })
}
