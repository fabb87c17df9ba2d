//! Seeded instance families.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::AgentDistribution;
use crate::model::discrete::{AgentNode, Color, DiscreteInstance, Edge, TiePolicy};
use crate::model::linear::{
    compile_linear_to_discrete, LinearAgent, LinearClassifier, LinearInstance,
};

/// Agents `x1..xn` and criteria `p1..pm`. Each pair gets an edge with
/// probability `edge_prob`, a uniform cost in `cost_range`, and is Blue with
/// probability `blue_prob`.
pub fn gen_random_discrete(
    n: usize,
    m: usize,
    edge_prob: f64,
    blue_prob: f64,
    cost_range: (f64, f64),
    seed: u64,
) -> Result<DiscreteInstance> {
    for (name, p) in [("edge_prob", edge_prob), ("blue_prob", blue_prob)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(name, format!("must lie in [0, 1], got {p}")));
        }
    }
    let (lo, hi) = cost_range;
    if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
        return Err(Error::param(
            "cost_range",
            format!("need 0 < lo <= hi <= 1, got ({lo}, {hi})"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents = (1..=n)
        .map(|i| {
            let mut edges = Vec::new();
            for to in 0..m {
                if rng.gen::<f64>() < edge_prob {
                    let cost = lo + (hi - lo) * rng.gen::<f64>();
                    let color = if rng.gen::<f64>() < blue_prob {
                        Color::Blue
                    } else {
                        Color::Red
                    };
                    edges.push(Edge { to, cost, color });
                }
            }
            AgentNode::new(format!("x{i}"), 1.0, edges)
        })
        .collect();
    DiscreteInstance::new(
        (1..=m).map(|k| format!("p{k}")).collect(),
        agents,
        TiePolicy::Pessimistic,
    )
}

/// A hard distribution for learning which targets to publish.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundFamily {
    pub m: usize,
    pub eps: f64,
    /// Target indices (0-based) kept by the concept, sorted.
    pub concept: Vec<usize>,
    /// The remaining targets, only reachable by gaming examples with mass.
    pub p_g: Vec<usize>,
    /// Examples `x1..x2m` with unit weights and targets `p1..pm`.
    pub instance: LinearInstance,
    /// Distribution over the examples with positive mass.
    pub dist: AgentDistribution,
    /// Probability of each of the `2m` examples, zeros included.
    pub masses: Vec<f64>,
}

impl LowerBoundFamily {
    /// `(3/4)(1 - 32 eps)`: the improving mass behind the concept's targets.
    pub fn opt(&self) -> f64 {
        0.75 * (1.0 - 32.0 * self.eps)
    }
}

/// Targets `p_i = (2i, 2m - 2i)` on `f*: x0 + x1 >= 2m`, unit costs,
/// dimension 0 improving. Example `x_i = p_i - e0` reaches only `p_i` and
/// improves; `x_{m+i} = p_i - e1` reaches only `p_i` and games. Improving
/// examples carry `(1 - 32 eps)/m` each, gaming examples `128 eps / m` when
/// their target is outside the seeded concept and nothing otherwise.
pub fn gen_lower_bound(m: usize, eps: f64, seed: u64) -> Result<LowerBoundFamily> {
    if m < 4 || m % 4 != 0 {
        return Err(Error::param(
            "m",
            format!("must be a positive multiple of 4, got {m}"),
        ));
    }
    if !(eps > 0.0 && 32.0 * eps < 1.0) {
        return Err(Error::param(
            "eps",
            format!("need 0 < 32 eps < 1, got eps = {eps}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut concept = sample(&mut rng, m, 3 * m / 4).into_vec();
    concept.sort_unstable();
    let mut in_concept = vec![false; m];
    for &k in &concept {
        in_concept[k] = true;
    }
    let p_g: Vec<usize> = (0..m).filter(|&k| !in_concept[k]).collect();

    let mf = m as f64;
    let target = |i: usize| vec![2.0 * i as f64, 2.0 * (mf - i as f64)];
    let targets: Vec<Vec<f64>> = (1..=m).map(target).collect();
    let mut agents = Vec::with_capacity(2 * m);
    for i in 1..=m {
        let p = target(i);
        agents.push(LinearAgent::new(format!("x{i}"), vec![p[0] - 1.0, p[1]]));
    }
    for i in 1..=m {
        let p = target(i);
        agents.push(LinearAgent::new(
            format!("x{}", m + i),
            vec![p[0], p[1] - 1.0],
        ));
    }
    let instance = LinearInstance::new(
        vec![1.0, 1.0],
        &[0],
        LinearClassifier::new(vec![1.0, 1.0], 2.0 * mf)?,
        agents,
        Some(targets),
    )?;

    let improving = (1.0 - 32.0 * eps) / mf;
    let gaming = 128.0 * eps / mf;
    let masses: Vec<f64> = (0..2 * m)
        .map(|k| match k < m {
            true => improving,
            false if in_concept[k - m] => 0.0,
            false => gaming,
        })
        .collect();
    let compiled = compile_linear_to_discrete(&instance, TiePolicy::Pessimistic)?;
    let support = compiled
        .agents()
        .iter()
        .zip(&masses)
        .map(|(a, &w)| AgentNode::new(a.id.clone(), w, a.edges.clone()))
        .collect();
    let dist = AgentDistribution::new(
        compiled.criteria().to_vec(),
        support,
        TiePolicy::Pessimistic,
    )?;
    Ok(LowerBoundFamily {
        m,
        eps,
        concept,
        p_g,
        instance,
        dist,
        masses,
    })
}

/// Elements `0..n`, sets of exactly three elements, and a budget of `k` sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverSpec {
    pub n: usize,
    pub sets: Vec<Vec<usize>>,
    pub k: usize,
}

/// Elements `0..n`, sets of one common size `s` with `0 < s < n`, and a
/// budget `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HitSpec {
    pub n: usize,
    pub sets: Vec<Vec<usize>>,
    pub k: usize,
}

fn check_sets(n: usize, sets: &[Vec<usize>]) -> Result<()> {
    for (j, s) in sets.iter().enumerate() {
        let mut seen = vec![false; n];
        for &e in s {
            if e >= n {
                return Err(Error::invalid(format!(
                    "set {j} names element {e}, but n = {n}"
                )));
            }
            if std::mem::replace(&mut seen[e], true) {
                return Err(Error::invalid(format!("set {j} repeats element {e}")));
            }
        }
    }
    Ok(())
}

/// `n + 1` dimensions at cost 1/2 each, the last one gaming, and
/// `f*: sum x >= 4`. Element agent `e{i}` sits at `e_i + e_n`; set agent
/// `S{j}` has 1 on the set's coordinates and -1 on the last; target `p{j}`
/// has 1 on the set's coordinates and on the last.
pub fn gen_max_k_cover(spec: &CoverSpec) -> Result<LinearInstance> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::invalid("cover instance needs at least one element"));
    }
    if let Some(j) = spec.sets.iter().position(|s| s.len() != 3) {
        return Err(Error::invalid(format!(
            "set {j} has {} elements, expected 3",
            spec.sets[j].len()
        )));
    }
    check_sets(n, &spec.sets)?;
    let mut sorted: Vec<Vec<usize>> = spec
        .sets
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s
        })
        .collect();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("sets must be distinct"));
    }
    let d = n + 1;
    let indicator = |s: &[usize], last: f64| {
        let mut v = vec![0.0; d];
        for &e in s {
            v[e] = 1.0;
        }
        v[n] = last;
        v
    };
    let mut agents: Vec<LinearAgent> = (0..n)
        .map(|i| LinearAgent::new(format!("e{}", i + 1), indicator(&[i], 1.0)))
        .collect();
    agents.extend(
        spec.sets
            .iter()
            .enumerate()
            .map(|(j, s)| LinearAgent::new(format!("S{}", j + 1), indicator(s, -1.0))),
    );
    let targets = spec.sets.iter().map(|s| indicator(s, 1.0)).collect();
    LinearInstance::new(
        vec![0.5; d],
        &(0..n).collect::<Vec<_>>(),
        LinearClassifier::new(vec![1.0; d], 4.0)?,
        agents,
        Some(targets),
    )
}

fn hit_params(spec: &HitSpec) -> Result<(usize, f64)> {
    let n = spec.n;
    let s = spec.sets.first().map_or(0, Vec::len);
    if spec.sets.is_empty() {
        return Err(Error::invalid(
            "hitting-set instance needs at least one set",
        ));
    }
    if !(0 < s && s < n) {
        return Err(Error::invalid(format!(
            "set size must satisfy 0 < s < n, got s = {s}, n = {n}"
        )));
    }
    if let Some(j) = spec.sets.iter().position(|t| t.len() != s) {
        return Err(Error::invalid(format!(
            "set {j} has {} elements, expected {s}",
            spec.sets[j].len()
        )));
    }
    if spec.k == 0 {
        return Err(Error::invalid("budget k must be at least 1"));
    }
    check_sets(n, &spec.sets)?;
    let level = 2 * spec.k * (n - s) + s;
    Ok((level, level as f64))
}

/// Midpoint of `(1/(L+1), 1/L)` with `L = 2k(n - s) + s`, the gaming cost
/// used by [`gen_hitting_set`].
pub fn hitting_set_gaming_cost(spec: &HitSpec) -> Result<f64> {
    let (_, l) = hit_params(spec)?;
    Ok(0.5 * (1.0 / (l + 1.0) + 1.0 / l))
}

/// `n + 1` dimensions, the last one gaming. Agent `x{i}` for set `S_i` has 1
/// on the set's coordinates, `2k` on the other element coordinates and 0 on
/// the last; agent `x{m+1}` has zeros and `L` on the last. Every agent's
/// coordinates sum to `L`, and `f*: sum x >= L + 2k`. Improvement costs are
/// `1/(2k)`; the gaming cost is [`hitting_set_gaming_cost`].
pub fn gen_hitting_set(spec: &HitSpec) -> Result<LinearInstance> {
    let (level, l) = hit_params(spec)?;
    let n = spec.n;
    let k2 = 2.0 * spec.k as f64;
    let mut agents: Vec<LinearAgent> = spec
        .sets
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut x = vec![k2; n + 1];
            for &e in s {
                x[e] = 1.0;
            }
            x[n] = 0.0;
            LinearAgent::new(format!("x{}", i + 1), x)
        })
        .collect();
    let mut special = vec![0.0; n + 1];
    special[n] = l;
    agents.push(LinearAgent::new(
        format!("x{}", spec.sets.len() + 1),
        special,
    ));
    let mut cost = vec![1.0 / k2; n + 1];
    cost[n] = hitting_set_gaming_cost(spec)?;
    LinearInstance::new(
        cost,
        &(0..n).collect::<Vec<_>>(),
        LinearClassifier::new(vec![1.0; n + 1], (level as f64) + k2)?,
        agents,
        None,
    )
}

/// Targets built from a hitting set: `p_i = x_i + 2k e_0` for every set
/// agent and, for the special agent, 2 on the hitting set's coordinates with
/// its other coordinates unchanged.
pub fn encode_hitting_set(spec: &HitSpec, hitting: &[usize]) -> Result<Vec<Vec<f64>>> {
    let inst = gen_hitting_set(spec)?;
    check_sets(spec.n, &[hitting.to_vec()])?;
    if let Some(j) = spec
        .sets
        .iter()
        .position(|s| !s.iter().any(|e| hitting.contains(e)))
    {
        return Err(Error::invalid(format!("set {j} is not hit")));
    }
    let k2 = 2.0 * spec.k as f64;
    let m = spec.sets.len();
    let mut targets: Vec<Vec<f64>> = inst.agents()[..m]
        .iter()
        .map(|a| {
            let mut p = a.x.clone();
            p[0] += k2;
            p
        })
        .collect();
    let mut p = inst.agents()[m].x.clone();
    for &e in hitting {
        p[e] = 2.0;
    }
    targets.push(p);
    Ok(targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::discrete::{evaluate_criteria, CriteriaSet};
    use crate::model::linear::target_color;
    use crate::solver::solve_no_fp;

    #[test]
    fn random_degenerate_parameters() {
        let none = gen_random_discrete(6, 4, 0.0, 0.5, (0.1, 1.0), 1).unwrap();
        assert!(none.agents().iter().all(|a| a.edges.is_empty()));
        assert_eq!(solve_no_fp(&none).p_final, CriteriaSet::full(4));
        let blue = gen_random_discrete(6, 4, 0.7, 1.0, (0.1, 1.0), 1).unwrap();
        assert!(blue
            .agents()
            .iter()
            .flat_map(|a| &a.edges)
            .all(|e| e.color == Color::Blue));
        assert_eq!(solve_no_fp(&blue).p_final, CriteriaSet::full(4));
        assert_eq!(
            gen_random_discrete(5, 3, 0.5, 0.5, (0.1, 1.0), 42).unwrap(),
            gen_random_discrete(5, 3, 0.5, 0.5, (0.1, 1.0), 42).unwrap()
        );
        assert!(gen_random_discrete(5, 3, 1.5, 0.5, (0.1, 1.0), 42).is_err());
        assert!(gen_random_discrete(5, 3, 0.5, 0.5, (0.0, 1.0), 42).is_err());
    }

    #[test]
    fn lower_bound_layout() {
        let fam = gen_lower_bound(8, 0.01, 3).unwrap();
        let t = fam.instance.targets().unwrap();
        assert_eq!(t[2], vec![6.0, 10.0]);
        assert_eq!(fam.instance.agents()[2].x, vec![5.0, 10.0]);
        assert_eq!(fam.instance.agents()[10].x, vec![6.0, 9.0]);
        assert_eq!(fam.concept.len(), 6);
        assert_eq!(fam.p_g.len(), 2);
    }

    #[test]
    fn lower_bound_masses() {
        let fam = gen_lower_bound(4, 0.01, 0).unwrap();
        let improving = &fam.masses[..4];
        assert!(improving.iter().all(|&w| (w - 0.17).abs() < 1e-12));
        let gaming: Vec<f64> = fam.masses[4..]
            .iter()
            .copied()
            .filter(|&w| w > 0.0)
            .collect();
        assert_eq!(gaming.len(), 1);
        assert!((gaming[0] - 0.32).abs() < 1e-12);
        assert!((fam.masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(gen_lower_bound(6, 0.01, 0).is_err());
        assert!(gen_lower_bound(8, 0.1, 0).is_err());
    }

    #[test]
    fn lower_bound_each_example_reaches_one_target() {
        let fam = gen_lower_bound(8, 0.01, 5).unwrap();
        let inst = &fam.instance;
        for (k, a) in inst.agents().iter().enumerate() {
            for (t, p) in inst.targets().unwrap().iter().enumerate() {
                let c = inst.cost_between(&a.x, p);
                if t == k % 8 {
                    assert_eq!(c, 1.0);
                    let color = target_color(&a.x, p, inst).unwrap();
                    assert_eq!(color == Color::Blue, k < 8);
                } else {
                    assert!(c > 1.0);
                }
            }
        }
        let opt = evaluate_criteria(
            fam.dist.instance(),
            &CriteriaSet::from_indices(8, fam.concept.iter().copied()),
        );
        assert!((opt.tp_mass - fam.opt()).abs() < 1e-12);
        assert_eq!(opt.fp_mass, 0.0);
    }

    #[test]
    fn cover_distances() {
        let spec = CoverSpec {
            n: 5,
            sets: vec![vec![0, 1, 2], vec![2, 3, 4]],
            k: 1,
        };
        let inst = gen_max_k_cover(&spec).unwrap();
        let t = inst.targets().unwrap();
        let a = inst.agents();
        assert_eq!(inst.cost_between(&a[0].x, &t[0]), 1.0);
        assert_eq!(target_color(&a[0].x, &t[0], &inst).unwrap(), Color::Blue);
        assert_eq!(inst.cost_between(&a[0].x, &t[1]), 1.5);
        assert_eq!(inst.cost_between(&a[5].x, &t[0]), 1.0);
        assert_eq!(target_color(&a[5].x, &t[0], &inst).unwrap(), Color::Red);
        assert!(gen_max_k_cover(&CoverSpec {
            n: 5,
            sets: vec![vec![0, 1]],
            k: 1
        })
        .is_err());
    }

    #[test]
    fn hitting_set_construction() {
        let spec = HitSpec {
            n: 4,
            sets: vec![vec![0, 1], vec![1, 2], vec![2, 3]],
            k: 2,
        };
        let inst = gen_hitting_set(&spec).unwrap();
        let l = (2 * 2 * 2 + 2) as f64;
        let c = inst.cost_vector()[4];
        assert!(1.0 / (l + 1.0) < c && c < 1.0 / l);
        for a in inst.agents() {
            assert_eq!(inst.fstar().b() - inst.fstar().score(&a.x), 4.0);
        }
        let targets = encode_hitting_set(&spec, &[1, 2]).unwrap();
        let special = &inst.agents()[3].x;
        for p in &targets[..3] {
            assert!(inst.cost_between(special, p) > 1.0);
        }
        let with = inst.with_targets(targets).unwrap();
        let d = compile_linear_to_discrete(&with, TiePolicy::Pessimistic).unwrap();
        let r = evaluate_criteria(&d, &CriteriaSet::full(4));
        assert_eq!((r.tp_count, r.fp_count), (4, 0));
        assert!(encode_hitting_set(&spec, &[0]).is_err());
    }
}
