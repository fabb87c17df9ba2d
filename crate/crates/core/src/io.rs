//! JSON instance files. Every file carries a `kind` of `discrete`, `linear`
//! or `distribution`; unknown fields are rejected.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::learning::AgentDistribution;
use crate::model::discrete::{AgentNode, Color, DiscreteInstance, Edge, TiePolicy};
use crate::model::linear::{LinearAgent, LinearClassifier, LinearInstance};

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Discrete(DiscreteInstance),
    Linear(LinearInstance),
    Distribution(AgentDistribution),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Discrete(_) => "discrete",
            Instance::Linear(_) => "linear",
            Instance::Distribution(_) => "distribution",
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            Instance::Discrete(d) => discrete_to_json(d),
            Instance::Linear(l) => linear_to_json(l),
            Instance::Distribution(d) => distribution_to_json(d),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    to: String,
    cost: f64,
    color: Color,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentEntry {
    id: String,
    #[serde(default = "one")]
    weight: f64,
    #[serde(default)]
    edges: Vec<EdgeEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiscreteFile {
    kind: String,
    criteria: Vec<String>,
    agents: Vec<AgentEntry>,
    #[serde(default)]
    tie_policy: TiePolicy,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SupportEntry {
    id: String,
    prob: f64,
    #[serde(default)]
    edges: Vec<EdgeEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionFile {
    kind: String,
    criteria: Vec<String>,
    support: Vec<SupportEntry>,
    #[serde(default)]
    tie_policy: TiePolicy,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifierEntry {
    a: Vec<f64>,
    b: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearAgentEntry {
    id: String,
    x: Vec<f64>,
    #[serde(default = "one")]
    weight: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearFile {
    kind: String,
    dims: usize,
    cost: Vec<f64>,
    improvement_dims: Vec<usize>,
    fstar: ClassifierEntry,
    agents: Vec<LinearAgentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    targets: Option<Vec<Vec<f64>>>,
}

fn one() -> f64 {
    1.0
}

fn bad(e: serde_json::Error) -> Error {
    Error::invalid(e.to_string())
}

fn edges_out(criteria: &[String], edges: &[Edge]) -> Vec<EdgeEntry> {
    edges
        .iter()
        .map(|e| EdgeEntry {
            to: criteria[e.to].clone(),
            cost: e.cost,
            color: e.color,
        })
        .collect()
}

fn edges_in(criteria: &[String], agent: &str, edges: Vec<EdgeEntry>) -> Result<Vec<Edge>> {
    edges
        .into_iter()
        .map(|e| {
            let to = criteria.iter().position(|c| *c == e.to).ok_or_else(|| {
                Error::invalid(format!(
                    "agent `{agent}`: edge to unknown criterion `{}`",
                    e.to
                ))
            })?;
            Ok(Edge {
                to,
                cost: e.cost,
                color: e.color,
            })
        })
        .collect()
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn discrete_to_json(inst: &DiscreteInstance) -> String {
    let criteria = inst.criteria();
    pretty(&DiscreteFile {
        kind: "discrete".into(),
        criteria: criteria.to_vec(),
        agents: inst
            .agents()
            .iter()
            .map(|a| AgentEntry {
                id: a.id.clone(),
                weight: a.weight,
                edges: edges_out(criteria, &a.edges),
            })
            .collect(),
        tie_policy: inst.tie_policy(),
    })
}

pub fn distribution_to_json(dist: &AgentDistribution) -> String {
    let inst = dist.instance();
    let criteria = inst.criteria();
    pretty(&DistributionFile {
        kind: "distribution".into(),
        criteria: criteria.to_vec(),
        support: inst
            .agents()
            .iter()
            .map(|a| SupportEntry {
                id: a.id.clone(),
                prob: a.weight,
                edges: edges_out(criteria, &a.edges),
            })
            .collect(),
        tie_policy: inst.tie_policy(),
    })
}

pub fn linear_to_json(inst: &LinearInstance) -> String {
    pretty(&LinearFile {
        kind: "linear".into(),
        dims: inst.dims(),
        cost: inst.cost_vector().to_vec(),
        improvement_dims: inst.improvement_dims(),
        fstar: ClassifierEntry {
            a: inst.fstar().a().to_vec(),
            b: inst.fstar().b(),
        },
        agents: inst
            .agents()
            .iter()
            .map(|a| LinearAgentEntry {
                id: a.id.clone(),
                x: a.x.clone(),
                weight: a.weight,
            })
            .collect(),
        targets: inst.targets().map(<[Vec<f64>]>::to_vec),
    })
}

/// Parses any instance file, dispatching on its `kind`.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let value: Value = serde_json::from_str(text).map_err(bad)?;
    let kind = value
        .get("kind")
        .ok_or_else(|| Error::invalid("missing field `kind`"))?
        .as_str()
        .ok_or_else(|| Error::invalid("field `kind` must be a string"))?
        .to_owned();
    match kind.as_str() {
        "discrete" => {
            let f: DiscreteFile = serde_json::from_value(value).map_err(bad)?;
            let agents = f
                .agents
                .into_iter()
                .map(|a| {
                    let edges = edges_in(&f.criteria, &a.id, a.edges)?;
                    Ok(AgentNode::new(a.id, a.weight, edges))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Instance::Discrete(DiscreteInstance::new(
                f.criteria,
                agents,
                f.tie_policy,
            )?))
        }
        "distribution" => {
            let f: DistributionFile = serde_json::from_value(value).map_err(bad)?;
            let support = f
                .support
                .into_iter()
                .map(|a| {
                    let edges = edges_in(&f.criteria, &a.id, a.edges)?;
                    Ok(AgentNode::new(a.id, a.prob, edges))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Instance::Distribution(AgentDistribution::new(
                f.criteria,
                support,
                f.tie_policy,
            )?))
        }
        "linear" => {
            let f: LinearFile = serde_json::from_value(value).map_err(bad)?;
            if f.dims != f.cost.len() {
                return Err(Error::invalid(format!(
                    "field `dims` is {} but `cost` has {} entries",
                    f.dims,
                    f.cost.len()
                )));
            }
            let fstar = LinearClassifier::new(f.fstar.a, f.fstar.b)
                .map_err(|e| Error::invalid(format!("field `fstar`: {e}")))?;
            let agents = f
                .agents
                .into_iter()
                .map(|a| LinearAgent {
                    id: a.id,
                    x: a.x,
                    weight: a.weight,
                })
                .collect();
            Ok(Instance::Linear(LinearInstance::new(
                f.cost,
                &f.improvement_dims,
                fstar,
                agents,
                f.targets,
            )?))
        }
        other => Err(Error::invalid(format!(
            "field `kind` is `{other}`, expected discrete, linear or distribution"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_lower_bound, gen_random_discrete};

    #[test]
    fn discrete_round_trip() {
        let inst = gen_random_discrete(6, 4, 0.6, 0.5, (0.1, 1.0), 9).unwrap();
        let text = discrete_to_json(&inst);
        assert_eq!(parse_instance(&text).unwrap(), Instance::Discrete(inst));
    }

    #[test]
    fn linear_and_distribution_round_trip() {
        let fam = gen_lower_bound(8, 0.01, 2).unwrap();
        let text = linear_to_json(&fam.instance);
        assert_eq!(
            parse_instance(&text).unwrap(),
            Instance::Linear(fam.instance.clone())
        );
        let text = distribution_to_json(&fam.dist);
        assert_eq!(
            parse_instance(&text).unwrap(),
            Instance::Distribution(fam.dist)
        );
    }

    #[test]
    fn rejects_unknown_fields_and_kinds() {
        let e = parse_instance(r#"{"kind":"discrete","criteria":[],"agents":[],"extra":1}"#)
            .unwrap_err();
        assert!(e.to_string().contains("extra"));
        let e = parse_instance(r#"{"kind":"graph"}"#).unwrap_err();
        assert!(e.to_string().contains("kind"));
        let e = parse_instance(r#"{"criteria":[]}"#).unwrap_err();
        assert!(e.to_string().contains("kind"));
        let e = parse_instance(r#"{"kind":"discrete","criteria":["p1"],"agents":[{"id":"x","edges":[{"to":"p9","cost":0.5,"color":"red"}]}]}"#).unwrap_err();
        assert!(e.to_string().contains("p9"));
    }

    #[test]
    fn worked_example_parses() {
        let text = r#"{"kind":"discrete","criteria":["p1","p2"],"agents":[
            {"id":"x1","weight":1,"edges":[{"to":"p1","cost":0.5,"color":"blue"}]},
            {"id":"x2","weight":1,"edges":[{"to":"p1","cost":0.3,"color":"red"},{"to":"p2","cost":0.4,"color":"blue"}]}],
            "tie_policy":"pessimistic"}"#;
        let Instance::Discrete(d) = parse_instance(text).unwrap() else {
            panic!()
        };
        assert_eq!(d.agents().len(), 2);
    }
}
