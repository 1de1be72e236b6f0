//! JSON serialization for models.
//!
//! Every file is an object with a `"type"` field (`"pecp"`, `"stit"`, or
//! `"clpc"`) choosing the layout:
//!
//! ```json
//! {"type": "pecp", "worlds": ["a", "b"], "valuation": {"p": ["a"]}}
//! ```
//!
//! ```json
//! {"type": "stit", "worlds": ["a", "b"], "n_agents": 1,
//!  "r_empty": [["a", "b"]],
//!  "r_agent": {"1": [["a"], ["b"]]},
//!  "valuation": {"p": ["a"]}}
//! ```
//!
//! ```json
//! {"type": "clpc", "n_agents": 2,
//!  "control": {"1": ["p"], "2": ["q"]},
//!  "true_atoms": ["p"]}
//! ```
//!
//! Unknown fields are rejected; loading performs the structural checks of
//! the model constructors but not semantic validation — call `validate` on
//! the loaded model to list violations.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::atom::{AgentId, Atom};

use super::{ClpcModel, ModelError, PecpModel, StitModel, World};

/// A model of any of the three kinds, as stored on disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Model {
    Pecp(PecpModel),
    Stit(StitModel),
    Clpc(ClpcModel),
}

impl Model {
    /// The `"type"` tag of this model.
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Pecp(_) => "pecp",
            Model::Stit(_) => "stit",
            Model::Clpc(_) => "clpc",
        }
    }

    /// Human-readable violation reports from semantic validation; empty when
    /// the model satisfies all side conditions.
    pub fn violations(&self) -> Vec<String> {
        match self {
            Model::Pecp(_) => Vec::new(),
            Model::Stit(m) => m.validate().iter().map(|v| v.to_string()).collect(),
            Model::Clpc(m) => m.validate().iter().map(|v| v.to_string()).collect(),
        }
    }

    /// Serializes to pretty-printed JSON.
    pub fn to_json(&self) -> String {
        let value = match self {
            Model::Pecp(m) => serde_json::to_value(RawPecp::from(m)),
            Model::Stit(m) => serde_json::to_value(RawStit::from(m)),
            Model::Clpc(m) => serde_json::to_value(RawClpc::from(m)),
        }
        .expect("models serialize");
        serde_json::to_string_pretty(&value).expect("values print")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPecp {
    r#type: String,
    worlds: Vec<String>,
    valuation: BTreeMap<String, Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStit {
    r#type: String,
    worlds: Vec<String>,
    n_agents: u32,
    r_empty: Vec<Vec<String>>,
    r_agent: BTreeMap<String, Vec<Vec<String>>>,
    valuation: BTreeMap<String, Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClpc {
    r#type: String,
    n_agents: u32,
    control: BTreeMap<String, Vec<String>>,
    true_atoms: Vec<String>,
}

fn parse_worlds(names: &[String]) -> Result<Vec<World>, ModelError> {
    names.iter().map(|n| World::new(n)).collect()
}

fn parse_world_set(names: &[String], context: &str) -> Result<BTreeSet<World>, ModelError> {
    let mut out = BTreeSet::new();
    for n in names {
        let w = World::new(n)?;
        if !out.insert(w) {
            return Err(ModelError::DuplicateWorldIn {
                world: n.clone(),
                context: context.to_string(),
            });
        }
    }
    Ok(out)
}

fn parse_atom(name: &str) -> Result<Atom, ModelError> {
    Atom::new(name).map_err(|_| ModelError::BadAtom(name.to_string()))
}

fn parse_valuation(
    raw: &BTreeMap<String, Vec<String>>,
) -> Result<BTreeMap<Atom, BTreeSet<World>>, ModelError> {
    let mut out = BTreeMap::new();
    for (name, worlds) in raw {
        let atom = parse_atom(name)?;
        let set = parse_world_set(worlds, &format!("valuation of '{name}'"))?;
        out.insert(atom, set);
    }
    Ok(out)
}

fn parse_blocks(raw: &[Vec<String>], context: &str) -> Result<Vec<BTreeSet<World>>, ModelError> {
    raw.iter()
        .enumerate()
        .map(|(i, names)| parse_world_set(names, &format!("{context}, block {i}")))
        .collect()
}

fn parse_agent_key(key: &str) -> Result<AgentId, ModelError> {
    match key.parse::<u32>() {
        Ok(id) if id >= 1 => Ok(AgentId(id)),
        _ => Err(ModelError::Json(format!(
            "agent keys must be decimal integers >= 1, found {key:?}"
        ))),
    }
}

fn parse_atom_set(names: &[String], context: &str) -> Result<BTreeSet<Atom>, ModelError> {
    let mut out = BTreeSet::new();
    for n in names {
        let atom = parse_atom(n)?;
        if !out.insert(atom) {
            return Err(ModelError::DuplicateAtom {
                atom: n.clone(),
                context: context.to_string(),
            });
        }
    }
    Ok(out)
}

fn sorted_world_list(set: &BTreeSet<World>, order: &[World]) -> Vec<String> {
    // Writes members in model world order so files are stable and diffable.
    order
        .iter()
        .filter(|w| set.contains(w))
        .map(|w| w.name().to_string())
        .collect()
}

impl From<&PecpModel> for RawPecp {
    fn from(m: &PecpModel) -> RawPecp {
        RawPecp {
            r#type: "pecp".to_string(),
            worlds: m.worlds().iter().map(|w| w.name().to_string()).collect(),
            valuation: m
                .valuation()
                .iter()
                .map(|(a, s)| (a.name().to_string(), sorted_world_list(s, m.worlds())))
                .collect(),
        }
    }
}

impl From<&StitModel> for RawStit {
    fn from(m: &StitModel) -> RawStit {
        let blocks_of = |p: &super::Partition| -> Vec<Vec<String>> {
            p.blocks_in_first_seen_order(m.worlds())
                .iter()
                .map(|b| sorted_world_list(b, m.worlds()))
                .collect()
        };
        RawStit {
            r#type: "stit".to_string(),
            worlds: m.worlds().iter().map(|w| w.name().to_string()).collect(),
            n_agents: m.n_agents(),
            r_empty: blocks_of(m.r_empty()),
            r_agent: (1..=m.n_agents())
                .map(|id| {
                    let part = m.r_agent(AgentId(id)).expect("agents 1..=n");
                    (id.to_string(), blocks_of(part))
                })
                .collect(),
            valuation: m
                .valuation()
                .iter()
                .map(|(a, s)| (a.name().to_string(), sorted_world_list(s, m.worlds())))
                .collect(),
        }
    }
}

impl From<&ClpcModel> for RawClpc {
    fn from(m: &ClpcModel) -> RawClpc {
        RawClpc {
            r#type: "clpc".to_string(),
            n_agents: m.n_agents(),
            control: (1..=m.n_agents())
                .map(|id| {
                    let cell = m.control(AgentId(id)).expect("agents 1..=n");
                    (id.to_string(), cell.iter().map(|a| a.name().to_string()).collect())
                })
                .collect(),
            true_atoms: m.true_atoms().iter().map(|a| a.name().to_string()).collect(),
        }
    }
}

fn build_pecp(raw: RawPecp) -> Result<PecpModel, ModelError> {
    PecpModel::new(parse_worlds(&raw.worlds)?, parse_valuation(&raw.valuation)?)
}

fn build_stit(raw: RawStit) -> Result<StitModel, ModelError> {
    let worlds = parse_worlds(&raw.worlds)?;
    let r_empty = parse_blocks(&raw.r_empty, "empty-coalition partition")?;
    let mut r_agent = BTreeMap::new();
    for (key, blocks) in &raw.r_agent {
        let agent = parse_agent_key(key)?;
        let blocks = parse_blocks(blocks, &format!("partition of agent {key}"))?;
        r_agent.insert(agent, blocks);
    }
    StitModel::new(worlds, raw.n_agents, r_empty, r_agent, parse_valuation(&raw.valuation)?)
}

fn build_clpc(raw: RawClpc) -> Result<ClpcModel, ModelError> {
    let mut control = BTreeMap::new();
    for (key, atoms) in &raw.control {
        let agent = parse_agent_key(key)?;
        let cell = parse_atom_set(atoms, &format!("control cell of agent {key}"))?;
        control.insert(agent, cell);
    }
    let true_atoms = parse_atom_set(&raw.true_atoms, "true_atoms")?;
    ClpcModel::new(raw.n_agents, control, true_atoms)
}

/// Parses a model from a JSON string.
pub fn load_model_str(text: &str) -> Result<Model, ModelError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
    let kind = value
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| ModelError::Json("missing string field \"type\"".to_string()))?
        .to_string();
    match kind.as_str() {
        "pecp" => {
            let raw: RawPecp =
                serde_json::from_value(value).map_err(|e| ModelError::Json(e.to_string()))?;
            Ok(Model::Pecp(build_pecp(raw)?))
        }
        "stit" => {
            let raw: RawStit =
                serde_json::from_value(value).map_err(|e| ModelError::Json(e.to_string()))?;
            Ok(Model::Stit(build_stit(raw)?))
        }
        "clpc" => {
            let raw: RawClpc =
                serde_json::from_value(value).map_err(|e| ModelError::Json(e.to_string()))?;
            Ok(Model::Clpc(build_clpc(raw)?))
        }
        other => Err(ModelError::UnknownType(other.to_string())),
    }
}

/// Reads and parses a model file.
pub fn load_model(path: &Path) -> Result<Model, ModelError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
    load_model_str(&text)
}
