//! Explicit models for the three logics.
//!
//! * [`PecpModel`] — worlds plus a valuation; the equivalence `~X` relates
//!   worlds agreeing on every atom of the signature `X` (also serves as an S5
//!   model, where the box quantifies over all worlds).
//! * [`StitModel`] — worlds, a partition for the empty coalition, one choice
//!   partition per agent, and a valuation. Coalition partitions are always
//!   derived as common refinements, never stored.
//! * [`ClpcModel`] — a control cell of atoms per agent plus the set of
//!   currently true atoms.
//!
//! Construction enforces structural well-formedness (partitions really
//! partition, names resolve); the semantic side conditions — choice
//! partitions refining the empty-coalition partition, independence of
//! agents, exclusive and complete control — are checked by `validate`, which
//! returns named violations so ill-formed inputs can be reported rather than
//! merely rejected.

mod convert;
mod json;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use convert::{
    clpc_to_stit_model, digits_needed, pad_choices, pecp_to_stit_model, stit_to_clpc_model,
    stit_to_pecp_model, ConvertError,
};
pub use json::{load_model, load_model_str, Model};

use crate::atom::{AgentId, Atom};

/// A world name: any nonempty string.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct World(String);

impl World {
    /// Validates and wraps a world name.
    pub fn new(name: &str) -> Result<World, ModelError> {
        if name.is_empty() {
            Err(ModelError::EmptyWorldName)
        } else {
            Ok(World(name.to_string()))
        }
    }

    /// The world's name.
    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "World({})", self.0)
    }
}

/// Structural errors raised while building or loading models.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("world names must be nonempty")]
    EmptyWorldName,
    #[error("model has no worlds")]
    NoWorlds,
    #[error("duplicate world '{0}'")]
    DuplicateWorld(String),
    #[error("unknown world '{world}' in {context}")]
    UnknownWorld { world: String, context: String },
    #[error("duplicate world '{world}' in {context}")]
    DuplicateWorldIn { world: String, context: String },
    #[error("{context}: block {index} is empty")]
    EmptyBlock { context: String, index: usize },
    #[error("{context}: world '{world}' appears in more than one block")]
    OverlappingBlocks { context: String, world: String },
    #[error("{context}: world '{world}' is not covered by any block")]
    UncoveredWorld { context: String, world: String },
    #[error("n_agents must be at least 1")]
    NoAgents,
    #[error("agent partitions must cover exactly agents 1..={expected}, found agent {found}")]
    AgentsMismatch { expected: u32, found: u32 },
    #[error("missing partition for agent {0}")]
    MissingAgent(u32),
    #[error("invalid atom name {0:?}")]
    BadAtom(String),
    #[error("duplicate atom '{atom}' in {context}")]
    DuplicateAtom { atom: String, context: String },
    #[error("model file is not valid JSON: {0}")]
    Json(String),
    #[error("unknown model type {0:?} (expected \"pecp\", \"stit\", or \"clpc\")")]
    UnknownType(String),
    #[error("cannot read model file: {0}")]
    Io(String),
}

/// A partition of a model's worlds into disjoint nonempty blocks.
///
/// Blocks keep their construction order; equality is order-insensitive.
#[derive(Clone, Debug, Eq)]
pub struct Partition {
    blocks: Vec<BTreeSet<World>>,
    block_index: BTreeMap<World, usize>,
}

impl Partition {
    /// Builds a partition, verifying the blocks tile `universe` exactly.
    pub fn new(
        blocks: Vec<BTreeSet<World>>,
        universe: &[World],
        context: &str,
    ) -> Result<Partition, ModelError> {
        let mut block_index: BTreeMap<World, usize> = BTreeMap::new();
        for (i, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(ModelError::EmptyBlock { context: context.to_string(), index: i });
            }
            for w in block {
                if block_index.insert(w.clone(), i).is_some() {
                    return Err(ModelError::OverlappingBlocks {
                        context: context.to_string(),
                        world: w.name().to_string(),
                    });
                }
            }
        }
        let known: BTreeSet<&World> = universe.iter().collect();
        for w in block_index.keys() {
            if !known.contains(w) {
                return Err(ModelError::UnknownWorld {
                    world: w.name().to_string(),
                    context: context.to_string(),
                });
            }
        }
        for w in universe {
            if !block_index.contains_key(w) {
                return Err(ModelError::UncoveredWorld {
                    context: context.to_string(),
                    world: w.name().to_string(),
                });
            }
        }
        Ok(Partition { blocks, block_index })
    }

    /// The single-block partition over `universe`.
    pub fn single_block(universe: &[World]) -> Partition {
        let block: BTreeSet<World> = universe.iter().cloned().collect();
        Partition::new(vec![block], universe, "single block").expect("one block tiles")
    }

    /// The partition with one singleton block per world, in `universe` order.
    pub fn discrete(universe: &[World]) -> Partition {
        let blocks = universe
            .iter()
            .map(|w| BTreeSet::from([w.clone()]))
            .collect();
        Partition::new(blocks, universe, "discrete").expect("singletons tile")
    }

    /// Blocks in construction order.
    pub fn blocks(&self) -> &[BTreeSet<World>] {
        &self.blocks
    }

    /// The block containing `w`, if `w` belongs to the partitioned universe.
    pub fn block_of(&self, w: &World) -> Option<&BTreeSet<World>> {
        self.block_index.get(w).map(|&i| &self.blocks[i])
    }

    /// True when `w` and `v` share a block.
    pub fn same_block(&self, w: &World, v: &World) -> bool {
        match (self.block_index.get(w), self.block_index.get(v)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// Blocks reordered by the position of their first member in `order`.
    pub fn blocks_in_first_seen_order(&self, order: &[World]) -> Vec<&BTreeSet<World>> {
        let mut seen = vec![false; self.blocks.len()];
        let mut out = Vec::with_capacity(self.blocks.len());
        for w in order {
            if let Some(&i) = self.block_index.get(w) {
                if !seen[i] {
                    seen[i] = true;
                    out.push(&self.blocks[i]);
                }
            }
        }
        out
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.blocks.iter().all(|block| {
            let mut members = block.iter();
            let first = members.next().expect("blocks are nonempty");
            match coarser.block_of(first) {
                None => false,
                Some(target) => members.all(|w| target.contains(w)),
            }
        })
    }

    /// Common refinement of several partitions: the nonempty intersections,
    /// ordered by first occurrence in `order`.
    pub fn common_refinement(parts: &[&Partition], order: &[World]) -> Partition {
        assert!(!parts.is_empty(), "need at least one partition");
        let mut blocks: Vec<BTreeSet<World>> = Vec::new();
        let mut key_to_block: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for w in order {
            let key: Vec<usize> = parts
                .iter()
                .map(|p| *p.block_index.get(w).expect("world in universe"))
                .collect();
            match key_to_block.get(&key) {
                Some(&i) => {
                    blocks[i].insert(w.clone());
                }
                None => {
                    key_to_block.insert(key, blocks.len());
                    blocks.push(BTreeSet::from([w.clone()]));
                }
            }
        }
        Partition::new(blocks, order, "common refinement").expect("refinement tiles")
    }

    fn canonical(&self) -> BTreeSet<&BTreeSet<World>> {
        self.blocks.iter().collect()
    }
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

fn check_worlds(worlds: &[World]) -> Result<(), ModelError> {
    if worlds.is_empty() {
        return Err(ModelError::NoWorlds);
    }
    let mut seen = BTreeSet::new();
    for w in worlds {
        if w.name().is_empty() {
            return Err(ModelError::EmptyWorldName);
        }
        if !seen.insert(w) {
            return Err(ModelError::DuplicateWorld(w.name().to_string()));
        }
    }
    Ok(())
}

fn check_valuation(
    valuation: &BTreeMap<Atom, BTreeSet<World>>,
    worlds: &[World],
) -> Result<(), ModelError> {
    let known: BTreeSet<&World> = worlds.iter().collect();
    for (atom, set) in valuation {
        for w in set {
            if !known.contains(w) {
                return Err(ModelError::UnknownWorld {
                    world: w.name().to_string(),
                    context: format!("valuation of '{atom}'"),
                });
            }
        }
    }
    Ok(())
}

/// Worlds plus a valuation. Atoms absent from the valuation are false
/// everywhere (partial-map convention).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PecpModel {
    worlds: Vec<World>,
    valuation: BTreeMap<Atom, BTreeSet<World>>,
}

impl PecpModel {
    /// Builds a model, validating world uniqueness and valuation targets.
    pub fn new(
        worlds: Vec<World>,
        valuation: BTreeMap<Atom, BTreeSet<World>>,
    ) -> Result<PecpModel, ModelError> {
        check_worlds(&worlds)?;
        check_valuation(&valuation, &worlds)?;
        Ok(PecpModel { worlds, valuation })
    }

    /// Worlds in declaration order.
    pub fn worlds(&self) -> &[World] {
        &self.worlds
    }

    /// True when `w` is a world of the model.
    pub fn has_world(&self, w: &World) -> bool {
        self.worlds.contains(w)
    }

    /// The valuation map.
    pub fn valuation(&self) -> &BTreeMap<Atom, BTreeSet<World>> {
        &self.valuation
    }

    /// Atoms mentioned by the valuation.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.valuation.keys().cloned().collect()
    }

    /// Truth of `atom` at `w`; absent atoms are false.
    pub fn truth(&self, atom: &Atom, w: &World) -> bool {
        self.valuation.get(atom).is_some_and(|s| s.contains(w))
    }

    /// True when `w` and `v` agree on every atom in `x`.
    pub fn equiv_mod_x(
        &self,
        x: &BTreeSet<Atom>,
        w: &World,
        v: &World,
    ) -> Result<bool, ModelError> {
        for u in [w, v] {
            if !self.has_world(u) {
                return Err(ModelError::UnknownWorld {
                    world: u.name().to_string(),
                    context: "equivalence query".to_string(),
                });
            }
        }
        Ok(x.iter().all(|a| self.truth(a, w) == self.truth(a, v)))
    }

    /// The partition of worlds into `~X`-equivalence classes, blocks ordered
    /// by first occurrence in the world list.
    pub fn classes_mod_x(&self, x: &BTreeSet<Atom>) -> Partition {
        let mut blocks: Vec<BTreeSet<World>> = Vec::new();
        let mut key_to_block: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
        for w in &self.worlds {
            let key: Vec<bool> = x.iter().map(|a| self.truth(a, w)).collect();
            match key_to_block.get(&key) {
                Some(&i) => {
                    blocks[i].insert(w.clone());
                }
                None => {
                    key_to_block.insert(key, blocks.len());
                    blocks.push(BTreeSet::from([w.clone()]));
                }
            }
        }
        Partition::new(blocks, &self.worlds, "equivalence classes").expect("classes tile")
    }
}

/// Named violations of the STIT model conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StitViolation {
    /// An agent's choice partition does not refine the empty-coalition
    /// partition: the block containing `world` straddles two blocks.
    NotRefinement { agent: AgentId, world: World },
    /// Independence of agents fails inside an empty-coalition block: picking
    /// the listed choice blocks (one per agent, identified by a member world)
    /// leaves an empty intersection.
    IndependenceFailure { witness: Vec<(AgentId, World)> },
}

impl fmt::Display for StitViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StitViolation::NotRefinement { agent, world } => write!(
                f,
                "choice partition of agent {agent} does not refine the empty-coalition \
                 partition (see the block containing world '{world}')"
            ),
            StitViolation::IndependenceFailure { witness } => {
                write!(f, "independence of agents fails: selecting")?;
                for (agent, world) in witness {
                    write!(f, " [agent {agent}: block of '{world}']")?;
                }
                write!(f, " leaves no common world")
            }
        }
    }
}

/// Worlds, the empty-coalition partition, one choice partition per agent
/// (agents `1..=n_agents`), and a valuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StitModel {
    worlds: Vec<World>,
    n_agents: u32,
    r_empty: Partition,
    r_agent: BTreeMap<AgentId, Partition>,
    valuation: BTreeMap<Atom, BTreeSet<World>>,
}

impl StitModel {
    /// Builds a model from raw block lists, checking structural
    /// well-formedness only; run [`StitModel::validate`] for the semantic
    /// side conditions.
    pub fn new(
        worlds: Vec<World>,
        n_agents: u32,
        r_empty: Vec<BTreeSet<World>>,
        r_agent: BTreeMap<AgentId, Vec<BTreeSet<World>>>,
        valuation: BTreeMap<Atom, BTreeSet<World>>,
    ) -> Result<StitModel, ModelError> {
        check_worlds(&worlds)?;
        if n_agents == 0 {
            return Err(ModelError::NoAgents);
        }
        check_valuation(&valuation, &worlds)?;
        let r_empty = Partition::new(r_empty, &worlds, "empty-coalition partition")?;
        for agent in r_agent.keys() {
            if agent.get() == 0 || agent.get() > n_agents {
                return Err(ModelError::AgentsMismatch { expected: n_agents, found: agent.get() });
            }
        }
        let mut partitions = BTreeMap::new();
        for id in 1..=n_agents {
            let agent = AgentId(id);
            let blocks = r_agent
                .get(&agent)
                .cloned()
                .ok_or(ModelError::MissingAgent(id))?;
            let part = Partition::new(blocks, &worlds, &format!("partition of agent {id}"))?;
            partitions.insert(agent, part);
        }
        Ok(StitModel { worlds, n_agents, r_empty, r_agent: partitions, valuation })
    }

    /// Worlds in declaration order.
    pub fn worlds(&self) -> &[World] {
        &self.worlds
    }

    /// True when `w` is a world of the model.
    pub fn has_world(&self, w: &World) -> bool {
        self.worlds.contains(w)
    }

    /// Number of agents.
    pub fn n_agents(&self) -> u32 {
        self.n_agents
    }

    /// The empty-coalition partition.
    pub fn r_empty(&self) -> &Partition {
        &self.r_empty
    }

    /// The choice partition of `agent`.
    pub fn r_agent(&self, agent: AgentId) -> Option<&Partition> {
        self.r_agent.get(&agent)
    }

    /// The valuation map.
    pub fn valuation(&self) -> &BTreeMap<Atom, BTreeSet<World>> {
        &self.valuation
    }

    /// Atoms mentioned by the valuation.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.valuation.keys().cloned().collect()
    }

    /// Truth of `atom` at `w`; absent atoms are false.
    pub fn truth(&self, atom: &Atom, w: &World) -> bool {
        self.valuation.get(atom).is_some_and(|s| s.contains(w))
    }

    /// Checks the semantic side conditions: every agent partition refines the
    /// empty-coalition partition, and agents are independent (any choice per
    /// agent inside an empty-coalition block intersects). Returns all
    /// violations found, empty when the model is a proper STIT model.
    pub fn validate(&self) -> Vec<StitViolation> {
        let mut out = Vec::new();
        for (agent, part) in &self.r_agent {
            for block in part.blocks() {
                let mut members = block.iter();
                let first = members.next().expect("blocks are nonempty");
                let target = self.r_empty.block_of(first).expect("partition covers");
                if !block.iter().all(|w| target.contains(w)) {
                    out.push(StitViolation::NotRefinement {
                        agent: *agent,
                        world: first.clone(),
                    });
                }
            }
        }
        // Independence: inside each empty-coalition block, every selection of
        // one choice block per agent must share a world. Choice blocks are
        // "the block of some member of B", so this is meaningful even when
        // refinement fails.
        for b in self.r_empty.blocks() {
            let per_agent: Vec<(AgentId, Vec<&BTreeSet<World>>)> = self
                .r_agent
                .iter()
                .map(|(agent, part)| {
                    let mut blocks: Vec<&BTreeSet<World>> = Vec::new();
                    for w in b {
                        let block = part.block_of(w).expect("partition covers");
                        if !blocks.iter().any(|x| std::ptr::eq(*x, block)) {
                            blocks.push(block);
                        }
                    }
                    (*agent, blocks)
                })
                .collect();
            let mut selection = vec![0usize; per_agent.len()];
            'outer: loop {
                let mut intersection: Option<BTreeSet<&World>> = None;
                for (i, (_, blocks)) in per_agent.iter().enumerate() {
                    let chosen: BTreeSet<&World> = blocks[selection[i]].iter().collect();
                    intersection = Some(match intersection {
                        None => chosen,
                        Some(acc) => acc.intersection(&chosen).copied().collect(),
                    });
                    if intersection.as_ref().is_some_and(BTreeSet::is_empty) {
                        break;
                    }
                }
                if intersection.is_some_and(|i| i.is_empty()) {
                    let witness = per_agent
                        .iter()
                        .zip(&selection)
                        .map(|((agent, blocks), &i)| {
                            let first = blocks[i].iter().next().expect("nonempty");
                            (*agent, first.clone())
                        })
                        .collect();
                    out.push(StitViolation::IndependenceFailure { witness });
                }
                for i in (0..selection.len()).rev() {
                    selection[i] += 1;
                    if selection[i] < per_agent[i].1.len() {
                        continue 'outer;
                    }
                    selection[i] = 0;
                }
                break;
            }
        }
        out
    }

    /// The partition for coalition `J`: the empty-coalition partition when
    /// `J` is empty, otherwise the common refinement of the members' choice
    /// partitions. Agents outside `1..=n_agents` yield an error.
    pub fn coalition_relation(
        &self,
        coalition: &BTreeSet<AgentId>,
    ) -> Result<Partition, ModelError> {
        if coalition.is_empty() {
            return Ok(self.r_empty.clone());
        }
        let mut parts: Vec<&Partition> = Vec::new();
        for agent in coalition {
            let part = self
                .r_agent
                .get(agent)
                .ok_or(ModelError::AgentsMismatch { expected: self.n_agents, found: agent.get() })?;
            parts.push(part);
        }
        Ok(Partition::common_refinement(&parts, &self.worlds))
    }
}

/// Named violations of the CL-PC control conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClpcViolation {
    /// Two agents both control `atom`.
    OverlappingControl { atom: Atom, first: AgentId, second: AgentId },
    /// A true atom lies outside every control cell.
    TrueAtomOutsideUniverse { atom: Atom },
}

impl fmt::Display for ClpcViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClpcViolation::OverlappingControl { atom, first, second } => write!(
                f,
                "atom '{atom}' is controlled by both agent {first} and agent {second}"
            ),
            ClpcViolation::TrueAtomOutsideUniverse { atom } => write!(
                f,
                "true atom '{atom}' lies outside every control cell"
            ),
        }
    }
}

/// Control cells (one per agent, `1..=n_agents`) and the set of true atoms.
/// The atom universe is the union of the cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClpcModel {
    n_agents: u32,
    control: BTreeMap<AgentId, BTreeSet<Atom>>,
    true_atoms: BTreeSet<Atom>,
}

impl ClpcModel {
    /// Builds a model, checking agent numbering only; run
    /// [`ClpcModel::validate`] for exclusivity and the true-atom condition.
    pub fn new(
        n_agents: u32,
        control: BTreeMap<AgentId, BTreeSet<Atom>>,
        true_atoms: BTreeSet<Atom>,
    ) -> Result<ClpcModel, ModelError> {
        if n_agents == 0 {
            return Err(ModelError::NoAgents);
        }
        for agent in control.keys() {
            if agent.get() == 0 || agent.get() > n_agents {
                return Err(ModelError::AgentsMismatch { expected: n_agents, found: agent.get() });
            }
        }
        let mut cells = BTreeMap::new();
        for id in 1..=n_agents {
            let agent = AgentId(id);
            let cell = control.get(&agent).cloned().ok_or(ModelError::MissingAgent(id))?;
            cells.insert(agent, cell);
        }
        Ok(ClpcModel { n_agents, control: cells, true_atoms })
    }

    /// Number of agents.
    pub fn n_agents(&self) -> u32 {
        self.n_agents
    }

    /// The control cell of `agent`.
    pub fn control(&self, agent: AgentId) -> Option<&BTreeSet<Atom>> {
        self.control.get(&agent)
    }

    /// All control cells.
    pub fn control_map(&self) -> &BTreeMap<AgentId, BTreeSet<Atom>> {
        &self.control
    }

    /// Atoms controlled by any member of `coalition`.
    pub fn coalition_control(&self, coalition: &BTreeSet<AgentId>) -> BTreeSet<Atom> {
        coalition
            .iter()
            .filter_map(|a| self.control.get(a))
            .flatten()
            .cloned()
            .collect()
    }

    /// The atom universe: the union of all control cells.
    pub fn universe(&self) -> BTreeSet<Atom> {
        self.control.values().flatten().cloned().collect()
    }

    /// The currently true atoms.
    pub fn true_atoms(&self) -> &BTreeSet<Atom> {
        &self.true_atoms
    }

    /// Truth of `atom` in the current state.
    pub fn truth(&self, atom: &Atom) -> bool {
        self.true_atoms.contains(atom)
    }

    /// Checks exclusive control (cells pairwise disjoint) and that every true
    /// atom belongs to the universe. Completeness holds by construction since
    /// the universe is defined as the union of the cells.
    pub fn validate(&self) -> Vec<ClpcViolation> {
        let mut out = Vec::new();
        let mut owner: BTreeMap<&Atom, AgentId> = BTreeMap::new();
        for (agent, cell) in &self.control {
            for atom in cell {
                match owner.get(atom) {
                    Some(&first) => out.push(ClpcViolation::OverlappingControl {
                        atom: atom.clone(),
                        first,
                        second: *agent,
                    }),
                    None => {
                        owner.insert(atom, *agent);
                    }
                }
            }
        }
        let universe = self.universe();
        for atom in &self.true_atoms {
            if !universe.contains(atom) {
                out.push(ClpcViolation::TrueAtomOutsideUniverse { atom: atom.clone() });
            }
        }
        out
    }

    /// The model with agent `j`'s owned atoms reset to `new_atoms` (which
    /// must lie inside `j`'s control cell); everything else is untouched.
    pub fn update(&self, j: AgentId, new_atoms: &BTreeSet<Atom>) -> Result<ClpcModel, ModelError> {
        let cell = self
            .control
            .get(&j)
            .ok_or(ModelError::AgentsMismatch { expected: self.n_agents, found: j.get() })?;
        if let Some(outside) = new_atoms.iter().find(|a| !cell.contains(*a)) {
            return Err(ModelError::DuplicateAtom {
                atom: outside.name().to_string(),
                context: format!("update of agent {j}: atom not in its control cell"),
            });
        }
        let mut true_atoms: BTreeSet<Atom> =
            self.true_atoms.difference(cell).cloned().collect();
        true_atoms.extend(new_atoms.iter().cloned());
        Ok(ClpcModel { n_agents: self.n_agents, control: self.control.clone(), true_atoms })
    }

    /// The model with the coalition's owned atoms reset to `new_atoms`
    /// (which must lie inside the coalition's joint control).
    pub fn update_coalition(
        &self,
        coalition: &BTreeSet<AgentId>,
        new_atoms: &BTreeSet<Atom>,
    ) -> Result<ClpcModel, ModelError> {
        let joint = self.coalition_control(coalition);
        if let Some(outside) = new_atoms.iter().find(|a| !joint.contains(*a)) {
            return Err(ModelError::DuplicateAtom {
                atom: outside.name().to_string(),
                context: "coalition update: atom not under the coalition's control".to_string(),
            });
        }
        let mut true_atoms: BTreeSet<Atom> =
            self.true_atoms.difference(&joint).cloned().collect();
        true_atoms.extend(new_atoms.iter().cloned());
        Ok(ClpcModel { n_agents: self.n_agents, control: self.control.clone(), true_atoms })
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    pub fn w(name: &str) -> World {
        World::new(name).unwrap()
    }

    pub fn worlds(names: &[&str]) -> Vec<World> {
        names.iter().map(|n| w(n)).collect()
    }

    pub fn block(names: &[&str]) -> BTreeSet<World> {
        names.iter().map(|n| w(n)).collect()
    }

    pub fn at(name: &str) -> Atom {
        Atom::new(name).unwrap()
    }

    /// The seven-world two-agent running example: agent 1 chooses among
    /// {w,u,v}, {r,s}, {t,z}; agent 2 among {w,r,t}, {u,v,s,z}; one
    /// empty-coalition block; `p` false everywhere.
    pub fn two_agent_grid() -> StitModel {
        let ws = worlds(&["w", "u", "v", "r", "s", "t", "z"]);
        let r_empty = vec![block(&["w", "u", "v", "r", "s", "t", "z"])];
        let mut r_agent = BTreeMap::new();
        r_agent.insert(
            AgentId(1),
            vec![block(&["w", "u", "v"]), block(&["r", "s"]), block(&["t", "z"])],
        );
        r_agent.insert(AgentId(2), vec![block(&["w", "r", "t"]), block(&["u", "v", "s", "z"])]);
        let mut valuation = BTreeMap::new();
        valuation.insert(at("p"), BTreeSet::new());
        StitModel::new(ws, 2, r_empty, r_agent, valuation).unwrap()
    }

    /// Three agents each controlling one atom (`p`, `q`, `r`), with only `r`
    /// true.
    pub fn three_agent_control() -> ClpcModel {
        let mut control = BTreeMap::new();
        control.insert(AgentId(1), BTreeSet::from([at("p")]));
        control.insert(AgentId(2), BTreeSet::from([at("q")]));
        control.insert(AgentId(3), BTreeSet::from([at("r")]));
        ClpcModel::new(3, control, BTreeSet::from([at("r")])).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    #[test]
    fn partition_structural_validation() {
        let ws = worlds(&["a", "b", "c"]);
        assert!(Partition::new(vec![block(&["a", "b"]), block(&["c"])], &ws, "t").is_ok());
        // Overlap.
        let e = Partition::new(vec![block(&["a", "b"]), block(&["b", "c"])], &ws, "t")
            .unwrap_err();
        assert!(matches!(e, ModelError::OverlappingBlocks { .. }));
        // Gap.
        let e = Partition::new(vec![block(&["a"])], &ws, "t").unwrap_err();
        assert!(matches!(e, ModelError::UncoveredWorld { .. }));
        // Foreign world.
        let e = Partition::new(vec![block(&["a", "b", "c", "d"])], &ws, "t").unwrap_err();
        assert!(matches!(e, ModelError::UnknownWorld { .. }));
        // Empty block.
        let e = Partition::new(vec![block(&["a", "b", "c"]), BTreeSet::new()], &ws, "t")
            .unwrap_err();
        assert!(matches!(e, ModelError::EmptyBlock { .. }));
    }

    #[test]
    fn partition_equality_ignores_block_order() {
        let ws = worlds(&["a", "b"]);
        let p1 = Partition::new(vec![block(&["a"]), block(&["b"])], &ws, "t").unwrap();
        let p2 = Partition::new(vec![block(&["b"]), block(&["a"])], &ws, "t").unwrap();
        assert_eq!(p1, p2);
        let p3 = Partition::single_block(&ws);
        assert_ne!(p1, p3);
    }

    #[test]
    fn first_seen_order_follows_world_list() {
        let ws = worlds(&["w", "u", "v", "r", "s", "t", "z"]);
        let part = Partition::new(
            vec![block(&["t", "z"]), block(&["w", "u", "v"]), block(&["r", "s"])],
            &ws,
            "t",
        )
        .unwrap();
        let order = part.blocks_in_first_seen_order(&ws);
        assert_eq!(order[0], &block(&["w", "u", "v"]));
        assert_eq!(order[1], &block(&["r", "s"]));
        assert_eq!(order[2], &block(&["t", "z"]));
    }

    #[test]
    fn equiv_mod_x_agreement() {
        let ws = worlds(&["a", "b", "c"]);
        let mut valuation = BTreeMap::new();
        valuation.insert(at("p"), block(&["a", "b"]));
        valuation.insert(at("q"), block(&["a"]));
        let m = PecpModel::new(ws, valuation).unwrap();
        let x = BTreeSet::from([at("p")]);
        assert!(m.equiv_mod_x(&x, &w("a"), &w("b")).unwrap());
        assert!(!m.equiv_mod_x(&x, &w("a"), &w("c")).unwrap());
        // Empty signature relates everything.
        assert!(m.equiv_mod_x(&BTreeSet::new(), &w("a"), &w("c")).unwrap());
        // Unknown world is an error.
        assert!(m.equiv_mod_x(&x, &w("a"), &w("nope")).is_err());
        // Absent atom is false everywhere, so it never separates worlds.
        let y = BTreeSet::from([at("absent")]);
        assert!(m.equiv_mod_x(&y, &w("a"), &w("c")).unwrap());
    }

    #[test]
    fn classes_mod_x_partition() {
        let ws = worlds(&["a", "b", "c", "d"]);
        let mut valuation = BTreeMap::new();
        valuation.insert(at("p"), block(&["a", "b"]));
        valuation.insert(at("q"), block(&["a", "c"]));
        let m = PecpModel::new(ws, valuation).unwrap();
        let classes = m.classes_mod_x(&BTreeSet::from([at("p"), at("q")]));
        assert_eq!(classes.blocks().len(), 4);
        let pq = m.classes_mod_x(&BTreeSet::from([at("p")]));
        assert_eq!(pq.blocks().len(), 2);
        assert!(pq.same_block(&w("a"), &w("b")));
    }

    #[test]
    fn running_example_is_valid_and_coalitions_refine() {
        let m = two_agent_grid();
        assert!(m.validate().is_empty());
        // Choice of the grand coalition at u is {u,v}.
        let both = BTreeSet::from([AgentId(1), AgentId(2)]);
        let part = m.coalition_relation(&both).unwrap();
        assert_eq!(part.block_of(&w("u")).unwrap(), &block(&["u", "v"]));
        // Choice of agent 1 alone at u is {w,u,v}.
        let one = BTreeSet::from([AgentId(1)]);
        let part1 = m.coalition_relation(&one).unwrap();
        assert_eq!(part1.block_of(&w("u")).unwrap(), &block(&["w", "u", "v"]));
        // The empty coalition yields the empty-coalition partition.
        let part0 = m.coalition_relation(&BTreeSet::new()).unwrap();
        assert_eq!(part0.blocks().len(), 1);
        // Unknown agent.
        assert!(m.coalition_relation(&BTreeSet::from([AgentId(3)])).is_err());
    }

    #[test]
    fn grand_coalition_blocks_of_running_example() {
        // All six intersections of agent choices are nonempty.
        let m = two_agent_grid();
        let both = BTreeSet::from([AgentId(1), AgentId(2)]);
        let part = m.coalition_relation(&both).unwrap();
        let expect: Vec<BTreeSet<World>> = [
            &["w"][..], &["u", "v"], &["r"], &["s"], &["t"], &["z"],
        ]
        .iter()
        .map(|names| names.iter().map(|n| w(n)).collect())
        .collect();
        assert_eq!(part.blocks().len(), 6);
        for b in expect {
            assert!(part.blocks().contains(&b), "missing block {b:?}");
        }
    }

    #[test]
    fn refinement_violation_is_reported() {
        // Agent block {a,b} straddles the two empty-coalition blocks.
        let ws = worlds(&["a", "b"]);
        let r_empty = vec![block(&["a"]), block(&["b"])];
        let mut r_agent = BTreeMap::new();
        r_agent.insert(AgentId(1), vec![block(&["a", "b"])]);
        let m = StitModel::new(ws, 1, r_empty, r_agent, BTreeMap::new()).unwrap();
        let violations = m.validate();
        assert!(violations
            .iter()
            .any(|v| matches!(v, StitViolation::NotRefinement { agent: AgentId(1), .. })));
    }

    #[test]
    fn independence_violation_is_reported() {
        // Two agents each split {a,b} into singletons: choosing {a} for agent
        // 1 and {b} for agent 2 has empty intersection.
        let ws = worlds(&["a", "b"]);
        let r_empty = vec![block(&["a", "b"])];
        let mut r_agent = BTreeMap::new();
        r_agent.insert(AgentId(1), vec![block(&["a"]), block(&["b"])]);
        r_agent.insert(AgentId(2), vec![block(&["a"]), block(&["b"])]);
        let m = StitModel::new(ws, 2, r_empty, r_agent, BTreeMap::new()).unwrap();
        let violations = m.validate();
        assert!(violations
            .iter()
            .any(|v| matches!(v, StitViolation::IndependenceFailure { .. })));
    }

    #[test]
    fn structural_errors_on_construction() {
        let ws = worlds(&["a"]);
        // Missing agent partition.
        let e = StitModel::new(
            ws.clone(),
            2,
            vec![block(&["a"])],
            BTreeMap::from([(AgentId(1), vec![block(&["a"])])]),
            BTreeMap::new(),
        )
        .unwrap_err();
        assert!(matches!(e, ModelError::MissingAgent(2)));
        // Agent id out of range.
        let e = StitModel::new(
            ws.clone(),
            1,
            vec![block(&["a"])],
            BTreeMap::from([
                (AgentId(1), vec![block(&["a"])]),
                (AgentId(2), vec![block(&["a"])]),
            ]),
            BTreeMap::new(),
        )
        .unwrap_err();
        assert!(matches!(e, ModelError::AgentsMismatch { .. }));
        // Duplicate world.
        let e = PecpModel::new(worlds(&["a", "a"]), BTreeMap::new()).unwrap_err();
        assert!(matches!(e, ModelError::DuplicateWorld(_)));
        // No worlds.
        let e = PecpModel::new(vec![], BTreeMap::new()).unwrap_err();
        assert!(matches!(e, ModelError::NoWorlds));
    }

    #[test]
    fn clpc_example_and_updates() {
        let m = three_agent_control();
        assert!(m.validate().is_empty());
        assert_eq!(m.universe().len(), 3);
        assert!(m.truth(&at("r")));
        assert!(!m.truth(&at("p")));
        // Agent 1 sets p true: true atoms become {p, r}.
        let updated = m.update(AgentId(1), &BTreeSet::from([at("p")])).unwrap();
        assert_eq!(updated.true_atoms(), &BTreeSet::from([at("p"), at("r")]));
        // Setting someone else's atom fails.
        assert!(m.update(AgentId(1), &BTreeSet::from([at("q")])).is_err());
        // Coalition {1,2} resets its atoms to {q}: r stays true.
        let coalition = BTreeSet::from([AgentId(1), AgentId(2)]);
        let moved = m.update_coalition(&coalition, &BTreeSet::from([at("q")])).unwrap();
        assert_eq!(moved.true_atoms(), &BTreeSet::from([at("q"), at("r")]));
        // The empty coalition can only perform the empty update.
        let noop = m.update_coalition(&BTreeSet::new(), &BTreeSet::new()).unwrap();
        assert_eq!(&noop, &m);
        assert!(m.update_coalition(&BTreeSet::new(), &BTreeSet::from([at("p")])).is_err());
    }

    #[test]
    fn clpc_violations_are_reported() {
        let mut control = BTreeMap::new();
        control.insert(AgentId(1), BTreeSet::from([at("p"), at("q")]));
        control.insert(AgentId(2), BTreeSet::from([at("q")]));
        let m = ClpcModel::new(2, control, BTreeSet::from([at("x")])).unwrap();
        let violations = m.validate();
        assert!(violations
            .iter()
            .any(|v| matches!(v, ClpcViolation::OverlappingControl { .. })));
        assert!(violations
            .iter()
            .any(|v| matches!(v, ClpcViolation::TrueAtomOutsideUniverse { .. })));
    }
}
