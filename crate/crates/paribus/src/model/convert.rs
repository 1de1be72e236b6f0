//! Conversions between the three model kinds.
//!
//! * STIT → equivalence-based: each agent with exactly `2^m` choice blocks
//!   gets `m` action-digit atoms `rep_j_1..rep_j_m`; the block at 1-based
//!   position `t` (blocks ordered by first member in the world list) encodes
//!   the number `t - 1`, digit `d` carrying bit `d - 1`. [`pad_choices`]
//!   brings an arbitrary model to the required power-of-two block counts
//!   without disturbing truth at the original worlds.
//! * equivalence-based → STIT: agent `j`'s choice partition is read back off
//!   the classes of `~{rep_j_1..rep_j_m}`.
//! * CL-PC → STIT: one world per assignment to the atom universe; each agent
//!   chooses the value of exactly its own cell.
//! * STIT → CL-PC: an agent controls the atoms that are constant on each of
//!   its choice blocks; every atom must be controlled by someone.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::atom::{AgentId, Atom};

use super::{ClpcModel, ModelError, PecpModel, StitModel, World};

/// Errors raised by model conversions.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConvertError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(
        "the empty-coalition partition has {0} blocks; restrict the model to a \
         single block before converting"
    )]
    MultipleEmptyBlocks(usize),
    #[error(
        "agent {agent} has {blocks} choice blocks but {digits} digits only \
         encode {capacity}; increase the digit count"
    )]
    TooManyChoices { agent: AgentId, blocks: usize, digits: u32, capacity: usize },
    #[error(
        "agent {agent} has {blocks} choice blocks, not the {expected} required \
         by {digits} digits; pad the model first"
    )]
    ChoiceCountMismatch { agent: AgentId, blocks: usize, expected: usize, digits: u32 },
    #[error("digit count {0} is too large (limit 16)")]
    TooManyDigits(u32),
    #[error(
        "the model valuation uses the reserved atom '{0}'; reserved prefixes \
         rep_ and aux_ cannot appear in conversion inputs"
    )]
    ReservedAtom(Atom),
    #[error("atom '{0}' is not controlled by any single agent")]
    NoControllingAgent(Atom),
    #[error("the source model violates its own side conditions: {0}")]
    InvalidSource(String),
    #[error("unknown world '{0}'")]
    UnknownWorld(String),
}

/// Most digits a conversion will mint action atoms for (2^16 choice blocks).
pub const MAX_DIGITS: u32 = 16;

fn block_capacity(m_digits: u32) -> Result<usize, ConvertError> {
    if m_digits > MAX_DIGITS {
        return Err(ConvertError::TooManyDigits(m_digits));
    }
    Ok(1usize << m_digits)
}

/// Smallest digit count whose capacity covers every agent's block count
/// (zero when every agent has a single block).
pub fn digits_needed(m: &StitModel) -> u32 {
    let mut digits = 0u32;
    for id in 1..=m.n_agents() {
        let blocks = m.r_agent(AgentId(id)).expect("agents 1..=n").blocks().len();
        while (1usize << digits) < blocks {
            digits += 1;
        }
    }
    digits
}

fn require_single_moment(m: &StitModel) -> Result<(), ConvertError> {
    let blocks = m.r_empty().blocks().len();
    if blocks != 1 {
        return Err(ConvertError::MultipleEmptyBlocks(blocks));
    }
    Ok(())
}

fn require_unreserved_valuation(
    valuation: &BTreeMap<Atom, BTreeSet<World>>,
) -> Result<(), ConvertError> {
    match valuation.keys().find(|a| a.is_reserved()) {
        Some(a) => Err(ConvertError::ReservedAtom(a.clone())),
        None => Ok(()),
    }
}

/// First free name of the form `{base}_p{k}`, `k = 1, 2, ...`.
fn fresh_world_name(base: &str, used: &BTreeSet<String>) -> String {
    for k in 1usize.. {
        let candidate = format!("{base}_p{k}");
        if !used.contains(&candidate) {
            return candidate;
        }
    }
    unreachable!("some suffix is free")
}

/// Pads every agent's choice partition to exactly `2^m_digits` blocks by
/// appending copies of the agent's first block (fresh worlds duplicating a
/// source world's valuation and its membership in every other partition).
/// Truth of any formula at the original worlds is unchanged, and a model
/// satisfying the refinement and independence conditions keeps satisfying
/// them. Requires a single empty-coalition block.
pub fn pad_choices(m: &StitModel, m_digits: u32) -> Result<StitModel, ConvertError> {
    require_single_moment(m)?;
    let target = block_capacity(m_digits)?;
    for id in 1..=m.n_agents() {
        let agent = AgentId(id);
        let blocks = m.r_agent(agent).expect("agents 1..=n").blocks().len();
        if blocks > target {
            return Err(ConvertError::TooManyChoices {
                agent,
                blocks,
                digits: m_digits,
                capacity: target,
            });
        }
    }

    let mut worlds: Vec<World> = m.worlds().to_vec();
    let mut used: BTreeSet<String> = worlds.iter().map(|w| w.name().to_string()).collect();
    let mut valuation: BTreeMap<Atom, BTreeSet<World>> = m.valuation().clone();
    // Per-agent block lists in first-seen order; padding appends to them.
    let mut agent_blocks: BTreeMap<AgentId, Vec<BTreeSet<World>>> = (1..=m.n_agents())
        .map(|id| {
            let agent = AgentId(id);
            let part = m.r_agent(agent).expect("agents 1..=n");
            let blocks = part
                .blocks_in_first_seen_order(m.worlds())
                .into_iter()
                .cloned()
                .collect();
            (agent, blocks)
        })
        .collect();

    for id in 1..=m.n_agents() {
        let agent = AgentId(id);
        while agent_blocks[&agent].len() < target {
            let source = agent_blocks[&agent][0].clone();
            let mut copy_block = BTreeSet::new();
            for w in &source {
                let name = fresh_world_name(w.name(), &used);
                used.insert(name.clone());
                let copy = World::new(&name).expect("fresh names are nonempty");
                worlds.push(copy.clone());
                copy_block.insert(copy.clone());
                // The copy mirrors its source everywhere except agent `id`'s
                // partition: same valuation, same block of every other agent.
                for set in valuation.values_mut() {
                    if set.contains(w) {
                        set.insert(copy.clone());
                    }
                }
                for (other, blocks) in agent_blocks.iter_mut() {
                    if *other == agent {
                        continue;
                    }
                    let home = blocks
                        .iter_mut()
                        .find(|b| b.contains(w))
                        .expect("partition covers");
                    home.insert(copy.clone());
                }
            }
            agent_blocks.get_mut(&agent).expect("present").push(copy_block);
        }
    }

    let r_empty = vec![worlds.iter().cloned().collect()];
    let r_agent = agent_blocks;
    StitModel::new(worlds, m.n_agents(), r_empty, r_agent, valuation).map_err(ConvertError::from)
}

/// Encodes a STIT model (single empty-coalition block, every agent with
/// exactly `2^m_digits` choice blocks) as an equivalence-based model: the
/// original valuation plus action-digit atoms `rep_j_d`, true at a world
/// exactly when bit `d - 1` of the world's block number for agent `j` is
/// set. Blocks are numbered from zero by first member in the world list.
pub fn stit_to_pecp_model(m: &StitModel, m_digits: u32) -> Result<PecpModel, ConvertError> {
    require_single_moment(m)?;
    require_unreserved_valuation(m.valuation())?;
    let target = block_capacity(m_digits)?;
    let mut valuation = m.valuation().clone();
    for id in 1..=m.n_agents() {
        let agent = AgentId(id);
        let part = m.r_agent(agent).expect("agents 1..=n");
        let blocks = part.blocks_in_first_seen_order(m.worlds());
        if blocks.len() != target {
            return Err(ConvertError::ChoiceCountMismatch {
                agent,
                blocks: blocks.len(),
                expected: target,
                digits: m_digits,
            });
        }
        let mut digit_sets: Vec<BTreeSet<World>> =
            (0..m_digits).map(|_| BTreeSet::new()).collect();
        for (t, block) in blocks.iter().enumerate() {
            for d in 0..m_digits {
                if t >> d & 1 == 1 {
                    digit_sets[d as usize].extend(block.iter().cloned());
                }
            }
        }
        for (d, set) in digit_sets.into_iter().enumerate() {
            valuation.insert(Atom::rep(agent, d + 1), set);
        }
    }
    PecpModel::new(m.worlds().to_vec(), valuation).map_err(ConvertError::from)
}

/// Reads a STIT model back off an equivalence-based model: one
/// empty-coalition block, agent `j`'s choices the classes of
/// `~{rep_j_1..rep_j_m}`. The full valuation (digit atoms included) is kept.
pub fn pecp_to_stit_model(
    m: &PecpModel,
    n_agents: u32,
    m_digits: u32,
) -> Result<StitModel, ConvertError> {
    if n_agents == 0 {
        return Err(ConvertError::Model(ModelError::NoAgents));
    }
    block_capacity(m_digits)?;
    let mut r_agent = BTreeMap::new();
    for id in 1..=n_agents {
        let agent = AgentId(id);
        let digits: BTreeSet<Atom> =
            (1..=m_digits as usize).map(|d| Atom::rep(agent, d)).collect();
        let classes = m.classes_mod_x(&digits);
        let blocks = classes
            .blocks_in_first_seen_order(m.worlds())
            .into_iter()
            .cloned()
            .collect();
        r_agent.insert(agent, blocks);
    }
    let r_empty = vec![m.worlds().iter().cloned().collect()];
    StitModel::new(m.worlds().to_vec(), n_agents, r_empty, r_agent, m.valuation().clone())
        .map_err(ConvertError::from)
}

fn assignment_world_name(assignment: &BTreeSet<Atom>) -> String {
    let names: Vec<&str> = assignment.iter().map(Atom::name).collect();
    format!("{{{}}}", names.join(","))
}

/// Expands a CL-PC model into its canonical STIT model: one world per
/// assignment to the atom universe (named by its true set, `{p,q}`-style),
/// one empty-coalition block, and each agent choosing exactly the value of
/// its own control cell. Returns the model together with the world matching
/// the CL-PC model's current true atoms.
pub fn clpc_to_stit_model(m: &ClpcModel) -> Result<(StitModel, World), ConvertError> {
    if let Some(v) = m.validate().first() {
        return Err(ConvertError::InvalidSource(v.to_string()));
    }
    if let Some(a) = m.universe().iter().find(|a| a.is_reserved()) {
        return Err(ConvertError::ReservedAtom(a.clone()));
    }
    let universe: Vec<Atom> = m.universe().into_iter().collect();
    if universe.len() > MAX_DIGITS as usize {
        return Err(ConvertError::TooManyDigits(universe.len() as u32));
    }
    // Worlds in descending-subset order of the true set's bitmask so that the
    // all-true assignment comes first; any fixed order would do.
    let count = 1usize << universe.len();
    let mut worlds = Vec::with_capacity(count);
    let mut truth: Vec<BTreeSet<Atom>> = Vec::with_capacity(count);
    for mask in (0..count).rev() {
        let assignment: BTreeSet<Atom> = universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, a)| a.clone())
            .collect();
        worlds.push(World::new(&assignment_world_name(&assignment)).expect("nonempty"));
        truth.push(assignment);
    }
    let mut valuation: BTreeMap<Atom, BTreeSet<World>> = BTreeMap::new();
    for atom in &universe {
        let set = worlds
            .iter()
            .zip(&truth)
            .filter(|(_, t)| t.contains(atom))
            .map(|(w, _)| w.clone())
            .collect();
        valuation.insert(atom.clone(), set);
    }
    let r_empty = vec![worlds.iter().cloned().collect::<BTreeSet<World>>()];
    let mut r_agent = BTreeMap::new();
    for id in 1..=m.n_agents() {
        let agent = AgentId(id);
        let cell = m.control(agent).expect("agents 1..=n");
        // Worlds agreeing on the cell share a block.
        let mut blocks: Vec<BTreeSet<World>> = Vec::new();
        let mut key_to_block: BTreeMap<BTreeSet<Atom>, usize> = BTreeMap::new();
        for (w, t) in worlds.iter().zip(&truth) {
            let key: BTreeSet<Atom> = t.intersection(cell).cloned().collect();
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
        r_agent.insert(agent, blocks);
    }
    let current: BTreeSet<Atom> = m.true_atoms().clone();
    let designated = World::new(&assignment_world_name(&current)).expect("nonempty");
    let model = StitModel::new(worlds, m.n_agents(), r_empty, r_agent, valuation)?;
    Ok((model, designated))
}

/// Extracts a CL-PC model from a STIT model at a designated world: agent `j`
/// controls the (unreserved) atoms constant on each of `j`'s choice blocks
/// (ties go to the lowest-numbered agent), and the true atoms are those
/// holding at `at`. Fails when some atom is controlled by no agent.
pub fn stit_to_clpc_model(m: &StitModel, at: &World) -> Result<ClpcModel, ConvertError> {
    if !m.has_world(at) {
        return Err(ConvertError::UnknownWorld(at.name().to_string()));
    }
    let content: Vec<&Atom> = m.valuation().keys().filter(|a| !a.is_reserved()).collect();
    let mut control: BTreeMap<AgentId, BTreeSet<Atom>> =
        (1..=m.n_agents()).map(|id| (AgentId(id), BTreeSet::new())).collect();
    for atom in &content {
        let owner = (1..=m.n_agents()).map(AgentId).find(|&agent| {
            let part = m.r_agent(agent).expect("agents 1..=n");
            part.blocks().iter().all(|block| {
                let mut values = block.iter().map(|w| m.truth(atom, w));
                let first = values.next().expect("blocks are nonempty");
                values.all(|v| v == first)
            })
        });
        match owner {
            Some(agent) => {
                control.get_mut(&agent).expect("present").insert((*atom).clone());
            }
            None => return Err(ConvertError::NoControllingAgent((*atom).clone())),
        }
    }
    let true_atoms = content
        .iter()
        .filter(|a| m.truth(a, at))
        .map(|a| (**a).clone())
        .collect();
    ClpcModel::new(m.n_agents(), control, true_atoms).map_err(ConvertError::from)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;

    #[test]
    fn digit_encoding_of_running_example() {
        let padded = pad_choices(&two_agent_grid(), 2).unwrap();
        assert!(padded.validate().is_empty());
        let pecp = stit_to_pecp_model(&padded, 2).unwrap();
        // Expected digit values at the seven original worlds: agent 1 blocks
        // {w,u,v} -> 0, {r,s} -> 1, {t,z} -> 2; agent 2 blocks
        // {w,r,t} -> 0, {u,v,s,z} -> 1.
        let expect = [
            ("w", [false, false], [false, false]),
            ("u", [false, false], [true, false]),
            ("v", [false, false], [true, false]),
            ("r", [true, false], [false, false]),
            ("s", [true, false], [true, false]),
            ("t", [false, true], [false, false]),
            ("z", [false, true], [true, false]),
        ];
        for (name, agent1, agent2) in expect {
            let world = w(name);
            for d in 0..2 {
                assert_eq!(
                    pecp.truth(&Atom::rep(AgentId(1), d + 1), &world),
                    agent1[d],
                    "rep_1_{} at {name}",
                    d + 1
                );
                assert_eq!(
                    pecp.truth(&Atom::rep(AgentId(2), d + 1), &world),
                    agent2[d],
                    "rep_2_{} at {name}",
                    d + 1
                );
            }
        }
    }

    #[test]
    fn padding_reaches_power_of_two_and_preserves_validity() {
        let m = two_agent_grid();
        assert_eq!(digits_needed(&m), 2);
        let padded = pad_choices(&m, 2).unwrap();
        assert!(padded.validate().is_empty());
        for id in [1, 2] {
            assert_eq!(padded.r_agent(AgentId(id)).unwrap().blocks().len(), 4);
        }
        // Original worlds survive with their original block mates.
        let part = padded.r_agent(AgentId(1)).unwrap();
        assert!(part.same_block(&w("r"), &w("s")));
        assert!(!part.same_block(&w("r"), &w("t")));
        // Padding with too few digits is refused.
        let e = pad_choices(&m, 1).unwrap_err();
        assert!(matches!(e, ConvertError::TooManyChoices { agent: AgentId(1), .. }));
    }

    #[test]
    fn conversion_requires_exact_block_count() {
        let m = two_agent_grid();
        let e = stit_to_pecp_model(&m, 2).unwrap_err();
        assert!(matches!(
            e,
            ConvertError::ChoiceCountMismatch { agent: AgentId(1), blocks: 3, expected: 4, .. }
        ));
    }

    #[test]
    fn round_trip_recovers_partitions() {
        let padded = pad_choices(&two_agent_grid(), 2).unwrap();
        let pecp = stit_to_pecp_model(&padded, 2).unwrap();
        let back = pecp_to_stit_model(&pecp, 2, 2).unwrap();
        assert!(back.validate().is_empty());
        assert_eq!(back.r_empty(), padded.r_empty());
        for id in [1, 2] {
            assert_eq!(
                back.r_agent(AgentId(id)).unwrap(),
                padded.r_agent(AgentId(id)).unwrap(),
                "partition of agent {id}"
            );
        }
        // Content atoms keep their extension.
        for world in padded.worlds() {
            assert_eq!(back.truth(&at("p"), world), padded.truth(&at("p"), world));
        }
    }

    #[test]
    fn multiple_empty_blocks_are_refused() {
        let ws = worlds(&["a", "b"]);
        let r_empty = vec![block(&["a"]), block(&["b"])];
        let r_agent = BTreeMap::from([(AgentId(1), vec![block(&["a"]), block(&["b"])])]);
        let m = StitModel::new(ws, 1, r_empty, r_agent, BTreeMap::new()).unwrap();
        assert!(matches!(
            pad_choices(&m, 1),
            Err(ConvertError::MultipleEmptyBlocks(2))
        ));
        assert!(matches!(
            stit_to_pecp_model(&m, 1),
            Err(ConvertError::MultipleEmptyBlocks(2))
        ));
    }

    #[test]
    fn reserved_atoms_in_input_are_refused() {
        let ws = worlds(&["a"]);
        let r_empty = vec![block(&["a"])];
        let r_agent = BTreeMap::from([(AgentId(1), vec![block(&["a"])])]);
        let valuation = BTreeMap::from([(at("rep_1_1"), block(&["a"]))]);
        let m = StitModel::new(ws, 1, r_empty, r_agent, valuation).unwrap();
        assert!(matches!(
            stit_to_pecp_model(&m, 0),
            Err(ConvertError::ReservedAtom(_))
        ));
    }

    #[test]
    fn clpc_expansion_and_extraction() {
        let m = three_agent_control();
        let (stit, designated) = clpc_to_stit_model(&m).unwrap();
        assert_eq!(stit.worlds().len(), 8);
        assert_eq!(designated.name(), "{r}");
        assert!(stit.has_world(&designated));
        assert!(stit.validate().is_empty());
        // Each agent has two choices (its one atom true or false).
        for id in [1, 2, 3] {
            assert_eq!(stit.r_agent(AgentId(id)).unwrap().blocks().len(), 2);
        }
        // The world of the all-true assignment exists and satisfies all atoms.
        let all = w("{p,q,r}");
        assert!(stit.truth(&at("p"), &all));
        assert!(stit.truth(&at("q"), &all));
        // Extraction inverts expansion.
        let back = stit_to_clpc_model(&stit, &designated).unwrap();
        assert_eq!(&back, &m);
    }

    #[test]
    fn extraction_requires_a_controller() {
        // Two worlds disagreeing on q inside both agents' single blocks:
        // nobody controls q.
        let ws = worlds(&["a", "b"]);
        let r_empty = vec![block(&["a", "b"])];
        let r_agent = BTreeMap::from([(AgentId(1), vec![block(&["a", "b"])])]);
        let valuation = BTreeMap::from([(at("q"), block(&["a"]))]);
        let m = StitModel::new(ws, 1, r_empty, r_agent, valuation).unwrap();
        assert!(matches!(
            stit_to_clpc_model(&m, &w("a")),
            Err(ConvertError::NoControllingAgent(_))
        ));
        assert!(matches!(
            stit_to_clpc_model(&m, &w("missing")),
            Err(ConvertError::UnknownWorld(_))
        ));
    }

    #[test]
    fn extraction_prefers_the_lowest_agent() {
        // q is constant on every block of both agents; agent 1 wins.
        let ws = worlds(&["a", "b"]);
        let r_empty = vec![block(&["a", "b"])];
        let r_agent = BTreeMap::from([
            (AgentId(1), vec![block(&["a", "b"])]),
            (AgentId(2), vec![block(&["a", "b"])]),
        ]);
        let valuation = BTreeMap::from([(at("q"), block(&["a", "b"]))]);
        let m = StitModel::new(ws, 2, r_empty, r_agent, valuation).unwrap();
        let clpc = stit_to_clpc_model(&m, &w("a")).unwrap();
        assert_eq!(clpc.control(AgentId(1)).unwrap(), &BTreeSet::from([at("q")]));
        assert!(clpc.control(AgentId(2)).unwrap().is_empty());
        assert_eq!(clpc.true_atoms(), &BTreeSet::from([at("q")]));
    }

    #[test]
    fn fresh_copy_names_avoid_collisions() {
        // A model already containing "a_p1" forces the pad to pick "a_p2".
        let ws = worlds(&["a", "a_p1"]);
        let r_empty = vec![block(&["a", "a_p1"])];
        let r_agent = BTreeMap::from([(AgentId(1), vec![block(&["a", "a_p1"])])]);
        let m = StitModel::new(ws, 1, r_empty, r_agent, BTreeMap::new()).unwrap();
        let padded = pad_choices(&m, 1).unwrap();
        let names: Vec<&str> = padded.worlds().iter().map(World::name).collect();
        assert_eq!(names, vec!["a", "a_p1", "a_p2", "a_p1_p1"]);
        assert!(padded.validate().is_empty());
    }
}
