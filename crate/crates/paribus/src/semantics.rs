//! Model checking: truth of a formula at a world (or state) of an explicit
//! model.
//!
//! * Equivalence logic: `<X>f` holds at `w` when some world agreeing with
//!   `w` on every atom of `X` satisfies `f`.
//! * S5 (read over the same models): `[]f` holds when every world satisfies
//!   `f` — the `<{}>` / `[{}]` case of the equivalence logic.
//! * STIT: `[J:stit]f` holds at `w` when `f` holds throughout the block of
//!   `w` in the coalition's partition (the empty-coalition partition for
//!   `J = {}`, the common refinement of the members' choices otherwise).
//! * CL-PC: states are the models themselves; `dia{J}f` holds when the
//!   coalition can reassign its own atoms so that `f` holds afterwards.
//!
//! Atoms absent from a valuation (or outside a CL-PC universe) are false;
//! unknown worlds and out-of-range agents are errors.
//!
//! Evaluation is bottom-up over whole truth rows (one `Vec<bool>` per node,
//! indexed like the world list), with the partition for each distinct
//! signature or coalition computed once, so checking large translated
//! formulas stays linear in formula size times world count.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::atom::{AgentId, Atom};
use crate::formula::{Formula, PecpMod, S5Mod, StitMod};
use crate::model::{ClpcModel, PecpModel, StitModel, World};
use crate::{ClpcFormula, PecpFormula, S5Formula, StitFormula};

/// Errors raised during evaluation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("unknown world '{0}'")]
    UnknownWorld(String),
    #[error("agent {agent} is out of range (the model has agents 1..={n_agents})")]
    UnknownAgent { agent: AgentId, n_agents: u32 },
}

fn world_index(worlds: &[World], w: &World) -> Result<usize, SemanticsError> {
    worlds
        .iter()
        .position(|v| v == w)
        .ok_or_else(|| SemanticsError::UnknownWorld(w.name().to_string()))
}

/// Truth rows over `worlds` for every node of a formula, computed bottom-up.
/// `atom_row` supplies atom rows; `modal_row` turns a child row into the
/// modal node's row.
fn eval_rows<M, A, R>(
    f: &Formula<M>,
    n: usize,
    atom_row: &A,
    modal_row: &mut R,
) -> Result<Vec<bool>, SemanticsError>
where
    A: Fn(&Atom) -> Vec<bool>,
    R: FnMut(&M, &[bool]) -> Result<Vec<bool>, SemanticsError>,
{
    match f {
        Formula::Top => Ok(vec![true; n]),
        Formula::Atom(a) => Ok(atom_row(a)),
        Formula::Not(g) => {
            let row = eval_rows(g, n, atom_row, modal_row)?;
            Ok(row.into_iter().map(|b| !b).collect())
        }
        Formula::And(g, h) => {
            let left = eval_rows(g, n, atom_row, modal_row)?;
            let right = eval_rows(h, n, atom_row, modal_row)?;
            Ok(left.into_iter().zip(right).map(|(a, b)| a && b).collect())
        }
        Formula::Modal(m, g) => {
            let row = eval_rows(g, n, atom_row, modal_row)?;
            modal_row(m, &row)
        }
    }
}

/// Blocks of a partition as world-index lists.
fn index_blocks(
    part: &crate::model::Partition,
    worlds: &[World],
    index: &BTreeMap<&World, usize>,
) -> Vec<Vec<usize>> {
    part.blocks_in_first_seen_order(worlds)
        .iter()
        .map(|b| b.iter().map(|w| index[w]).collect())
        .collect()
}

/// Spreads a per-block quantification over a row: existential (`any`) when
/// `existential`, universal otherwise.
fn quantify_blocks(blocks: &[Vec<usize>], row: &[bool], existential: bool) -> Vec<bool> {
    let mut out = vec![false; row.len()];
    for block in blocks {
        let value = if existential {
            block.iter().any(|&i| row[i])
        } else {
            block.iter().all(|&i| row[i])
        };
        for &i in block {
            out[i] = value;
        }
    }
    out
}

pub(crate) fn pecp_rows(m: &PecpModel, f: &PecpFormula) -> Result<Vec<bool>, SemanticsError> {
    let worlds = m.worlds();
    let index: BTreeMap<&World, usize> = worlds.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let atom_row = |a: &Atom| worlds.iter().map(|w| m.truth(a, w)).collect();
    let mut class_cache: BTreeMap<BTreeSet<Atom>, Vec<Vec<usize>>> = BTreeMap::new();
    let mut modal_row = |op: &PecpMod, row: &[bool]| {
        let blocks = class_cache
            .entry(op.signature.clone())
            .or_insert_with(|| index_blocks(&m.classes_mod_x(&op.signature), worlds, &index));
        Ok(quantify_blocks(blocks, row, true))
    };
    eval_rows(f, worlds.len(), &atom_row, &mut modal_row)
}

/// Truth of an equivalence-logic formula at a world.
pub fn eval_pecp(m: &PecpModel, w: &World, f: &PecpFormula) -> Result<bool, SemanticsError> {
    let i = world_index(m.worlds(), w)?;
    Ok(pecp_rows(m, f)?[i])
}

/// True when the formula holds at every world of the model.
pub fn valid_pecp(m: &PecpModel, f: &PecpFormula) -> Result<bool, SemanticsError> {
    Ok(pecp_rows(m, f)?.into_iter().all(|b| b))
}

pub(crate) fn s5_rows(m: &PecpModel, f: &S5Formula) -> Result<Vec<bool>, SemanticsError> {
    let worlds = m.worlds();
    let atom_row = |a: &Atom| worlds.iter().map(|w| m.truth(a, w)).collect();
    let mut modal_row = |_op: &S5Mod, row: &[bool]| {
        let value = row.iter().all(|&b| b);
        Ok(vec![value; row.len()])
    };
    eval_rows(f, worlds.len(), &atom_row, &mut modal_row)
}

/// Truth of an S5 formula at a world (the box quantifies over all worlds).
pub fn eval_s5(m: &PecpModel, w: &World, f: &S5Formula) -> Result<bool, SemanticsError> {
    let i = world_index(m.worlds(), w)?;
    Ok(s5_rows(m, f)?[i])
}

/// True when the S5 formula holds at every world of the model.
pub fn valid_s5(m: &PecpModel, f: &S5Formula) -> Result<bool, SemanticsError> {
    Ok(s5_rows(m, f)?.into_iter().all(|b| b))
}

pub(crate) fn stit_rows(m: &StitModel, f: &StitFormula) -> Result<Vec<bool>, SemanticsError> {
    let worlds = m.worlds();
    let index: BTreeMap<&World, usize> = worlds.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let atom_row = |a: &Atom| worlds.iter().map(|w| m.truth(a, w)).collect();
    let mut block_cache: BTreeMap<BTreeSet<AgentId>, Vec<Vec<usize>>> = BTreeMap::new();
    let mut modal_row = |op: &StitMod, row: &[bool]| {
        if let Some(bad) = op
            .coalition
            .iter()
            .find(|a| a.get() == 0 || a.get() > m.n_agents())
        {
            return Err(SemanticsError::UnknownAgent { agent: *bad, n_agents: m.n_agents() });
        }
        let blocks = block_cache.entry(op.coalition.clone()).or_insert_with(|| {
            let part = m.coalition_relation(&op.coalition).expect("agents checked");
            index_blocks(&part, worlds, &index)
        });
        Ok(quantify_blocks(blocks, row, false))
    };
    eval_rows(f, worlds.len(), &atom_row, &mut modal_row)
}

/// Truth of a STIT formula at a world.
pub fn eval_stit(m: &StitModel, w: &World, f: &StitFormula) -> Result<bool, SemanticsError> {
    let i = world_index(m.worlds(), w)?;
    Ok(stit_rows(m, f)?[i])
}

/// True when the STIT formula holds at every world of the model.
pub fn valid_stit(m: &StitModel, f: &StitFormula) -> Result<bool, SemanticsError> {
    Ok(stit_rows(m, f)?.into_iter().all(|b| b))
}

/// Truth of a CL-PC formula in a model (the model is the state). Atoms
/// outside the universe are false and stay false under every update.
pub fn eval_clpc(m: &ClpcModel, f: &ClpcFormula) -> Result<bool, SemanticsError> {
    match f {
        Formula::Top => Ok(true),
        Formula::Atom(a) => Ok(m.truth(a)),
        Formula::Not(g) => Ok(!eval_clpc(m, g)?),
        Formula::And(g, h) => Ok(eval_clpc(m, g)? && eval_clpc(m, h)?),
        Formula::Modal(op, g) => {
            if let Some(bad) = op
                .coalition
                .iter()
                .find(|a| a.get() == 0 || a.get() > m.n_agents())
            {
                return Err(SemanticsError::UnknownAgent { agent: *bad, n_agents: m.n_agents() });
            }
            let joint: Vec<Atom> = m.coalition_control(&op.coalition).into_iter().collect();
            for mask in 0..1usize << joint.len() {
                let assignment: BTreeSet<Atom> = joint
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, a)| a.clone())
                    .collect();
                let updated = m
                    .update_coalition(&op.coalition, &assignment)
                    .expect("assignment stays inside the coalition's control");
                if eval_clpc(&updated, g)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_clpc, parse_pecp, parse_s5, parse_stit};
    use crate::model::test_support::{at, block, two_agent_grid, w, worlds};

    fn small_pecp() -> PecpModel {
        // p at {a, b}; q at {a, c}.
        let mut valuation = BTreeMap::new();
        valuation.insert(at("p"), block(&["a", "b"]));
        valuation.insert(at("q"), block(&["a", "c"]));
        PecpModel::new(worlds(&["a", "b", "c"]), valuation).unwrap()
    }

    fn pecp(text: &str) -> PecpFormula {
        parse_pecp(text).unwrap()
    }

    #[test]
    fn equivalence_diamond_quantifies_over_agreeing_worlds() {
        let m = small_pecp();
        // b agrees with a on p, and q holds at a.
        assert!(eval_pecp(&m, &w("b"), &pecp("<{p}> q")).unwrap());
        // The class of a modulo {p} is {a, b}, and q fails at b.
        assert!(!eval_pecp(&m, &w("a"), &pecp("[{p}] q")).unwrap());
        // Modulo {p, q} the world a is alone in its class.
        assert!(eval_pecp(&m, &w("a"), &pecp("[{p,q}] (p & q)")).unwrap());
        assert!(!eval_pecp(&m, &w("b"), &pecp("<{p,q}> (p & q)")).unwrap());
        // The empty signature relates all worlds.
        assert!(eval_pecp(&m, &w("b"), &pecp("<{}> (p & q)")).unwrap());
        assert!(eval_pecp(&m, &w("b"), &pecp("[{}] (p | q)")).unwrap());
        assert!(!eval_pecp(&m, &w("b"), &pecp("[{}] p")).unwrap());
    }

    #[test]
    fn unknown_worlds_and_absent_atoms() {
        let m = small_pecp();
        assert!(matches!(
            eval_pecp(&m, &w("nope"), &pecp("p")),
            Err(SemanticsError::UnknownWorld(_))
        ));
        // Absent atoms are false, so their negation is valid.
        assert!(valid_pecp(&m, &pecp("~zzz")).unwrap());
        assert!(!valid_pecp(&m, &pecp("p")).unwrap());
        assert!(valid_pecp(&m, &pecp("p | ~p")).unwrap());
    }

    #[test]
    fn s5_box_is_global() {
        let m = small_pecp();
        let f = parse_s5("[] (p | q)").unwrap();
        assert!(eval_s5(&m, &w("c"), &f).unwrap());
        assert!(!eval_s5(&m, &w("c"), &parse_s5("[] p").unwrap()).unwrap());
        assert!(eval_s5(&m, &w("c"), &parse_s5("<> (p & q)").unwrap()).unwrap());
        assert!(valid_s5(&m, &parse_s5("<> (p & q)").unwrap()).unwrap());
    }

    fn grid_with_atoms() -> StitModel {
        // Re-decorate the running example: p on agent 1's second choice,
        // q on agent 2's first choice.
        let base = two_agent_grid();
        let mut valuation = BTreeMap::new();
        valuation.insert(at("p"), block(&["r", "s"]));
        valuation.insert(at("q"), block(&["w", "r", "t"]));
        let r_agent = (1..=2)
            .map(|id| {
                let part = base.r_agent(AgentId(id)).unwrap();
                (AgentId(id), part.blocks().to_vec())
            })
            .collect();
        StitModel::new(
            base.worlds().to_vec(),
            2,
            base.r_empty().blocks().to_vec(),
            r_agent,
            valuation,
        )
        .unwrap()
    }

    fn stit(text: &str) -> StitFormula {
        parse_stit(text).unwrap()
    }

    #[test]
    fn stit_box_ranges_over_choice_blocks() {
        let m = grid_with_atoms();
        // At r, agent 1's choice is {r, s}, where p holds throughout.
        assert!(eval_stit(&m, &w("r"), &stit("[{1}:stit] p")).unwrap());
        assert!(!eval_stit(&m, &w("w"), &stit("[{1}:stit] p")).unwrap());
        // Somewhere in the moment agent 1 can see to it that p.
        assert!(valid_stit(&m, &stit("<{}:stit> [{1}:stit] p")).unwrap());
        // At w, agent 2's choice is {w, r, t} = the extension of q.
        assert!(eval_stit(&m, &w("w"), &stit("[{2}:stit] q")).unwrap());
        // The pair acting together at r pins the world down to {r}.
        assert!(eval_stit(&m, &w("r"), &stit("[{1,2}:stit] (p & q)")).unwrap());
        assert!(!eval_stit(&m, &w("s"), &stit("[{1,2}:stit] (p & q)")).unwrap());
        // The empty coalition sees to nothing contingent.
        assert!(!eval_stit(&m, &w("r"), &stit("[{}:stit] p")).unwrap());
        assert!(valid_stit(&m, &stit("[{}:stit] (p -> q | ~q)")).unwrap());
    }

    #[test]
    fn stit_agent_range_is_checked() {
        let m = grid_with_atoms();
        assert!(matches!(
            eval_stit(&m, &w("r"), &stit("[{3}:stit] p")),
            Err(SemanticsError::UnknownAgent { .. })
        ));
        assert!(matches!(
            eval_stit(&m, &w("missing"), &stit("p")),
            Err(SemanticsError::UnknownWorld(_))
        ));
    }

    fn clpc(text: &str) -> ClpcFormula {
        parse_clpc(text).unwrap()
    }

    #[test]
    fn clpc_diamond_enumerates_updates() {
        let m = crate::model::test_support::three_agent_control();
        // Agent 1 can switch p on, cannot touch q, and leaves r alone.
        assert!(eval_clpc(&m, &clpc("dia{1} p")).unwrap());
        assert!(!eval_clpc(&m, &clpc("dia{1} q")).unwrap());
        assert!(eval_clpc(&m, &clpc("dia{1} r")).unwrap());
        assert!(eval_clpc(&m, &clpc("box{1} r")).unwrap());
        // Together 1 and 2 reach p & q.
        assert!(eval_clpc(&m, &clpc("dia{1,2} (p & q)")).unwrap());
        assert!(!eval_clpc(&m, &clpc("dia{1} (p & q)")).unwrap());
        // The empty coalition changes nothing.
        assert!(!eval_clpc(&m, &clpc("dia{} p")).unwrap());
        assert!(eval_clpc(&m, &clpc("dia{} r")).unwrap());
        // Nesting: agent 1 moves, then agent 2 responds.
        assert!(eval_clpc(&m, &clpc("dia{1} (p & dia{2} (q & r))")).unwrap());
        // Atoms outside the universe are false under every update.
        assert!(!eval_clpc(&m, &clpc("dia{1,2,3} zzz")).unwrap());
        assert!(matches!(
            eval_clpc(&m, &clpc("dia{4} p")),
            Err(SemanticsError::UnknownAgent { .. })
        ));
    }

    #[test]
    fn clpc_box_dual_reads_as_inevitability() {
        let m = crate::model::test_support::three_agent_control();
        // However 2 acts, r stays true (2 does not control r).
        assert!(eval_clpc(&m, &clpc("box{2} r")).unwrap());
        // It is not the case that however 3 acts r stays true.
        assert!(!eval_clpc(&m, &clpc("box{3} r")).unwrap());
        // The grand coalition can force any assignment.
        assert!(eval_clpc(&m, &clpc("dia{1,2,3} (p & q & ~r)")).unwrap());
    }
}
