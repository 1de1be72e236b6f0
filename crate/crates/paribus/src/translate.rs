//! Satisfiability-preserving translations between the four languages.
//!
//! * equivalence logic → S5 ([`pecp_to_s5`]): the structural translation —
//!   one fresh atom `aux_k` per subformula, one global clause
//!   `[](aux ↔ step)` each, where the step for `[X]f` quantifies over the
//!   state descriptions of `X` and refers to the body through its fresh
//!   atom. Single-exponential in the largest signature only.
//! * STIT → equivalence logic ([`stit_to_pecp`] plus [`action_grid`]): a
//!   coalition box becomes the box modulo the members' action-digit atoms;
//!   the grid formula forces every combination of digits to occur, which is
//!   exactly the independence of agents.
//! * CL-PC → STIT ([`clpc_to_stit`] plus [`clpc_bridge`]): `dia{J}`
//!   becomes the dual STIT operator of the complement coalition; the bridge
//!   formulas pin down exclusive and complete control of one atom per
//!   agent-minted valuation grid. [`clpc_to_pecp`] composes the two steps.
//! * nested equivalence fragment → individual STIT
//!   ([`nested_pecp_to_stit`]): when the signatures form a chain, one fresh
//!   agent per signature atom lets `<X>` become the dual STIT operator of
//!   `X`'s agents, with a control formula tying each agent's choice to its
//!   atom.
//!
//! All subset enumerations run over the sorted atom list in descending
//! bitmask order (the all-atoms subset first, the empty subset last), and a
//! state description lists positive atoms before negated ones; this fixes
//! the output of every translation bit for bit.
//!
//! Inputs may not mention the reserved `aux_`/`rep_` atoms. Signature
//! widths and output sizes are capped ([`MAX_SIGNATURE_ATOMS`],
//! [`MAX_OUTPUT_NODES`]) so runaway expansions fail cleanly instead of
//! exhausting memory.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::atom::{AgentId, Atom, AUX_PREFIX};
use crate::formula::{Formula, Modality};
use crate::{ClpcFormula, PecpFormula, S5Formula, StitFormula};

/// Widest modal signature (or CL-PC universe) a translation will expand.
pub const MAX_SIGNATURE_ATOMS: usize = 12;

/// Largest node count a translation may produce.
pub const MAX_OUTPUT_NODES: usize = 1 << 22;

/// Per-subformula, per-subset factor bounding the structural translation:
/// `length(pecp_to_s5(f))` never exceeds this times `|SF(f)| * 2^maxX`,
/// where `maxX` is the widest signature in `f`. Checked by tests across the
/// formula batteries.
pub const STRUCTURAL_SIZE_FACTOR: usize = 96;

/// Errors raised by translations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error(
        "the formula mentions the reserved atom '{0}'; names starting with \
         rep_ or aux_ belong to translation output"
    )]
    ReservedAtom(Atom),
    #[error("a modal signature has {atoms} atoms, above the expansion limit {limit}")]
    SignatureTooLarge { atoms: usize, limit: usize },
    #[error("translation output would exceed {limit} nodes")]
    OutputTooLarge { limit: usize },
    #[error("agent {agent} is out of range (agents are numbered 1..={n_agents})")]
    AgentOutOfRange { agent: AgentId, n_agents: u32 },
    #[error("at least one agent is required")]
    NoAgents,
    #[error("signatures do not form a chain under inclusion; the embedding needs a nested formula")]
    NotNested,
    #[error("atom '{0}' is outside the declared universe")]
    AtomOutsideUniverse(Atom),
}

fn check_unreserved<M: Modality>(f: &Formula<M>) -> Result<(), TranslateError> {
    match f.atoms().iter().find(|a| a.is_reserved()) {
        Some(a) => Err(TranslateError::ReservedAtom(a.clone())),
        None => Ok(()),
    }
}

/// The S5 translation sits at the end of the pipeline: upstream stages
/// legitimately hand it `rep_` digit atoms, so it guards only its own
/// `aux_` namespace.
fn check_no_aux<M: Modality>(f: &Formula<M>) -> Result<(), TranslateError> {
    match f.atoms().iter().find(|a| a.name().starts_with(AUX_PREFIX)) {
        Some(a) => Err(TranslateError::ReservedAtom(a.clone())),
        None => Ok(()),
    }
}

fn check_signature_width(x: &BTreeSet<Atom>) -> Result<(), TranslateError> {
    if x.len() > MAX_SIGNATURE_ATOMS {
        return Err(TranslateError::SignatureTooLarge {
            atoms: x.len(),
            limit: MAX_SIGNATURE_ATOMS,
        });
    }
    Ok(())
}

fn check_output_size<M: Modality>(f: &Formula<M>) -> Result<(), TranslateError> {
    if f.length() > MAX_OUTPUT_NODES {
        return Err(TranslateError::OutputTooLarge { limit: MAX_OUTPUT_NODES });
    }
    Ok(())
}

/// All subsets of `x` in descending bitmask order over the sorted atom
/// list: the full set comes first, the empty set last.
pub fn subsets_descending(x: &BTreeSet<Atom>) -> Vec<BTreeSet<Atom>> {
    let atoms: Vec<&Atom> = x.iter().collect();
    (0..1usize << atoms.len())
        .rev()
        .map(|mask| {
            atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, a)| (*a).clone())
                .collect()
        })
        .collect()
}

/// The state description of `subset` within `x`: the conjunction of `x`'s
/// atoms, positive members first, negated non-members after, both sorted.
pub fn state_description<M: Modality>(
    x: &BTreeSet<Atom>,
    subset: &BTreeSet<Atom>,
) -> Formula<M> {
    let positives = x
        .iter()
        .filter(|a| subset.contains(*a))
        .map(|a| Formula::atom(a.clone()));
    let negatives = x
        .iter()
        .filter(|a| !subset.contains(*a))
        .map(|a| Formula::not(Formula::atom(a.clone())));
    Formula::and_all(positives.chain(negatives).collect::<Vec<_>>())
}

/// Fresh-atom table for the structural translation: the `k`-th subformula
/// (children before parents, 1-based) owns `aux_k`.
pub struct AuxTable<'a> {
    order: Vec<&'a PecpFormula>,
    index: BTreeMap<&'a PecpFormula, Atom>,
}

impl<'a> AuxTable<'a> {
    /// Builds the table over the subformulas of `f0`.
    pub fn new(f0: &'a PecpFormula) -> AuxTable<'a> {
        let order = f0.subformulas();
        let index = order
            .iter()
            .enumerate()
            .map(|(i, f)| (*f, Atom::aux(i + 1)))
            .collect();
        AuxTable { order, index }
    }

    /// Subformulas in clause order.
    pub fn subformulas(&self) -> &[&'a PecpFormula] {
        &self.order
    }

    /// The fresh atom owned by a subformula.
    pub fn atom(&self, f: &PecpFormula) -> &Atom {
        self.index.get(f).expect("every subformula owns a fresh atom")
    }
}

fn dia_empty(f: PecpFormula) -> PecpFormula {
    PecpFormula::dia::<[Atom; 0]>([], f)
}

/// One translation step: a node is rewritten in terms of its children's
/// fresh atoms. A box `[X]f` (the pattern `~<X>~f`) becomes the subset
/// expansion `AND_pi (pi -> [](pi -> aux_f))`, a bare diamond `<X>f` its
/// dual subset expansion `OR_pi (pi AND <>(pi AND aux_f))`; the empty
/// signature degenerates to `[] aux_f` and `<> aux_f`. Booleans refer to
/// their immediate children's fresh atoms, which keeps every clause — and
/// so the whole output — linear in the subformula count times the subset
/// expansion.
fn step(f: &PecpFormula, table: &AuxTable<'_>) -> S5Formula {
    if let Some((op, body)) = f.as_dual_modal() {
        let aux = S5Formula::atom(table.atom(body).clone());
        if op.signature.is_empty() {
            return S5Formula::s5_box(aux);
        }
        return Formula::and_all(
            subsets_descending(&op.signature)
                .iter()
                .map(|pi| {
                    let described = || state_description::<_>(&op.signature, pi);
                    Formula::imp(
                        described(),
                        S5Formula::s5_box(Formula::imp(described(), aux.clone())),
                    )
                })
                .collect::<Vec<_>>(),
        );
    }
    match f {
        Formula::Top => Formula::Top,
        Formula::Atom(a) => Formula::atom(a.clone()),
        Formula::Not(g) => Formula::not(S5Formula::atom(table.atom(g).clone())),
        Formula::And(g, h) => Formula::and(
            S5Formula::atom(table.atom(g).clone()),
            S5Formula::atom(table.atom(h).clone()),
        ),
        Formula::Modal(op, g) => {
            let aux = S5Formula::atom(table.atom(g).clone());
            if op.signature.is_empty() {
                return S5Formula::s5_dia(aux);
            }
            Formula::or_all(
                subsets_descending(&op.signature)
                    .iter()
                    .map(|pi| {
                        let described = || state_description::<_>(&op.signature, pi);
                        Formula::and(
                            described(),
                            S5Formula::s5_dia(Formula::and(described(), aux.clone())),
                        )
                    })
                    .collect::<Vec<_>>(),
            )
        }
    }
}

/// The structural translation into S5: `aux_root AND AND_f [](aux_f ↔
/// step(f))` over all subformulas in clause order. Satisfiability is
/// preserved in both directions; the output mentions the original atoms
/// plus one fresh `aux_k` per subformula.
pub fn pecp_to_s5(f0: &PecpFormula) -> Result<S5Formula, TranslateError> {
    check_no_aux(f0)?;
    for op in f0.modalities() {
        check_signature_width(&op.signature)?;
    }
    let table = AuxTable::new(f0);
    let clauses: Vec<S5Formula> = table
        .subformulas()
        .iter()
        .map(|f| {
            S5Formula::s5_box(Formula::iff(
                S5Formula::atom(table.atom(f).clone()),
                step(f, &table),
            ))
        })
        .collect();
    let out = Formula::and(
        S5Formula::atom(table.atom(f0).clone()),
        Formula::and_all(clauses),
    );
    check_output_size(&out)?;
    Ok(out)
}

/// Rewrites every nonempty signature away using the subset expansion of the
/// diamond, `<X>f ↔ OR_pi (pi AND <>{}(pi AND f))`, bottom-up; the result
/// is equivalent in every model and mentions only the empty signature.
/// Exponential in nesting — guarded by the output-size cap.
pub fn reduce_to_empty_signature(f: &PecpFormula) -> Result<PecpFormula, TranslateError> {
    let out = match f {
        Formula::Top => Formula::Top,
        Formula::Atom(a) => Formula::atom(a.clone()),
        Formula::Not(g) => Formula::not(reduce_to_empty_signature(g)?),
        Formula::And(g, h) => Formula::and(
            reduce_to_empty_signature(g)?,
            reduce_to_empty_signature(h)?,
        ),
        Formula::Modal(op, g) => {
            let body = reduce_to_empty_signature(g)?;
            if op.signature.is_empty() {
                Formula::modal(op.clone(), body)
            } else {
                check_signature_width(&op.signature)?;
                Formula::or_all(
                    subsets_descending(&op.signature)
                        .iter()
                        .map(|pi| {
                            let described = || state_description::<_>(&op.signature, pi);
                            Formula::and(
                                described(),
                                dia_empty(Formula::and(described(), body.clone())),
                            )
                        })
                        .collect::<Vec<_>>(),
                )
            }
        }
    };
    check_output_size(&out)?;
    Ok(out)
}

/// The box reduction law as a single formula:
/// `[X]f ↔ AND_pi (pi -> [{}](pi -> f))`. Valid in every model.
pub fn box_reduction_instance(x: &BTreeSet<Atom>, f: &PecpFormula) -> PecpFormula {
    let lhs = PecpFormula::boxed(x.iter().cloned(), f.clone());
    let rhs = Formula::and_all(
        subsets_descending(x)
            .iter()
            .map(|pi| {
                let described = || state_description::<_>(x, pi);
                Formula::imp(
                    described(),
                    PecpFormula::boxed([], Formula::imp(described(), f.clone())),
                )
            })
            .collect::<Vec<_>>(),
    );
    Formula::iff(lhs, rhs)
}

/// The singleton diamond law as a single formula:
/// `<{p}>f ↔ ((p AND <{}>(p AND f)) OR (~p AND <{}>(~p AND f)))`.
/// Valid in every model.
pub fn singleton_diamond_instance(p: &Atom, f: &PecpFormula) -> PecpFormula {
    let lhs = PecpFormula::dia([p.clone()], f.clone());
    let pos = Formula::and(
        Formula::atom(p.clone()),
        dia_empty(Formula::and(Formula::atom(p.clone()), f.clone())),
    );
    let neg = Formula::and(
        Formula::not(Formula::atom(p.clone())),
        dia_empty(Formula::and(Formula::not(Formula::atom(p.clone())), f.clone())),
    );
    Formula::iff(lhs, Formula::or(pos, neg))
}

/// The action-digit atoms of one agent: `rep_j_1 .. rep_j_m`.
pub fn action_digits(agent: AgentId, m_digits: u32) -> BTreeSet<Atom> {
    (1..=m_digits as usize).map(|d| Atom::rep(agent, d)).collect()
}

/// The grid formula over `n_agents * m_digits` action digits: for every
/// digit atom `x`, everywhere, the digit can be flipped while holding all
/// other digits fixed. In a model of the grid every combination of digit
/// values is realized, which makes the derived choice partitions
/// independent.
pub fn action_grid(n_agents: u32, m_digits: u32) -> Result<PecpFormula, TranslateError> {
    if n_agents == 0 {
        return Err(TranslateError::NoAgents);
    }
    let all: BTreeSet<Atom> = (1..=n_agents)
        .flat_map(|j| action_digits(AgentId(j), m_digits))
        .collect();
    if !all.is_empty() {
        let others = all.len() - 1;
        if others > MAX_SIGNATURE_ATOMS {
            return Err(TranslateError::SignatureTooLarge {
                atoms: others,
                limit: MAX_SIGNATURE_ATOMS,
            });
        }
    }
    let conjuncts: Vec<PecpFormula> = all
        .iter()
        .map(|x| {
            let rest: BTreeSet<Atom> = all.iter().filter(|a| *a != x).cloned().collect();
            let atom = PecpFormula::atom(x.clone());
            let can_flip_off = Formula::imp(
                atom.clone(),
                PecpFormula::dia(rest.iter().cloned(), Formula::not(atom.clone())),
            );
            let can_flip_on = Formula::imp(
                Formula::not(atom.clone()),
                PecpFormula::dia(rest.iter().cloned(), atom.clone()),
            );
            PecpFormula::boxed([], Formula::and(can_flip_off, can_flip_on))
        })
        .collect();
    Ok(Formula::and_all(conjuncts))
}

/// Maps a STIT formula into the equivalence logic: `[J:stit]f` becomes the
/// box modulo the union of the members' action digits (`[{}]f` for the
/// empty coalition), booleans map through. Pair with [`action_grid`] for
/// satisfiability: `f` has a model with at most `2^m_digits` choices per
/// agent exactly when `grid AND stit_to_pecp(f)` has a model.
pub fn stit_to_pecp(f: &StitFormula, m_digits: u32) -> Result<PecpFormula, TranslateError> {
    check_unreserved(f)?;
    Ok(stit_to_pecp_rec(f, m_digits))
}

fn coalition_digits(coalition: &BTreeSet<AgentId>, m_digits: u32) -> BTreeSet<Atom> {
    coalition
        .iter()
        .flat_map(|j| action_digits(*j, m_digits))
        .collect()
}

fn stit_to_pecp_rec(f: &StitFormula, m_digits: u32) -> PecpFormula {
    // Match the dual operator first so `<J:stit>f` becomes a clean `<X>f`
    // rather than a doubly negated box.
    if let Some((op, body)) = f.as_dual_modal() {
        return PecpFormula::dia(
            coalition_digits(&op.coalition, m_digits),
            stit_to_pecp_rec(body, m_digits),
        );
    }
    match f {
        Formula::Top => Formula::Top,
        Formula::Atom(a) => Formula::atom(a.clone()),
        Formula::Not(g) => Formula::not(stit_to_pecp_rec(g, m_digits)),
        Formula::And(g, h) => Formula::and(
            stit_to_pecp_rec(g, m_digits),
            stit_to_pecp_rec(h, m_digits),
        ),
        Formula::Modal(op, g) => PecpFormula::boxed(
            coalition_digits(&op.coalition, m_digits),
            stit_to_pecp_rec(g, m_digits),
        ),
    }
}

/// The control bridge for CL-PC over `universe` with agents `1..=n_agents`:
/// exclusive control of each atom (no two agents can both force it true,
/// nor both force it false), complete control (someone settles each atom),
/// and the valuation grid (every assignment to the universe is possible
/// somewhere). A STIT model of the bridge is, up to detail, a CL-PC model.
pub fn clpc_bridge(
    n_agents: u32,
    universe: &BTreeSet<Atom>,
) -> Result<StitFormula, TranslateError> {
    if n_agents == 0 {
        return Err(TranslateError::NoAgents);
    }
    if let Some(a) = universe.iter().find(|a| a.is_reserved()) {
        return Err(TranslateError::ReservedAtom(a.clone()));
    }
    check_signature_width(universe)?;
    let agents: Vec<AgentId> = (1..=n_agents).map(AgentId).collect();
    fn forces(i: AgentId, body: StitFormula) -> StitFormula {
        StitFormula::stit_dia([], StitFormula::stit_box([i], body))
    }
    let exclusive = |polarity: fn(&Atom) -> StitFormula| {
        let mut conjuncts = Vec::new();
        for p in universe {
            for &i in &agents {
                for &j in &agents {
                    if j != i {
                        conjuncts.push(Formula::imp(
                            forces(i, polarity(p)),
                            Formula::not(forces(j, polarity(p))),
                        ));
                    }
                }
            }
        }
        Formula::and_all(conjuncts)
    };
    let exc_pos = exclusive(|p| Formula::atom(p.clone()));
    let exc_neg = exclusive(|p| Formula::not(Formula::atom(p.clone())));
    let complete = Formula::and_all(
        universe
            .iter()
            .map(|p| {
                Formula::or_all(
                    agents
                        .iter()
                        .map(|&i| {
                            StitFormula::stit_box(
                                [],
                                Formula::or(
                                    StitFormula::stit_box([i], Formula::atom(p.clone())),
                                    StitFormula::stit_box(
                                        [i],
                                        Formula::not(Formula::atom(p.clone())),
                                    ),
                                ),
                            )
                        })
                        .collect::<Vec<_>>(),
                )
            })
            .collect::<Vec<_>>(),
    );
    let grid = Formula::and_all(
        subsets_descending(universe)
            .iter()
            .map(|x| StitFormula::stit_dia([], state_description::<_>(universe, x)))
            .collect::<Vec<_>>(),
    );
    Ok(Formula::and(
        exc_pos,
        Formula::and(exc_neg, Formula::and(complete, grid)),
    ))
}

/// Maps a CL-PC formula into STIT over agents `1..=n_agents`: `dia{J}f`
/// becomes the dual STIT operator of the complement coalition — what `J`
/// can bring about by resetting its atoms is what holds somewhere in the
/// current choice of everyone else. Pair with [`clpc_bridge`].
pub fn clpc_to_stit(f: &ClpcFormula, n_agents: u32) -> Result<StitFormula, TranslateError> {
    if n_agents == 0 {
        return Err(TranslateError::NoAgents);
    }
    check_unreserved(f)?;
    for op in f.modalities() {
        if let Some(bad) = op
            .coalition
            .iter()
            .find(|a| a.get() == 0 || a.get() > n_agents)
        {
            return Err(TranslateError::AgentOutOfRange { agent: *bad, n_agents });
        }
    }
    Ok(clpc_to_stit_rec(f, n_agents))
}

fn complement_coalition(coalition: &BTreeSet<AgentId>, n_agents: u32) -> Vec<AgentId> {
    (1..=n_agents)
        .map(AgentId)
        .filter(|a| !coalition.contains(a))
        .collect()
}

fn clpc_to_stit_rec(f: &ClpcFormula, n_agents: u32) -> StitFormula {
    // Match the dual operator first so `box{J}f` becomes a clean STIT box
    // of the complement rather than a doubly negated diamond.
    if let Some((op, body)) = f.as_dual_modal() {
        return StitFormula::stit_box(
            complement_coalition(&op.coalition, n_agents),
            clpc_to_stit_rec(body, n_agents),
        );
    }
    match f {
        Formula::Top => Formula::Top,
        Formula::Atom(a) => Formula::atom(a.clone()),
        Formula::Not(g) => Formula::not(clpc_to_stit_rec(g, n_agents)),
        Formula::And(g, h) => Formula::and(
            clpc_to_stit_rec(g, n_agents),
            clpc_to_stit_rec(h, n_agents),
        ),
        Formula::Modal(op, g) => StitFormula::stit_dia(
            complement_coalition(&op.coalition, n_agents),
            clpc_to_stit_rec(g, n_agents),
        ),
    }
}

/// Composes the CL-PC chain down to the equivalence logic:
/// `grid AND stit_to_pecp(bridge AND clpc_to_stit(f))`, with one digit per
/// universe atom. The result is satisfiable exactly when `f` holds in some
/// CL-PC model over `universe` with agents `1..=n_agents`.
pub fn clpc_to_pecp(
    f: &ClpcFormula,
    n_agents: u32,
    universe: &BTreeSet<Atom>,
) -> Result<PecpFormula, TranslateError> {
    if let Some(a) = f.atoms().iter().find(|a| !universe.contains(*a)) {
        return Err(TranslateError::AtomOutsideUniverse(a.clone()));
    }
    let bridge = clpc_bridge(n_agents, universe)?;
    let stit = Formula::and(bridge, clpc_to_stit(f, n_agents)?);
    let m_digits = universe.len() as u32;
    let out = Formula::and(
        action_grid(n_agents, m_digits)?,
        stit_to_pecp(&stit, m_digits)?,
    );
    check_output_size(&out)?;
    Ok(out)
}

/// Which coalition each equivalence signature maps to under
/// [`nested_pecp_to_stit`].
pub type SignatureCoalitions = BTreeMap<BTreeSet<Atom>, BTreeSet<AgentId>>;

/// Maps a nested formula (signatures forming a chain) into individual STIT:
/// the signature atoms get one fresh agent each (sorted atoms numbered from
/// 1), `<X>` becomes the dual STIT operator of `X`'s agents, and a control
/// formula makes each agent's choice settle its atom. Returns the
/// translation conjoined with the control formula, plus the
/// signature-to-coalition map.
pub fn nested_pecp_to_stit(
    f: &PecpFormula,
) -> Result<(StitFormula, SignatureCoalitions), TranslateError> {
    check_unreserved(f)?;
    if !f.is_nested() {
        return Err(TranslateError::NotNested);
    }
    let signature_atoms: Vec<Atom> = f
        .signatures()
        .iter()
        .flat_map(|x| x.iter().cloned())
        .collect::<BTreeSet<Atom>>()
        .into_iter()
        .collect();
    let agent_of: BTreeMap<Atom, AgentId> = signature_atoms
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), AgentId(i as u32 + 1)))
        .collect();
    let coalition_of = |x: &BTreeSet<Atom>| -> BTreeSet<AgentId> {
        x.iter().map(|a| agent_of[a]).collect()
    };
    let map: BTreeMap<BTreeSet<Atom>, BTreeSet<AgentId>> = f
        .signatures()
        .into_iter()
        .map(|x| {
            let coalition = coalition_of(&x);
            (x, coalition)
        })
        .collect();
    let control_body = Formula::and_all(
        map.iter()
            .map(|(x, coalition)| {
                Formula::and_all(
                    x.iter()
                        .map(|p| {
                            let atom = StitFormula::atom(p.clone());
                            let boxed_pos = StitFormula::stit_box(
                                coalition.iter().copied(),
                                atom.clone(),
                            );
                            let boxed_neg = StitFormula::stit_box(
                                coalition.iter().copied(),
                                Formula::not(atom.clone()),
                            );
                            Formula::and(
                                Formula::iff(atom.clone(), boxed_pos),
                                Formula::iff(Formula::not(atom), boxed_neg),
                            )
                        })
                        .collect::<Vec<_>>(),
                )
            })
            .collect::<Vec<_>>(),
    );
    let control = StitFormula::stit_box([], control_body);
    let translated = nested_rec(f, &agent_of);
    Ok((Formula::and(translated, control), map))
}

fn nested_rec(f: &PecpFormula, agent_of: &BTreeMap<Atom, AgentId>) -> StitFormula {
    let coalition_of = |x: &BTreeSet<Atom>| -> BTreeSet<AgentId> {
        x.iter().map(|a| agent_of[a]).collect()
    };
    // Match the dual operator first so `[X]f` becomes a clean STIT box.
    if let Some((op, body)) = f.as_dual_modal() {
        return StitFormula::stit_box(
            coalition_of(&op.signature),
            nested_rec(body, agent_of),
        );
    }
    match f {
        Formula::Top => Formula::Top,
        Formula::Atom(a) => Formula::atom(a.clone()),
        Formula::Not(g) => Formula::not(nested_rec(g, agent_of)),
        Formula::And(g, h) => {
            Formula::and(nested_rec(g, agent_of), nested_rec(h, agent_of))
        }
        Formula::Modal(op, g) => {
            StitFormula::stit_dia(coalition_of(&op.signature), nested_rec(g, agent_of))
        }
    }
}
