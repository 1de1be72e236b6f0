//! Formula ASTs for the four supported languages.
//!
//! All languages share one generic core over `{T, atom, ~, &, modal}`; the
//! boolean connectives `|`, `->`, `<->` and the constant `F` are definitional
//! sugar that the constructors desugar immediately, so structural equality is
//! always equality of desugared trees.
//!
//! The primitive modality per language follows the usual presentation:
//!
//! * PECP: diamond `<X>` (box `[X]f` is `~<X>~f`),
//! * STIT: box `[J:stit]` (diamond is its dual),
//! * CL-PC: diamond `dia{J}` (box is its dual),
//! * S5: box `[]` (diamond is its dual).
//!
//! Printers recognize the dual pattern `~modal~f` and render it with the dual
//! bracket, so `[{p,q}] f` round-trips through parse/print unchanged.

mod parse;
mod print;

use std::collections::BTreeSet;
use std::fmt;

pub use parse::{parse_clpc, parse_pecp, parse_s5, parse_stit, ParseError};

use crate::atom::{AgentId, Atom};

/// Interface every modal operator index implements.
pub trait Modality: Clone + Eq + Ord + std::hash::Hash + fmt::Debug {
    /// Atoms mentioned by the operator itself (signature atoms for PECP).
    fn operator_atoms(&self) -> Vec<Atom>;
    /// True when the language's primitive modality is the box.
    const PRIMITIVE_IS_BOX: bool;
    /// Renders the primitive modality bracket, e.g. `<{p,q}>`.
    fn write_primitive(&self, out: &mut String);
    /// Renders the dual modality bracket, e.g. `[{p,q}]`.
    fn write_dual(&self, out: &mut String);
}

/// PECP modality `<X>`: the signature is a finite set of atoms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PecpMod {
    pub signature: BTreeSet<Atom>,
}

/// STIT modality `[J:stit]`: the coalition is a finite set of agents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StitMod {
    pub coalition: BTreeSet<AgentId>,
}

/// CL-PC modality `dia{J}`: contingent ability of coalition `J`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ClpcMod {
    pub coalition: BTreeSet<AgentId>,
}

/// S5 modality `[]`: one global box, no index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct S5Mod;

fn write_atom_set(atoms: &BTreeSet<Atom>, out: &mut String) {
    out.push('{');
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(a.name());
    }
    out.push('}');
}

fn write_agent_set(agents: &BTreeSet<AgentId>, out: &mut String) {
    out.push('{');
    for (i, a) in agents.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&a.to_string());
    }
    out.push('}');
}

impl Modality for PecpMod {
    fn operator_atoms(&self) -> Vec<Atom> {
        self.signature.iter().cloned().collect()
    }
    const PRIMITIVE_IS_BOX: bool = false;
    fn write_primitive(&self, out: &mut String) {
        out.push('<');
        write_atom_set(&self.signature, out);
        out.push('>');
    }
    fn write_dual(&self, out: &mut String) {
        out.push('[');
        write_atom_set(&self.signature, out);
        out.push(']');
    }
}

impl Modality for StitMod {
    fn operator_atoms(&self) -> Vec<Atom> {
        Vec::new()
    }
    const PRIMITIVE_IS_BOX: bool = true;
    fn write_primitive(&self, out: &mut String) {
        out.push('[');
        write_agent_set(&self.coalition, out);
        out.push_str(":stit]");
    }
    fn write_dual(&self, out: &mut String) {
        out.push('<');
        write_agent_set(&self.coalition, out);
        out.push_str(":stit>");
    }
}

impl Modality for ClpcMod {
    fn operator_atoms(&self) -> Vec<Atom> {
        Vec::new()
    }
    const PRIMITIVE_IS_BOX: bool = false;
    fn write_primitive(&self, out: &mut String) {
        out.push_str("dia");
        write_agent_set(&self.coalition, out);
    }
    fn write_dual(&self, out: &mut String) {
        out.push_str("box");
        write_agent_set(&self.coalition, out);
    }
}

impl Modality for S5Mod {
    fn operator_atoms(&self) -> Vec<Atom> {
        Vec::new()
    }
    const PRIMITIVE_IS_BOX: bool = true;
    fn write_primitive(&self, out: &mut String) {
        out.push_str("[]");
    }
    fn write_dual(&self, out: &mut String) {
        out.push_str("<>");
    }
}

/// Desugared formula core, generic over the modal operator index.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Formula<M> {
    /// The constant `T`.
    Top,
    /// A propositional atom.
    Atom(Atom),
    /// Negation `~f`.
    Not(Box<Formula<M>>),
    /// Conjunction `f & g`.
    And(Box<Formula<M>>, Box<Formula<M>>),
    /// The language's primitive modality applied to a formula.
    Modal(M, Box<Formula<M>>),
}

/// Formulas of the ceteris paribus equivalence logic.
pub type PecpFormula = Formula<PecpMod>;
/// Formulas of atemporal group STIT.
pub type StitFormula = Formula<StitMod>;
/// Formulas of the coalition logic of propositional control.
pub type ClpcFormula = Formula<ClpcMod>;
/// Mono-modal S5 formulas.
pub type S5Formula = Formula<S5Mod>;

impl<M: Modality> Formula<M> {
    /// Atom as a formula.
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }

    /// The constant true.
    pub fn top() -> Self {
        Formula::Top
    }

    /// The constant false, desugared to `~T`.
    pub fn bot() -> Self {
        Formula::Not(Box::new(Formula::Top))
    }

    /// Negation.
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Self) -> Self {
        Formula::Not(Box::new(f))
    }

    /// Conjunction.
    pub fn and(f: Self, g: Self) -> Self {
        Formula::And(Box::new(f), Box::new(g))
    }

    /// Disjunction, desugared to `~(~f & ~g)`.
    pub fn or(f: Self, g: Self) -> Self {
        Self::not(Self::and(Self::not(f), Self::not(g)))
    }

    /// Implication, desugared to `~(f & ~g)`.
    pub fn imp(f: Self, g: Self) -> Self {
        Self::not(Self::and(f, Self::not(g)))
    }

    /// Biconditional, desugared to `(f -> g) & (g -> f)`.
    pub fn iff(f: Self, g: Self) -> Self {
        Self::and(
            Self::imp(f.clone(), g.clone()),
            Self::imp(g, f),
        )
    }

    /// Right-folded conjunction of a sequence; empty sequence yields `T`.
    pub fn and_all<I: IntoIterator<Item = Self>>(items: I) -> Self
    where
        I::IntoIter: DoubleEndedIterator,
    {
        let mut iter = items.into_iter().rev();
        match iter.next() {
            None => Self::top(),
            Some(last) => iter.fold(last, |acc, f| Self::and(f, acc)),
        }
    }

    /// Right-folded disjunction of a sequence; empty sequence yields `~T`.
    pub fn or_all<I: IntoIterator<Item = Self>>(items: I) -> Self
    where
        I::IntoIter: DoubleEndedIterator,
    {
        let mut iter = items.into_iter().rev();
        match iter.next() {
            None => Self::bot(),
            Some(last) => iter.fold(last, |acc, f| Self::or(f, acc)),
        }
    }

    /// Primitive modality applied to `f`.
    pub fn modal(m: M, f: Self) -> Self {
        Formula::Modal(m, Box::new(f))
    }

    /// Dual modality, desugared to `~ modal ~f`.
    pub fn modal_dual(m: M, f: Self) -> Self {
        Self::not(Self::modal(m, Self::not(f)))
    }

    /// Matches the dual-modality pattern `~ modal(m, ~g)`, returning `(m, g)`.
    pub fn as_dual_modal(&self) -> Option<(&M, &Self)> {
        if let Formula::Not(inner) = self {
            if let Formula::Modal(m, body) = inner.as_ref() {
                if let Formula::Not(g) = body.as_ref() {
                    return Some((m, g));
                }
            }
        }
        None
    }

    /// Number of nodes in the desugared tree.
    pub fn length(&self) -> usize {
        match self {
            Formula::Top | Formula::Atom(_) => 1,
            Formula::Not(f) | Formula::Modal(_, f) => 1 + f.length(),
            Formula::And(f, g) => 1 + f.length() + g.length(),
        }
    }

    /// Maximum nesting depth of modal operators.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Top | Formula::Atom(_) => 0,
            Formula::Not(f) => f.modal_depth(),
            Formula::And(f, g) => f.modal_depth().max(g.modal_depth()),
            Formula::Modal(_, f) => 1 + f.modal_depth(),
        }
    }

    /// All atoms occurring in the formula, including inside modal signatures.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Formula::Top => {}
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(f, g) => {
                f.collect_atoms(out);
                g.collect_atoms(out);
            }
            Formula::Modal(m, f) => {
                out.extend(m.operator_atoms());
                f.collect_atoms(out);
            }
        }
    }

    /// All modal operator indices occurring in the formula.
    pub fn modalities(&self) -> BTreeSet<M> {
        let mut out = BTreeSet::new();
        self.collect_modalities(&mut out);
        out
    }

    fn collect_modalities(&self, out: &mut BTreeSet<M>) {
        match self {
            Formula::Top | Formula::Atom(_) => {}
            Formula::Not(f) => f.collect_modalities(out),
            Formula::And(f, g) => {
                f.collect_modalities(out);
                g.collect_modalities(out);
            }
            Formula::Modal(m, f) => {
                out.insert(m.clone());
                f.collect_modalities(out);
            }
        }
    }

    /// The set of subformulas (the formula itself included), deduplicated and
    /// ordered by increasing size with children before parents.
    pub fn subformulas(&self) -> Vec<&Self> {
        let mut seen: BTreeSet<&Self> = BTreeSet::new();
        let mut order: Vec<&Self> = Vec::new();
        self.postorder(&mut seen, &mut order);
        order.sort_by_key(|f| f.length());
        order
    }

    fn postorder<'a>(&'a self, seen: &mut BTreeSet<&'a Self>, order: &mut Vec<&'a Self>) {
        match self {
            Formula::Top | Formula::Atom(_) => {}
            Formula::Not(f) | Formula::Modal(_, f) => f.postorder(seen, order),
            Formula::And(f, g) => {
                f.postorder(seen, order);
                g.postorder(seen, order);
            }
        }
        if seen.insert(self) {
            order.push(self);
        }
    }

    /// Canonical text: minimal parentheses, sorted signatures/coalitions,
    /// dual-modality sugar. Reparsing yields an equal tree.
    pub fn print(&self) -> String {
        print::print(self)
    }
}

impl PecpFormula {
    /// `<X> f`.
    pub fn dia<I: IntoIterator<Item = Atom>>(signature: I, f: Self) -> Self {
        Self::modal(
            PecpMod {
                signature: signature.into_iter().collect(),
            },
            f,
        )
    }

    /// `[X] f`, desugared to `~<X>~f`.
    pub fn boxed<I: IntoIterator<Item = Atom>>(signature: I, f: Self) -> Self {
        Self::modal_dual(
            PecpMod {
                signature: signature.into_iter().collect(),
            },
            f,
        )
    }

    /// All signatures `X` with `<X>g` or `[X]g` among the subformulas.
    pub fn signatures(&self) -> BTreeSet<BTreeSet<Atom>> {
        self.modalities()
            .into_iter()
            .map(|m| m.signature)
            .collect()
    }

    /// True when the signatures form a chain under set inclusion.
    pub fn is_nested(&self) -> bool {
        let sigs: Vec<BTreeSet<Atom>> = self.signatures().into_iter().collect();
        for (i, x) in sigs.iter().enumerate() {
            for y in sigs.iter().skip(i + 1) {
                if !(x.is_subset(y) || y.is_subset(x)) {
                    return false;
                }
            }
        }
        true
    }
}

impl StitFormula {
    /// `[J:stit] f`.
    pub fn stit_box<I: IntoIterator<Item = AgentId>>(coalition: I, f: Self) -> Self {
        Self::modal(
            StitMod {
                coalition: coalition.into_iter().collect(),
            },
            f,
        )
    }

    /// `<J:stit> f`, desugared to `~[J:stit]~f`.
    pub fn stit_dia<I: IntoIterator<Item = AgentId>>(coalition: I, f: Self) -> Self {
        Self::modal_dual(
            StitMod {
                coalition: coalition.into_iter().collect(),
            },
            f,
        )
    }

    /// All coalitions appearing in modalities.
    pub fn coalitions(&self) -> BTreeSet<BTreeSet<AgentId>> {
        self.modalities()
            .into_iter()
            .map(|m| m.coalition)
            .collect()
    }

    /// True when every modality is indexed by a singleton coalition.
    ///
    /// The empty coalition counts as non-individual, so `[{}:stit]p` is
    /// rejected; modality-free formulas are vacuously individual.
    pub fn is_individual(&self) -> bool {
        self.coalitions().iter().all(|j| j.len() == 1)
    }

    /// Largest agent id mentioned, or `None` for coalition-free formulas.
    pub fn max_agent(&self) -> Option<AgentId> {
        self.coalitions()
            .iter()
            .flat_map(|j| j.iter().copied())
            .max()
    }
}

impl ClpcFormula {
    /// `dia{J} f`.
    pub fn dia<I: IntoIterator<Item = AgentId>>(coalition: I, f: Self) -> Self {
        Self::modal(
            ClpcMod {
                coalition: coalition.into_iter().collect(),
            },
            f,
        )
    }

    /// `box{J} f`, desugared to `~dia{J}~f`.
    pub fn boxed<I: IntoIterator<Item = AgentId>>(coalition: I, f: Self) -> Self {
        Self::modal_dual(
            ClpcMod {
                coalition: coalition.into_iter().collect(),
            },
            f,
        )
    }

    /// All coalitions appearing in modalities.
    pub fn coalitions(&self) -> BTreeSet<BTreeSet<AgentId>> {
        self.modalities()
            .into_iter()
            .map(|m| m.coalition)
            .collect()
    }

    /// Largest agent id mentioned, or `None` for coalition-free formulas.
    pub fn max_agent(&self) -> Option<AgentId> {
        self.coalitions()
            .iter()
            .flat_map(|j| j.iter().copied())
            .max()
    }
}

impl S5Formula {
    /// `[] f`.
    pub fn s5_box(f: Self) -> Self {
        Self::modal(S5Mod, f)
    }

    /// `<> f`, desugared to `~[]~f`.
    pub fn s5_dia(f: Self) -> Self {
        Self::modal_dual(S5Mod, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(name: &str) -> Atom {
        Atom::new(name).unwrap()
    }

    fn p() -> PecpFormula {
        Formula::atom(at("p"))
    }
    fn q() -> PecpFormula {
        Formula::atom(at("q"))
    }

    #[test]
    fn sugar_desugars_immediately() {
        // p | q == ~(~p & ~q)
        assert_eq!(
            PecpFormula::or(p(), q()),
            Formula::not(Formula::and(Formula::not(p()), Formula::not(q())))
        );
        // p -> q == ~(p & ~q)
        assert_eq!(
            PecpFormula::imp(p(), q()),
            Formula::not(Formula::and(p(), Formula::not(q())))
        );
        // F == ~T
        assert_eq!(PecpFormula::bot(), Formula::not(Formula::top()));
        // [X]f == ~<X>~f
        assert_eq!(
            PecpFormula::boxed([at("p")], q()),
            Formula::not(PecpFormula::dia([at("p")], Formula::not(q())))
        );
    }

    #[test]
    fn length_counts_desugared_nodes() {
        assert_eq!(p().length(), 1);
        assert_eq!(PecpFormula::not(p()).length(), 2);
        assert_eq!(PecpFormula::and(p(), q()).length(), 3);
        // [{1}:stit]p is a primitive box: 2 nodes.
        let f = StitFormula::stit_box([AgentId(1)], Formula::atom(at("p")));
        assert_eq!(f.length(), 2);
        // <X>p is 2 nodes; [X]p desugars to ~<X>~p: 4 nodes.
        assert_eq!(PecpFormula::dia([at("q")], p()).length(), 2);
        assert_eq!(PecpFormula::boxed([at("q")], p()).length(), 4);
    }

    #[test]
    fn subformula_closure_and_order() {
        // <{p}>(p & q): subformulas {p, q, p & q, <{p}>(p & q)}.
        let f = PecpFormula::dia([at("p")], Formula::and(p(), q()));
        let sf = f.subformulas();
        let texts: Vec<String> = sf.iter().map(|g| g.print()).collect();
        assert_eq!(texts, ["p", "q", "p & q", "<{p}> (p & q)"]);
        // Children precede parents and sizes are non-decreasing.
        for w in sf.windows(2) {
            assert!(w[0].length() <= w[1].length());
        }
        // Duplicates collapse: p & p has SF {p, p & p}.
        let g = PecpFormula::and(p(), p());
        assert_eq!(g.subformulas().len(), 2);
        // |SF(f)| <= length(f).
        assert!(sf.len() <= f.length());
    }

    #[test]
    fn atoms_include_signature_atoms() {
        let f = PecpFormula::dia([at("p"), at("r")], q());
        let names: Vec<String> = f.atoms().iter().map(|a| a.name().to_string()).collect();
        assert_eq!(names, ["p", "q", "r"]);
        // STIT coalitions contribute no atoms.
        let g = StitFormula::stit_box([AgentId(1)], Formula::atom(at("p")));
        assert_eq!(g.atoms().len(), 1);
    }

    #[test]
    fn signature_collection_and_nesting() {
        // <{p}>[{p,q}]p has signatures {p} and {p,q}: a chain.
        let f = PecpFormula::dia(
            [at("p")],
            PecpFormula::boxed([at("p"), at("q")], p()),
        );
        assert_eq!(f.signatures().len(), 2);
        assert!(f.is_nested());
        // <{p}>T & <{q}>T is not nested.
        let g = PecpFormula::and(
            PecpFormula::dia([at("p")], Formula::top()),
            PecpFormula::dia([at("q")], Formula::top()),
        );
        assert!(!g.is_nested());
        // Modality-free formulas are vacuously nested.
        assert!(PecpFormula::and(p(), q()).is_nested());
        // The empty signature never breaks a chain.
        let h = PecpFormula::and(
            PecpFormula::dia::<[Atom; 0]>([], p()),
            PecpFormula::dia([at("q")], p()),
        );
        assert!(h.is_nested());
    }

    #[test]
    fn individual_stit_classification() {
        let p = StitFormula::atom(at("p"));
        assert!(StitFormula::stit_box([AgentId(1)], p.clone()).is_individual());
        assert!(!StitFormula::stit_box([AgentId(1), AgentId(2)], p.clone()).is_individual());
        // The empty coalition is classified as non-individual.
        assert!(!StitFormula::stit_box([], p.clone()).is_individual());
        // Modality-free formulas are vacuously individual.
        assert!(StitFormula::and(p.clone(), StitFormula::not(p.clone())).is_individual());
    }

    #[test]
    fn and_all_or_all_edges() {
        assert_eq!(PecpFormula::and_all([]), Formula::Top);
        assert_eq!(PecpFormula::and_all([p()]), p());
        assert_eq!(
            PecpFormula::and_all([p(), q(), p()]),
            Formula::and(p(), Formula::and(q(), p()))
        );
        assert_eq!(PecpFormula::or_all([]), PecpFormula::bot());
        assert_eq!(PecpFormula::or_all([p()]), p());
    }

    #[test]
    fn dual_pattern_recognition() {
        let f = PecpFormula::boxed([at("p")], q());
        let (m, body) = f.as_dual_modal().unwrap();
        assert_eq!(m.signature.len(), 1);
        assert_eq!(*body, q());
        assert!(PecpFormula::dia([at("p")], q()).as_dual_modal().is_none());
    }
}
