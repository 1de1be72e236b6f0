//! Propositional encoding of the bounded S5 problem, plus DIMACS I/O.
//!
//! An S5 formula is satisfiable iff it is satisfiable in a model with one
//! world per diamond subformula plus one ([`diamond_count`] counts them on
//! the negation normal form). [`encode_s5`] builds the clause set for a
//! fixed world count: one variable per atom per world, one variable per
//! boolean subformula per world, and — since truth of a modal subformula
//! does not depend on the evaluation world when every world sees every
//! other — a single variable per modal subformula. Each variable is tied
//! to its definition by biconditional clauses, and the root is asserted at
//! world 0.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::atom::Atom;
use crate::formula::Formula;
use crate::model::{PecpModel, World};
use crate::S5Formula;

/// A clause set in DIMACS convention: variables `1..=n_vars`, literals as
/// signed nonzero integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    pub n_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

/// Errors from reading DIMACS files or external solver output.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("the header announces {expected} clauses but the file has {found}")]
    ClauseCountMismatch { expected: usize, found: usize },
    #[error("literal {literal} is out of range for {n_vars} variables")]
    LiteralOutOfRange { literal: i64, n_vars: usize },
    #[error("no SAT or UNSAT verdict found in solver output")]
    NoVerdict,
}

impl Cnf {
    /// Renders the clause set in DIMACS format.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        writeln!(out, "p cnf {} {}", self.n_vars, self.clauses.len()).unwrap();
        for clause in &self.clauses {
            for lit in clause {
                write!(out, "{lit} ").unwrap();
            }
            writeln!(out, "0").unwrap();
        }
        out
    }

    /// Parses a DIMACS file: `c` comment lines, a `p cnf vars clauses`
    /// header, then whitespace-separated literals with `0` terminating each
    /// clause.
    pub fn from_dimacs(text: &str) -> Result<Cnf, DimacsError> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses: Vec<Vec<i32>> = Vec::new();
        let mut current: Vec<i32> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('p') {
                if header.is_some() {
                    return Err(DimacsError::Malformed {
                        line,
                        message: "second problem line".into(),
                    });
                }
                let fields: Vec<&str> = rest.split_whitespace().collect();
                let bad = || DimacsError::Malformed {
                    line,
                    message: format!("expected 'p cnf <vars> <clauses>', got '{trimmed}'"),
                };
                if fields.len() != 3 || fields[0] != "cnf" {
                    return Err(bad());
                }
                let n_vars: usize = fields[1].parse().map_err(|_| bad())?;
                let n_clauses: usize = fields[2].parse().map_err(|_| bad())?;
                header = Some((n_vars, n_clauses));
                continue;
            }
            let Some((n_vars, _)) = header else {
                return Err(DimacsError::Malformed {
                    line,
                    message: "clause before the problem line".into(),
                });
            };
            for token in trimmed.split_whitespace() {
                let lit: i64 = token.parse().map_err(|_| DimacsError::Malformed {
                    line,
                    message: format!("bad literal '{token}'"),
                })?;
                if lit == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    if lit.unsigned_abs() > n_vars as u64 {
                        return Err(DimacsError::LiteralOutOfRange { literal: lit, n_vars });
                    }
                    current.push(lit as i32);
                }
            }
        }
        let Some((n_vars, n_clauses)) = header else {
            return Err(DimacsError::Malformed {
                line: text.lines().count().max(1),
                message: "missing problem line".into(),
            });
        };
        if !current.is_empty() {
            clauses.push(current);
        }
        if clauses.len() != n_clauses {
            return Err(DimacsError::ClauseCountMismatch {
                expected: n_clauses,
                found: clauses.len(),
            });
        }
        Ok(Cnf { n_vars, clauses })
    }
}

/// An external solver's answer: a list of true literals, or unsatisfiable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExternalVerdict {
    Sat(Vec<i32>),
    Unsat,
}

/// Parses solver output in either plain (`SAT` / `UNSAT` followed by
/// literals) or competition (`s SATISFIABLE` / `v 1 -2 0`) style. Literal
/// lines end at `0` or end of input.
pub fn parse_solver_output(text: &str) -> Result<ExternalVerdict, DimacsError> {
    let mut sat_seen = false;
    let mut lits: Vec<i32> = Vec::new();
    let mut done = false;
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let line = line.strip_prefix("s ").unwrap_or(line);
        let line = line.strip_prefix("v ").unwrap_or(line);
        for token in line.split_whitespace() {
            match token {
                "UNSAT" | "UNSATISFIABLE" => return Ok(ExternalVerdict::Unsat),
                "SAT" | "SATISFIABLE" => sat_seen = true,
                _ => {
                    if done {
                        continue;
                    }
                    if let Ok(lit) = token.parse::<i32>() {
                        if lit == 0 {
                            done = true;
                        } else {
                            lits.push(lit);
                        }
                    }
                }
            }
        }
    }
    if sat_seen {
        Ok(ExternalVerdict::Sat(lits))
    } else {
        Err(DimacsError::NoVerdict)
    }
}

/// Negation normal form with structural sharing: negation lives only on
/// atoms, constants are folded away, and equal subtrees occupy one node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum NnfNode {
    True_,
    False_,
    Lit { atom: Atom, positive: bool },
    And(usize, usize),
    Or(usize, usize),
    Box_(usize),
    Dia(usize),
}

struct NnfArena {
    nodes: Vec<NnfNode>,
    index: HashMap<NnfNode, usize>,
}

impl NnfArena {
    fn new() -> NnfArena {
        NnfArena { nodes: Vec::new(), index: HashMap::new() }
    }

    fn intern(&mut self, node: NnfNode) -> usize {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }

    fn and(&mut self, a: usize, b: usize) -> usize {
        match (&self.nodes[a], &self.nodes[b]) {
            (NnfNode::False_, _) | (_, NnfNode::False_) => self.intern(NnfNode::False_),
            (NnfNode::True_, _) => b,
            (_, NnfNode::True_) => a,
            _ => self.intern(NnfNode::And(a, b)),
        }
    }

    fn or(&mut self, a: usize, b: usize) -> usize {
        match (&self.nodes[a], &self.nodes[b]) {
            (NnfNode::True_, _) | (_, NnfNode::True_) => self.intern(NnfNode::True_),
            (NnfNode::False_, _) => b,
            (_, NnfNode::False_) => a,
            _ => self.intern(NnfNode::Or(a, b)),
        }
    }

    fn boxed(&mut self, a: usize) -> usize {
        match &self.nodes[a] {
            NnfNode::True_ => a,
            NnfNode::False_ => a,
            _ => self.intern(NnfNode::Box_(a)),
        }
    }

    fn dia(&mut self, a: usize) -> usize {
        match &self.nodes[a] {
            NnfNode::True_ => a,
            NnfNode::False_ => a,
            _ => self.intern(NnfNode::Dia(a)),
        }
    }

    fn build(&mut self, f: &S5Formula, positive: bool) -> usize {
        match f {
            Formula::Top => {
                if positive {
                    self.intern(NnfNode::True_)
                } else {
                    self.intern(NnfNode::False_)
                }
            }
            Formula::Atom(a) => {
                self.intern(NnfNode::Lit { atom: a.clone(), positive })
            }
            Formula::Not(g) => self.build(g, !positive),
            Formula::And(g, h) => {
                let ga = self.build(g, positive);
                let ha = self.build(h, positive);
                if positive {
                    self.and(ga, ha)
                } else {
                    self.or(ga, ha)
                }
            }
            Formula::Modal(_, g) => {
                let ga = self.build(g, positive);
                if positive {
                    self.boxed(ga)
                } else {
                    self.dia(ga)
                }
            }
        }
    }
}

/// The number of distinct diamond subformulas in the negation normal form
/// of `f` — with constants folded and shared subtrees counted once. A
/// satisfiable S5 formula has a model with this many worlds plus one.
pub fn diamond_count(f: &S5Formula) -> usize {
    let mut arena = NnfArena::new();
    arena.build(f, true);
    arena
        .nodes
        .iter()
        .filter(|n| matches!(n, NnfNode::Dia(_)))
        .count()
}

/// The result of encoding: the formula folded to a constant, or a clause
/// set with enough structure to read a model back.
pub enum Encoded {
    Constant(bool),
    Problem(S5Encoding),
}

/// A bounded S5 problem as CNF, remembering the variable layout so a
/// satisfying assignment can be turned back into a model.
pub struct S5Encoding {
    pub cnf: Cnf,
    atoms: Vec<Atom>,
    n_worlds: usize,
}

impl S5Encoding {
    /// Worlds `w0..` in encoding order.
    pub fn world_names(&self) -> Vec<World> {
        (0..self.n_worlds)
            .map(|w| World::new(&format!("w{w}")).expect("nonempty"))
            .collect()
    }

    fn atom_var(&self, atom_index: usize, world: usize) -> usize {
        1 + atom_index * self.n_worlds + world
    }

    /// Reads the model off a satisfying assignment (indexed by variable,
    /// entry 0 unused).
    pub fn extract_model(&self, assignment: &[bool]) -> PecpModel {
        let worlds = self.world_names();
        let valuation = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, atom)| {
                let holds = (0..self.n_worlds)
                    .filter(|&w| assignment[self.atom_var(i, w)])
                    .map(|w| worlds[w].clone())
                    .collect();
                (atom.clone(), holds)
            })
            .collect();
        PecpModel::new(worlds, valuation).expect("encoding worlds are distinct")
    }
}

/// Encodes "`f` holds at world 0 of an S5 model with exactly `n_worlds`
/// worlds" as CNF. Since worlds may repeat valuations, satisfiability at
/// exactly `n` worlds coincides with satisfiability at up to `n`.
pub fn encode_s5(f: &S5Formula, n_worlds: usize) -> Encoded {
    let n_worlds = n_worlds.max(1);
    let mut arena = NnfArena::new();
    let root = arena.build(f, true);
    match arena.nodes[root] {
        NnfNode::True_ => return Encoded::Constant(true),
        NnfNode::False_ => return Encoded::Constant(false),
        _ => {}
    }
    let mut atoms: Vec<Atom> = arena
        .nodes
        .iter()
        .filter_map(|n| match n {
            NnfNode::Lit { atom, .. } => Some(atom.clone()),
            _ => None,
        })
        .collect();
    atoms.sort();
    atoms.dedup();
    let atom_index: HashMap<&Atom, usize> =
        atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();

    // Variables: per-world atom variables first, then per-world variables
    // for boolean nodes and a single variable for each modal node, in
    // arena order (children precede parents).
    let mut next_var = 1 + atoms.len() * n_worlds;
    let mut node_base: Vec<usize> = vec![0; arena.nodes.len()];
    for (id, node) in arena.nodes.iter().enumerate() {
        match node {
            NnfNode::And(..) | NnfNode::Or(..) => {
                node_base[id] = next_var;
                next_var += n_worlds;
            }
            NnfNode::Box_(_) | NnfNode::Dia(_) => {
                node_base[id] = next_var;
                next_var += 1;
            }
            _ => {}
        }
    }
    let literal = |id: usize, world: usize| -> i32 {
        match &arena.nodes[id] {
            NnfNode::Lit { atom, positive } => {
                let v = (1 + atom_index[atom] * n_worlds + world) as i32;
                if *positive {
                    v
                } else {
                    -v
                }
            }
            NnfNode::And(..) | NnfNode::Or(..) => (node_base[id] + world) as i32,
            NnfNode::Box_(_) | NnfNode::Dia(_) => node_base[id] as i32,
            NnfNode::True_ | NnfNode::False_ => {
                unreachable!("constants are folded away below the root")
            }
        }
    };

    let mut clauses: Vec<Vec<i32>> = Vec::new();
    for (id, node) in arena.nodes.iter().enumerate() {
        match node {
            NnfNode::True_ | NnfNode::False_ | NnfNode::Lit { .. } => {}
            NnfNode::And(a, b) => {
                for w in 0..n_worlds {
                    let x = literal(id, w);
                    let (la, lb) = (literal(*a, w), literal(*b, w));
                    clauses.push(vec![-x, la]);
                    clauses.push(vec![-x, lb]);
                    clauses.push(vec![x, -la, -lb]);
                }
            }
            NnfNode::Or(a, b) => {
                for w in 0..n_worlds {
                    let x = literal(id, w);
                    let (la, lb) = (literal(*a, w), literal(*b, w));
                    clauses.push(vec![-x, la, lb]);
                    clauses.push(vec![x, -la]);
                    clauses.push(vec![x, -lb]);
                }
            }
            NnfNode::Box_(a) => {
                let x = literal(id, 0);
                let mut back = vec![x];
                for w in 0..n_worlds {
                    clauses.push(vec![-x, literal(*a, w)]);
                    back.push(-literal(*a, w));
                }
                clauses.push(back);
            }
            NnfNode::Dia(a) => {
                let x = literal(id, 0);
                let mut forward = vec![-x];
                for w in 0..n_worlds {
                    forward.push(literal(*a, w));
                    clauses.push(vec![x, -literal(*a, w)]);
                }
                clauses.push(forward);
            }
        }
    }
    clauses.push(vec![literal(root, 0)]);

    Encoded::Problem(S5Encoding {
        cnf: Cnf { n_vars: next_var - 1, clauses },
        atoms,
        n_worlds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_s5;
    use crate::model::test_support::at;

    fn s5(text: &str) -> S5Formula {
        parse_s5(text).unwrap()
    }

    #[test]
    fn diamond_count_uses_shared_negation_normal_form() {
        // <>p twice is one diamond; ~[]p is a diamond after NNF.
        assert_eq!(diamond_count(&s5("<> p & <> p")), 1);
        assert_eq!(diamond_count(&s5("~[] p")), 1);
        assert_eq!(diamond_count(&s5("<> p | <> q")), 2);
        // A box stays a box.
        assert_eq!(diamond_count(&s5("[] p")), 0);
        // Constants fold: <>(p & F) is no diamond at all.
        assert_eq!(diamond_count(&s5("<> (p & F)")), 0);
        // Nested diamonds count each distinct one.
        assert_eq!(diamond_count(&s5("<> (p & <> q)")), 2);
    }

    #[test]
    fn constant_formulas_encode_to_constants() {
        assert!(matches!(encode_s5(&s5("T"), 3), Encoded::Constant(true)));
        assert!(matches!(encode_s5(&s5("~T"), 3), Encoded::Constant(false)));
        assert!(matches!(encode_s5(&s5("[] T"), 2), Encoded::Constant(true)));
        assert!(matches!(encode_s5(&s5("p | ~p"), 2), Encoded::Problem(_)));
    }

    #[test]
    fn modal_nodes_share_one_variable() {
        // p & <>q over two worlds: 2 atoms * 2 worlds + 1 conjunction * 2
        // worlds + 1 diamond = 7 variables.
        let Encoded::Problem(enc) = encode_s5(&s5("p & <> q"), 2) else {
            panic!("not constant")
        };
        assert_eq!(enc.cnf.n_vars, 7);
    }

    #[test]
    fn extraction_reads_atoms_per_world() {
        let Encoded::Problem(enc) = encode_s5(&s5("p & <> q"), 2) else {
            panic!("not constant")
        };
        // Layout: p@w0=1, p@w1=2, q@w0=3, q@w1=4.
        let mut assignment = vec![false; enc.cnf.n_vars + 1];
        assignment[1] = true;
        assignment[4] = true;
        let model = enc.extract_model(&assignment);
        let w0 = World::new("w0").unwrap();
        let w1 = World::new("w1").unwrap();
        assert!(model.truth(&at("p"), &w0));
        assert!(!model.truth(&at("p"), &w1));
        assert!(!model.truth(&at("q"), &w0));
        assert!(model.truth(&at("q"), &w1));
    }

    #[test]
    fn dimacs_round_trip() {
        let cnf = Cnf {
            n_vars: 3,
            clauses: vec![vec![1, -2], vec![2, 3], vec![-1, -3]],
        };
        let text = cnf.to_dimacs();
        assert!(text.starts_with("p cnf 3 3\n"));
        assert_eq!(Cnf::from_dimacs(&text).unwrap(), cnf);
    }

    #[test]
    fn dimacs_parse_rejects_malformed_input() {
        assert!(matches!(
            Cnf::from_dimacs("1 2 0\n"),
            Err(DimacsError::Malformed { .. })
        ));
        assert!(matches!(
            Cnf::from_dimacs("p cnf 1 1\n2 0\n"),
            Err(DimacsError::LiteralOutOfRange { .. })
        ));
        assert!(matches!(
            Cnf::from_dimacs("p cnf 1 2\n1 0\n"),
            Err(DimacsError::ClauseCountMismatch { expected: 2, found: 1 })
        ));
        assert!(matches!(
            Cnf::from_dimacs("p cnf x 1\n"),
            Err(DimacsError::Malformed { .. })
        ));
        // Comments and blank lines are fine.
        let ok = Cnf::from_dimacs("c intro\n\np cnf 2 1\nc mid\n1 -2 0\n").unwrap();
        assert_eq!(ok.clauses, vec![vec![1, -2]]);
        // A trailing clause without the closing 0 still counts.
        let ok = Cnf::from_dimacs("p cnf 2 1\n1 -2").unwrap();
        assert_eq!(ok.clauses, vec![vec![1, -2]]);
    }

    #[test]
    fn solver_output_parsing_handles_both_styles() {
        assert_eq!(
            parse_solver_output("SAT\n1 -2 3 0\n").unwrap(),
            ExternalVerdict::Sat(vec![1, -2, 3])
        );
        assert_eq!(
            parse_solver_output("c comment\ns SATISFIABLE\nv 1 -2\nv 3 0\n").unwrap(),
            ExternalVerdict::Sat(vec![1, -2, 3])
        );
        assert_eq!(parse_solver_output("UNSAT\n").unwrap(), ExternalVerdict::Unsat);
        assert_eq!(
            parse_solver_output("s UNSATISFIABLE\n").unwrap(),
            ExternalVerdict::Unsat
        );
        assert!(matches!(
            parse_solver_output("hello\n"),
            Err(DimacsError::NoVerdict)
        ));
        // Literals after the terminating 0 are ignored.
        assert_eq!(
            parse_solver_output("SAT\n1 0 99\n").unwrap(),
            ExternalVerdict::Sat(vec![1])
        );
    }
}
