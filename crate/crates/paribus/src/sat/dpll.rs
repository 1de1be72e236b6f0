//! The propositional engine: DPLL with two watched literals per clause,
//! unit propagation, and chronological backtracking — deliberately no
//! clause learning; the workloads here are small and the engine must be
//! easy to audit. Branching picks the variable with the most occurrences
//! among clauses not yet satisfied (lowest index on ties), trying the
//! more frequent polarity first; counting only live clauses keeps the
//! search inside the constrained region of the encoding.
//!
//! Before the search, a resolution-elimination presolve in the style of
//! the original Davis–Putnam procedure removes variables whose
//! resolvents do not grow the clause set. The modal encodings define
//! deep towers of auxiliary variables, and eliminating them shrinks
//! instances by orders of magnitude; eliminated variables are
//! reconstructed into the reported assignment afterwards, and the final
//! assignment is always re-checked against the original clause set.
//!
//! [`SatBackend`] abstracts the engine so an external DIMACS solver can be
//! swapped in via [`ExternalSolver`].

use std::io::Write as _;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use super::cnf::{parse_solver_output, Cnf, DimacsError, ExternalVerdict};

/// Errors from the propositional layer.
#[derive(Debug, Error)]
pub enum BackendError {
    #[error("literal {literal} is out of range for {n_vars} variables")]
    BadLiteral { literal: i32, n_vars: usize },
    #[error("the reported assignment does not satisfy the clause set")]
    AssignmentCheckFailed,
    #[error("external solver: {0}")]
    External(String),
    #[error(transparent)]
    Dimacs(#[from] DimacsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A solver's answer, with the search counters it took to get there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatOutcome {
    /// `Some(assignment)` when satisfiable: truth per variable, indexed by
    /// variable number with entry 0 unused. `None` when unsatisfiable.
    pub assignment: Option<Vec<bool>>,
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
}

/// Anything that can answer CNF satisfiability.
pub trait SatBackend {
    fn solve(&mut self, cnf: &Cnf) -> Result<SatOutcome, BackendError>;
}

/// The built-in engine. The default runs the resolution-elimination
/// presolve before searching; [`Dpll::plain`] skips it, exposing the raw
/// search (useful for auditing the search itself).
#[derive(Debug, Clone, Copy)]
pub struct Dpll {
    pub preprocess: bool,
}

impl Default for Dpll {
    fn default() -> Self {
        Dpll { preprocess: true }
    }
}

impl Dpll {
    /// The bare search, with no presolve.
    pub fn plain() -> Self {
        Dpll { preprocess: false }
    }
}

/// A variable removed by the presolve, with the clauses that mentioned
/// it; reconstruction re-satisfies those clauses in reverse order.
pub(crate) struct Eliminated {
    pub(crate) var: usize,
    pub(crate) clauses: Vec<Vec<i32>>,
}

/// Caps the resolvent work per candidate variable so elimination stays
/// near-linear on the encodings it is meant for.
const ELIMINATION_PAIR_CAP: usize = 128;

/// Resolves `c1` (containing `var` positively) with `c2` (containing it
/// negatively); `None` for tautological resolvents.
fn resolve_on(var: usize, c1: &[i32], c2: &[i32]) -> Option<Vec<i32>> {
    let v = var as i32;
    let mut out: Vec<i32> = Vec::with_capacity(c1.len() + c2.len() - 2);
    out.extend(c1.iter().copied().filter(|&l| l != v));
    out.extend(c2.iter().copied().filter(|&l| l != -v));
    out.sort_by_key(|l| (l.unsigned_abs(), *l < 0));
    out.dedup();
    if out.windows(2).any(|w| w[0] == -w[1]) {
        return None;
    }
    Some(out)
}

/// Davis–Putnam variable elimination: repeatedly removes variables whose
/// resolvent set is no larger than the clauses it replaces. Returns the
/// elimination stack, or `None` if an empty resolvent proves the
/// instance unsatisfiable. `clauses` is left holding the reduced set.
pub(crate) fn eliminate_variables(
    clauses: &mut Vec<Vec<i32>>,
    n_vars: usize,
) -> Option<Vec<Eliminated>> {
    let mut live: Vec<bool> = vec![true; clauses.len()];
    let mut occ_pos: Vec<Vec<usize>> = vec![Vec::new(); n_vars + 1];
    let mut occ_neg: Vec<Vec<usize>> = vec![Vec::new(); n_vars + 1];
    for (c, lits) in clauses.iter().enumerate() {
        for &lit in lits {
            let var = lit.unsigned_abs() as usize;
            if lit > 0 {
                occ_pos[var].push(c);
            } else {
                occ_neg[var].push(c);
            }
        }
    }
    let mut eliminated: Vec<Eliminated> = Vec::new();
    let mut gone: Vec<bool> = vec![false; n_vars + 1];
    // Worklist of candidate variables; an elimination re-queues the
    // variables its resolvents touch, so cascades resolve without
    // repeated full sweeps.
    let mut queued: Vec<bool> = vec![true; n_vars + 1];
    let mut queue: std::collections::VecDeque<usize> = (1..=n_vars).collect();
    while let Some(var) = queue.pop_front() {
        queued[var] = false;
        if gone[var] {
            continue;
        }
        occ_pos[var].retain(|&c| live[c]);
        occ_neg[var].retain(|&c| live[c]);
        let (np, nn) = (occ_pos[var].len(), occ_neg[var].len());
        if np == 0 && nn == 0 {
            continue;
        }
        if np * nn > ELIMINATION_PAIR_CAP {
            continue;
        }
        let mut resolvents: Vec<Vec<i32>> = Vec::new();
        for &cp in &occ_pos[var] {
            for &cn in &occ_neg[var] {
                if let Some(r) = resolve_on(var, &clauses[cp], &clauses[cn]) {
                    resolvents.push(r);
                }
            }
        }
        resolvents.sort();
        resolvents.dedup();
        if resolvents.len() > np + nn {
            continue;
        }
        if resolvents.iter().any(|r| r.is_empty()) {
            return None;
        }
        let mut removed: Vec<Vec<i32>> = Vec::new();
        for &c in occ_pos[var].iter().chain(occ_neg[var].iter()) {
            live[c] = false;
            removed.push(clauses[c].clone());
        }
        for r in resolvents {
            let c = clauses.len();
            for &lit in &r {
                let v = lit.unsigned_abs() as usize;
                if lit > 0 {
                    occ_pos[v].push(c);
                } else {
                    occ_neg[v].push(c);
                }
                if !gone[v] && !queued[v] {
                    queued[v] = true;
                    queue.push_back(v);
                }
            }
            clauses.push(r);
            live.push(true);
        }
        // Removed clauses free up their other variables too.
        for clause in &removed {
            for &lit in clause {
                let v = lit.unsigned_abs() as usize;
                if !gone[v] && !queued[v] {
                    queued[v] = true;
                    queue.push_back(v);
                }
            }
        }
        eliminated.push(Eliminated {
            var,
            clauses: removed,
        });
        gone[var] = true;
        occ_pos[var].clear();
        occ_neg[var].clear();
    }
    let mut kept = 0usize;
    for (c, alive) in live.iter().enumerate() {
        if *alive {
            clauses.swap(kept, c);
            kept += 1;
        }
    }
    clauses.truncate(kept);
    Some(eliminated)
}

/// Extends `assignment` over the eliminated variables, newest first, so
/// every clause removed by the presolve is satisfied again.
pub(crate) fn reconstruct(eliminated: &[Eliminated], assignment: &mut [bool]) {
    for e in eliminated.iter().rev() {
        let satisfied_without = |a: &[bool]| {
            e.clauses.iter().all(|clause| {
                clause.iter().any(|&lit| {
                    let var = lit.unsigned_abs() as usize;
                    if var == e.var {
                        false
                    } else {
                        a[var] == (lit > 0)
                    }
                })
            })
        };
        if satisfied_without(assignment) {
            assignment[e.var] = false;
        } else {
            // Some removed clause needs `var` itself; the polarity that
            // rescues every such clause exists because all resolvents
            // are satisfied.
            assignment[e.var] = e.clauses.iter().any(|clause| {
                clause.contains(&(e.var as i32))
                    && !clause.iter().any(|&lit| {
                        let var = lit.unsigned_abs() as usize;
                        var != e.var && assignment[var] == (lit > 0)
                    })
            });
        }
    }
}

struct Search {
    /// Clause literals; the first two positions are the watched ones.
    clauses: Vec<Vec<i32>>,
    /// Clause indices watching each literal, indexed by `watch_index`.
    watches: Vec<Vec<usize>>,
    /// Truth per variable: 0 unknown, 1 true, -1 false.
    value: Vec<i8>,
    /// Assigned literals in order.
    trail: Vec<i32>,
    /// Propagation frontier: literals below this trail index are processed.
    queue_head: usize,
    /// Open decisions: trail length at the decision, the literal, and
    /// whether its flip has already been tried.
    decisions: Vec<(usize, i32, bool)>,
    /// Scratch occurrence counters reused by `next_decision`, indexed by
    /// variable: positive and negative occurrences in live clauses.
    count_pos: Vec<u32>,
    count_neg: Vec<u32>,
    stats_decisions: u64,
    stats_propagations: u64,
    stats_conflicts: u64,
}

fn watch_index(lit: i32) -> usize {
    let var = lit.unsigned_abs() as usize;
    2 * var + usize::from(lit < 0)
}

impl Search {
    fn literal_value(&self, lit: i32) -> i8 {
        let v = self.value[lit.unsigned_abs() as usize];
        if lit < 0 {
            -v
        } else {
            v
        }
    }

    /// Puts `lit` on the trail as true. Returns false on contradiction.
    fn assign(&mut self, lit: i32) -> bool {
        match self.literal_value(lit) {
            1 => true,
            -1 => false,
            _ => {
                self.value[lit.unsigned_abs() as usize] = if lit < 0 { -1 } else { 1 };
                self.trail.push(lit);
                true
            }
        }
    }

    /// Processes queued assignments; returns false on conflict.
    fn propagate(&mut self) -> bool {
        while self.queue_head < self.trail.len() {
            let lit = self.trail[self.queue_head];
            self.queue_head += 1;
            let falsified = -lit;
            let widx = watch_index(falsified);
            let mut i = 0;
            'clauses: while i < self.watches[widx].len() {
                let c = self.watches[widx][i];
                // Normalize: the falsified literal sits at position 1.
                if self.clauses[c][0] == falsified {
                    self.clauses[c].swap(0, 1);
                }
                let other = self.clauses[c][0];
                if self.literal_value(other) == 1 {
                    i += 1;
                    continue;
                }
                // Look for a replacement watch.
                for k in 2..self.clauses[c].len() {
                    if self.literal_value(self.clauses[c][k]) != -1 {
                        self.clauses[c].swap(1, k);
                        let new_widx = watch_index(self.clauses[c][1]);
                        self.watches[widx].swap_remove(i);
                        self.watches[new_widx].push(c);
                        continue 'clauses;
                    }
                }
                // No replacement: unit on `other`, or conflict.
                if self.literal_value(other) == -1 {
                    self.stats_conflicts += 1;
                    return false;
                }
                self.stats_propagations += 1;
                self.assign(other);
                i += 1;
            }
        }
        true
    }

    /// Undoes the trail down to `mark`.
    fn unwind(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let lit = self.trail.pop().expect("nonempty");
            self.value[lit.unsigned_abs() as usize] = 0;
        }
        self.queue_head = mark;
    }

    /// Takes the most recent decision whose flip is untried, flips it, and
    /// discards everything after it. Returns false when none is left.
    fn backtrack(&mut self) -> bool {
        while let Some((mark, lit, flipped)) = self.decisions.pop() {
            self.unwind(mark);
            if !flipped {
                self.decisions.push((mark, -lit, true));
                let ok = self.assign(-lit);
                debug_assert!(ok, "flip of an unwound decision cannot clash");
                return true;
            }
        }
        false
    }

    /// Most-occurrences branching over the live clauses: counts unassigned
    /// literals in every clause not yet satisfied, then picks the variable
    /// with the highest total (lowest index on ties), more frequent
    /// polarity first. Returns `None` when every clause is satisfied, so
    /// any still-unassigned variables are don't-cares.
    fn next_decision(&mut self) -> Option<i32> {
        self.count_pos.fill(0);
        self.count_neg.fill(0);
        let mut any = false;
        'clauses: for clause in &self.clauses {
            for &lit in clause {
                if self.literal_value(lit) == 1 {
                    continue 'clauses;
                }
            }
            for &lit in clause {
                if self.literal_value(lit) == 0 {
                    any = true;
                    let var = lit.unsigned_abs() as usize;
                    if lit > 0 {
                        self.count_pos[var] += 1;
                    } else {
                        self.count_neg[var] += 1;
                    }
                }
            }
        }
        if !any {
            return None;
        }
        let mut best_var = 0usize;
        let mut best_count = 0u32;
        for var in 1..self.count_pos.len() {
            let count = self.count_pos[var] + self.count_neg[var];
            if count > best_count {
                best_count = count;
                best_var = var;
            }
        }
        let lit = best_var as i32;
        Some(if self.count_pos[best_var] >= self.count_neg[best_var] {
            lit
        } else {
            -lit
        })
    }
}

impl SatBackend for Dpll {
    fn solve(&mut self, cnf: &Cnf) -> Result<SatOutcome, BackendError> {
        let n_vars = cnf.n_vars;
        let mut normalized: Vec<Vec<i32>> = Vec::with_capacity(cnf.clauses.len());
        for clause in &cnf.clauses {
            let mut lits = clause.clone();
            for &lit in &lits {
                let var = lit.unsigned_abs() as usize;
                if lit == 0 || var > n_vars {
                    return Err(BackendError::BadLiteral { literal: lit, n_vars });
                }
            }
            lits.sort_by_key(|l| (l.unsigned_abs(), *l < 0));
            lits.dedup();
            if lits.windows(2).any(|w| w[0] == -w[1]) {
                continue; // tautology
            }
            if lits.is_empty() {
                return Ok(SatOutcome {
                    assignment: None,
                    decisions: 0,
                    propagations: 0,
                    conflicts: 1,
                });
            }
            normalized.push(lits);
        }

        let eliminated = if self.preprocess {
            match eliminate_variables(&mut normalized, n_vars) {
                Some(stack) => stack,
                None => {
                    return Ok(SatOutcome {
                        assignment: None,
                        decisions: 0,
                        propagations: 0,
                        conflicts: 1,
                    })
                }
            }
        } else {
            Vec::new()
        };

        let mut clauses: Vec<Vec<i32>> = Vec::with_capacity(normalized.len());
        let mut units: Vec<i32> = Vec::new();
        for lits in normalized {
            if lits.len() == 1 {
                units.push(lits[0]);
            } else {
                clauses.push(lits);
            }
        }

        let mut watches = vec![Vec::new(); 2 * n_vars + 2];
        for (c, lits) in clauses.iter().enumerate() {
            watches[watch_index(lits[0])].push(c);
            watches[watch_index(lits[1])].push(c);
        }

        let mut search = Search {
            clauses,
            watches,
            value: vec![0; n_vars + 1],
            trail: Vec::new(),
            queue_head: 0,
            decisions: Vec::new(),
            count_pos: vec![0; n_vars + 1],
            count_neg: vec![0; n_vars + 1],
            stats_decisions: 0,
            stats_propagations: 0,
            stats_conflicts: 0,
        };

        let unsat = |s: &Search| SatOutcome {
            assignment: None,
            decisions: s.stats_decisions,
            propagations: s.stats_propagations,
            conflicts: s.stats_conflicts,
        };

        for &lit in &units {
            if !search.assign(lit) {
                search.stats_conflicts += 1;
                return Ok(unsat(&search));
            }
        }

        loop {
            if search.propagate() {
                match search.next_decision() {
                    Some(lit) => {
                        search.stats_decisions += 1;
                        search.decisions.push((search.trail.len(), lit, false));
                        let ok = search.assign(lit);
                        debug_assert!(ok, "decision variables are unassigned");
                    }
                    None => {
                        // Every clause is satisfied; unassigned variables
                        // are don't-cares and default to false. Restore the
                        // eliminated variables, then double-check against
                        // the original clause set before reporting.
                        let mut assignment: Vec<bool> =
                            search.value.iter().map(|&v| v == 1).collect();
                        reconstruct(&eliminated, &mut assignment);
                        check_assignment(cnf, &assignment)?;
                        return Ok(SatOutcome {
                            assignment: Some(assignment),
                            decisions: search.stats_decisions,
                            propagations: search.stats_propagations,
                            conflicts: search.stats_conflicts,
                        });
                    }
                }
            } else if !search.backtrack() {
                return Ok(unsat(&search));
            }
        }
    }
}

/// Verifies that every clause has a true literal under `assignment`.
pub fn check_assignment(cnf: &Cnf, assignment: &[bool]) -> Result<(), BackendError> {
    for clause in &cnf.clauses {
        let ok = clause.iter().any(|&lit| {
            let var = lit.unsigned_abs() as usize;
            assignment.get(var).copied().unwrap_or(false) == (lit > 0)
        });
        if !ok {
            return Err(BackendError::AssignmentCheckFailed);
        }
    }
    Ok(())
}

/// Runs an external DIMACS solver. The command is split on whitespace; the
/// problem file path is appended as the final argument, and the verdict is
/// read from standard output (both `SAT`/`UNSAT` and competition style).
/// Variables the solver leaves unmentioned default to false; claimed
/// models are re-checked against the clause set.
pub struct ExternalSolver {
    pub command: String,
}

static PROBLEM_COUNTER: AtomicU64 = AtomicU64::new(0);

impl SatBackend for ExternalSolver {
    fn solve(&mut self, cnf: &Cnf) -> Result<SatOutcome, BackendError> {
        let mut parts = self.command.split_whitespace();
        let Some(program) = parts.next() else {
            return Err(BackendError::External("empty solver command".into()));
        };
        let args: Vec<&str> = parts.collect();
        let path = std::env::temp_dir().join(format!(
            "paribus-{}-{}.cnf",
            std::process::id(),
            PROBLEM_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        {
            let mut file = std::fs::File::create(&path)?;
            file.write_all(cnf.to_dimacs().as_bytes())?;
        }
        let output = Command::new(program).args(&args).arg(&path).output();
        let _ = std::fs::remove_file(&path);
        let output = output.map_err(|e| {
            BackendError::External(format!("failed to run '{program}': {e}"))
        })?;
        let stdout = String::from_utf8_lossy(&output.stdout);
        match parse_solver_output(&stdout)? {
            ExternalVerdict::Unsat => Ok(SatOutcome {
                assignment: None,
                decisions: 0,
                propagations: 0,
                conflicts: 0,
            }),
            ExternalVerdict::Sat(lits) => {
                let mut assignment = vec![false; cnf.n_vars + 1];
                for lit in lits {
                    let var = lit.unsigned_abs() as usize;
                    if var == 0 || var > cnf.n_vars {
                        return Err(BackendError::BadLiteral { literal: lit, n_vars: cnf.n_vars });
                    }
                    assignment[var] = lit > 0;
                }
                check_assignment(cnf, &assignment)?;
                Ok(SatOutcome {
                    assignment: Some(assignment),
                    decisions: 0,
                    propagations: 0,
                    conflicts: 0,
                })
            }
        }
    }
}
