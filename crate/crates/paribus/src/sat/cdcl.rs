//! Conflict-driven engine: watched-literal propagation, first-UIP clause
//! learning, non-chronological backjumping, activity-driven branching
//! with phase saving, and Luby restarts. The modal encodings produce
//! refutations whose conflicting assignments lie far apart on the trail;
//! chronological search re-derives those conflicts exponentially often,
//! while learning each one once keeps the run polynomial in practice.
//!
//! The same resolution-elimination presolve as the plain engine runs
//! first (see [`super::dpll`]), and every satisfying assignment is
//! re-checked against the original clause set before it is reported.

use super::cnf::Cnf;
use super::dpll::{
    check_assignment, eliminate_variables, reconstruct, BackendError, SatBackend, SatOutcome,
};

/// The learning engine. The default runs the resolution-elimination
/// presolve before searching; [`Cdcl::plain`] skips it.
#[derive(Debug, Clone, Copy)]
pub struct Cdcl {
    pub preprocess: bool,
}

impl Default for Cdcl {
    fn default() -> Self {
        Cdcl { preprocess: true }
    }
}

impl Cdcl {
    /// The bare search, with no presolve.
    pub fn plain() -> Self {
        Cdcl { preprocess: false }
    }
}

/// Conflicts before the first restart; later restarts stretch it by the
/// Luby sequence.
const RESTART_UNIT: u64 = 64;

/// Geometric bump growth per conflict: dividing the increment by this
/// decays every older activity relative to new bumps. The modal
/// encodings here are small but conflict-dense; decaying this fast keeps
/// the search pinned to the variables of the current contradiction,
/// where a gentler decay lets it wander between symmetric copies.
const ACTIVITY_DECAY: f64 = 0.8;

/// Growth factor for the learned-clause budget after each database
/// reduction.
const LEARNT_GROWTH: f64 = 1.1;

const NO_REASON: usize = usize::MAX;

/// Max-heap of variables keyed by activity (ties broken toward the lower
/// index), with a position index so a variable's entry moves in place
/// when its activity changes. Each variable appears at most once, which
/// keeps the heap small and keeps activity rescaling cheap: scaling every
/// activity by the same factor preserves the heap order.
struct VarHeap {
    /// `heap[i]` is a variable; the root has the highest activity.
    heap: Vec<usize>,
    /// `pos[var]` is the variable's index in `heap`, or `ABSENT`.
    pos: Vec<usize>,
}

const ABSENT: usize = usize::MAX;

impl VarHeap {
    fn new(n_vars: usize) -> VarHeap {
        VarHeap { heap: Vec::with_capacity(n_vars), pos: vec![ABSENT; n_vars + 1] }
    }

    fn ranks_before(activity: &[f64], u: usize, v: usize) -> bool {
        match activity[u].total_cmp(&activity[v]) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => u < v,
        }
    }

    fn sift_up(&mut self, activity: &[f64], mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if Self::ranks_before(activity, self.heap[i], self.heap[parent]) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, activity: &[f64], mut i: usize) {
        loop {
            let mut best = i;
            for child in [2 * i + 1, 2 * i + 2] {
                if child < self.heap.len()
                    && Self::ranks_before(activity, self.heap[child], self.heap[best])
                {
                    best = child;
                }
            }
            if best == i {
                return;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i]] = i;
        self.pos[self.heap[j]] = j;
    }

    /// Inserts `var` unless it is already queued.
    fn insert(&mut self, activity: &[f64], var: usize) {
        if self.pos[var] != ABSENT {
            return;
        }
        self.pos[var] = self.heap.len();
        self.heap.push(var);
        self.sift_up(activity, self.pos[var]);
    }

    /// Restores order after `var`'s activity increased.
    fn increased(&mut self, activity: &[f64], var: usize) {
        if self.pos[var] != ABSENT {
            self.sift_up(activity, self.pos[var]);
        }
    }

    fn pop(&mut self, activity: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        self.pos[top] = ABSENT;
        let last = self.heap.pop().expect("nonempty");
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = 0;
            self.sift_down(activity, 0);
        }
        Some(top)
    }
}

/// The i-th term of the Luby restart sequence 1,1,2,1,1,2,4,…
fn luby(mut x: u64) -> u64 {
    let mut size: u64 = 1;
    let mut seq: u32 = 0;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) / 2;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

struct Solver {
    /// Problem clauses followed by learned clauses; positions 0 and 1 of
    /// each are the watched literals.
    clauses: Vec<Vec<i32>>,
    /// Levels-at-learn-time count per clause (0 for problem clauses):
    /// fewer distinct levels means the clause couples tighter reasoning.
    lbd: Vec<u32>,
    /// Clauses below this index came with the problem and are never
    /// deleted.
    first_learnt: usize,
    /// Learned-clause budget before the next database reduction.
    max_learnt: usize,
    watches: Vec<Vec<usize>>,
    /// Truth per variable: 0 unknown, 1 true, -1 false.
    value: Vec<i8>,
    /// Decision level per assigned variable.
    level: Vec<u32>,
    /// Clause that implied each assigned variable, or `NO_REASON`.
    reason: Vec<usize>,
    trail: Vec<i32>,
    /// Trail length at each decision, indexed by level - 1.
    trail_lim: Vec<usize>,
    queue_head: usize,
    activity: Vec<f64>,
    act_inc: f64,
    heap: VarHeap,
    /// Last assigned polarity per variable, tried first on decisions.
    phase: Vec<bool>,
    seen: Vec<bool>,
    stats_decisions: u64,
    stats_propagations: u64,
    stats_conflicts: u64,
}

fn watch_index(lit: i32) -> usize {
    let var = lit.unsigned_abs() as usize;
    2 * var + usize::from(lit < 0)
}

impl Solver {
    fn literal_value(&self, lit: i32) -> i8 {
        let v = self.value[lit.unsigned_abs() as usize];
        if lit < 0 {
            -v
        } else {
            v
        }
    }

    fn current_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Puts `lit` on the trail as true. The caller guarantees it is
    /// currently unassigned.
    fn assign(&mut self, lit: i32, because: usize) {
        let var = lit.unsigned_abs() as usize;
        debug_assert_eq!(self.value[var], 0);
        self.value[var] = if lit < 0 { -1 } else { 1 };
        self.level[var] = self.current_level();
        self.reason[var] = because;
        self.phase[var] = lit > 0;
        self.trail.push(lit);
    }

    /// Processes queued assignments; returns the conflicting clause index
    /// if one arises.
    fn propagate(&mut self) -> Option<usize> {
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
                    return Some(c);
                }
                self.stats_propagations += 1;
                self.assign(other, c);
                i += 1;
            }
        }
        None
    }

    fn bump(&mut self, var: usize) {
        self.activity[var] += self.act_inc;
        if self.activity[var] > 1e100 {
            // Uniform scaling preserves the heap order, so no reshuffle.
            for act in self.activity.iter_mut() {
                *act *= 1e-100;
            }
            self.act_inc *= 1e-100;
        }
        self.heap.increased(&self.activity, var);
    }

    /// First-UIP conflict analysis. Returns the learned clause (asserting
    /// literal first) and the level to jump back to. Tail literals whose
    /// falsity already follows from the rest of the clause through the
    /// implication graph are dropped; without that, learned clauses here
    /// stay long enough that almost every one contains a literal from the
    /// immediately preceding level, pinning every backjump to one level.
    fn analyze(&mut self, conflict: usize) -> (Vec<i32>, u32) {
        let mut learnt: Vec<i32> = vec![0];
        let mut to_clear: Vec<usize> = Vec::new();
        let mut counter = 0usize;
        let mut resolved: i32 = 0;
        let mut index = self.trail.len();
        let mut cref = conflict;
        loop {
            for k in 0..self.clauses[cref].len() {
                let q = self.clauses[cref][k];
                if q == resolved {
                    continue;
                }
                let var = q.unsigned_abs() as usize;
                if !self.seen[var] && self.level[var] > 0 {
                    self.seen[var] = true;
                    to_clear.push(var);
                    self.bump(var);
                    if self.level[var] == self.current_level() {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].unsigned_abs() as usize] {
                    break;
                }
            }
            let lit = self.trail[index];
            let var = lit.unsigned_abs() as usize;
            self.seen[var] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = -lit;
                break;
            }
            cref = self.reason[var];
            debug_assert_ne!(cref, NO_REASON, "non-decision literal has a reason");
            resolved = lit;
        }
        // Levels present in the tail, folded to 32 bits: a literal can only
        // be redundant if every antecedent level also holds a tail literal,
        // so a missing bit refutes redundancy early and a colliding bit is
        // merely a missed pruning.
        let mut mask = 0u32;
        for &q in &learnt[1..] {
            mask |= 1 << (self.level[q.unsigned_abs() as usize] & 31);
        }
        let mut kept: Vec<i32> = Vec::with_capacity(learnt.len());
        kept.push(learnt[0]);
        for &q in &learnt[1..] {
            if self.reason[q.unsigned_abs() as usize] == NO_REASON
                || !self.implied_by_kept(q, mask, &mut to_clear)
            {
                kept.push(q);
            }
        }
        let mut learnt = kept;
        for var in to_clear {
            self.seen[var] = false;
        }
        let mut jump = 0u32;
        let mut at = 1usize;
        for (k, &q) in learnt.iter().enumerate().skip(1) {
            let l = self.level[q.unsigned_abs() as usize];
            if l > jump {
                jump = l;
                at = k;
            }
        }
        if learnt.len() > 1 {
            learnt.swap(1, at);
        }
        debug_assert!(learnt.iter().all(|&q| self.literal_value(q) == -1));
        debug_assert_eq!(
            learnt
                .iter()
                .filter(|q| self.level[q.unsigned_abs() as usize] == self.current_level())
                .count(),
            1,
            "single current-level literal"
        );
        debug_assert!(jump < self.current_level());
        (learnt, jump)
    }

    /// Is the false literal `q` implied, through reason clauses, by
    /// literals already marked `seen` (the learned clause and anything
    /// proven redundant so far) plus top-level facts? Walks antecedents
    /// depth-first, marking proven literals so later checks reuse them;
    /// on failure, unmarks everything this call marked.
    fn implied_by_kept(&mut self, q: i32, mask: u32, to_clear: &mut Vec<usize>) -> bool {
        let undo_from = to_clear.len();
        let mut stack = vec![q];
        while let Some(p) = stack.pop() {
            let cref = self.reason[p.unsigned_abs() as usize];
            debug_assert_ne!(cref, NO_REASON);
            // Position 0 of a reason clause is the literal it implied.
            for k in 1..self.clauses[cref].len() {
                let r = self.clauses[cref][k];
                let var = r.unsigned_abs() as usize;
                if self.seen[var] || self.level[var] == 0 {
                    continue;
                }
                if self.reason[var] == NO_REASON || (1 << (self.level[var] & 31)) & mask == 0 {
                    for &v in &to_clear[undo_from..] {
                        self.seen[v] = false;
                    }
                    to_clear.truncate(undo_from);
                    return false;
                }
                self.seen[var] = true;
                to_clear.push(var);
                stack.push(r);
            }
        }
        true
    }

    /// Unwinds the trail above `target` decision level.
    fn backjump(&mut self, target: u32) {
        if self.current_level() <= target {
            return;
        }
        let mark = self.trail_lim[target as usize];
        while self.trail.len() > mark {
            let lit = self.trail.pop().expect("nonempty");
            let var = lit.unsigned_abs() as usize;
            self.value[var] = 0;
            self.reason[var] = NO_REASON;
            self.heap.insert(&self.activity, var);
        }
        self.trail_lim.truncate(target as usize);
        self.queue_head = self.trail.len();
    }

    /// Picks the unassigned variable with the highest activity, or `None`
    /// when everything is assigned.
    fn next_decision(&mut self) -> Option<i32> {
        while let Some(var) = self.heap.pop(&self.activity) {
            if self.value[var] != 0 {
                continue;
            }
            let lit = var as i32;
            return Some(if self.phase[var] { lit } else { -lit });
        }
        None
    }

    /// Number of distinct decision levels among a clause's literals right
    /// now; low values mark clauses that tie reasoning together tightly.
    fn level_count(&self, lits: &[i32]) -> u32 {
        let mut levels: Vec<u32> =
            lits.iter().map(|l| self.level[l.unsigned_abs() as usize]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    /// Is `c` currently the reason for its implied literal?
    fn locked(&self, c: usize) -> bool {
        let var = self.clauses[c][0].unsigned_abs() as usize;
        self.value[var] != 0 && self.reason[var] == c
    }

    /// Deletes the weakest half of the deletable learned clauses: binary
    /// clauses, clauses with at most two levels at learn time, and clauses
    /// currently acting as reasons always stay. Rebuilds watches and remaps
    /// reasons to the compacted indices.
    fn reduce_db(&mut self) {
        let mut candidates: Vec<usize> = (self.first_learnt..self.clauses.len())
            .filter(|&c| self.clauses[c].len() > 2 && self.lbd[c] > 2 && !self.locked(c))
            .collect();
        // Worst first: most levels, then longest.
        candidates
            .sort_by_key(|&c| (std::cmp::Reverse(self.lbd[c]), std::cmp::Reverse(self.clauses[c].len())));
        candidates.truncate(candidates.len() / 2);
        let drop: std::collections::BTreeSet<usize> = candidates.into_iter().collect();

        let mut remap: Vec<usize> = Vec::with_capacity(self.clauses.len());
        let mut kept_clauses = Vec::with_capacity(self.clauses.len() - drop.len());
        let mut kept_lbd = Vec::with_capacity(kept_clauses.capacity());
        for c in 0..self.clauses.len() {
            if drop.contains(&c) {
                remap.push(NO_REASON);
            } else {
                remap.push(kept_clauses.len());
                kept_clauses.push(std::mem::take(&mut self.clauses[c]));
                kept_lbd.push(self.lbd[c]);
            }
        }
        self.clauses = kept_clauses;
        self.lbd = kept_lbd;
        for r in self.reason.iter_mut() {
            if *r != NO_REASON {
                debug_assert_ne!(remap[*r], NO_REASON, "reason clause survived");
                *r = remap[*r];
            }
        }
        for list in self.watches.iter_mut() {
            list.clear();
        }
        for (c, lits) in self.clauses.iter().enumerate() {
            self.watches[watch_index(lits[0])].push(c);
            self.watches[watch_index(lits[1])].push(c);
        }
    }
}

impl SatBackend for Cdcl {
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

        // Initial polarity and branching order follow occurrence counts,
        // as in the plain engine; activity bumps take over from there.
        let mut positive = vec![0u32; n_vars + 1];
        let mut negative = vec![0u32; n_vars + 1];
        for lits in &clauses {
            for &lit in lits {
                let var = lit.unsigned_abs() as usize;
                if lit > 0 {
                    positive[var] += 1;
                } else {
                    negative[var] += 1;
                }
            }
        }

        let n_problem = clauses.len();
        let mut solver = Solver {
            lbd: vec![0; n_problem],
            first_learnt: n_problem,
            max_learnt: (n_problem / 3).max(2000),
            clauses,
            watches,
            value: vec![0; n_vars + 1],
            level: vec![0; n_vars + 1],
            reason: vec![NO_REASON; n_vars + 1],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            queue_head: 0,
            activity: (0..=n_vars)
                .map(|v| f64::from(positive[v] + negative[v]))
                .collect(),
            act_inc: 1.0,
            heap: VarHeap::new(n_vars),
            phase: (0..=n_vars).map(|v| positive[v] >= negative[v]).collect(),
            seen: vec![false; n_vars + 1],
            stats_decisions: 0,
            stats_propagations: 0,
            stats_conflicts: 0,
        };
        for var in 1..=n_vars {
            solver.heap.insert(&solver.activity, var);
        }

        let unsat = |s: &Solver| SatOutcome {
            assignment: None,
            decisions: s.stats_decisions,
            propagations: s.stats_propagations,
            conflicts: s.stats_conflicts,
        };

        for &lit in &units {
            match solver.literal_value(lit) {
                1 => {}
                -1 => {
                    solver.stats_conflicts += 1;
                    return Ok(unsat(&solver));
                }
                _ => solver.assign(lit, NO_REASON),
            }
        }

        let mut restarts = 0u64;
        let mut conflicts_since_restart = 0u64;
        loop {
            if let Some(conflict) = solver.propagate() {
                if solver.current_level() == 0 {
                    return Ok(unsat(&solver));
                }
                conflicts_since_restart += 1;
                let (learnt, jump) = solver.analyze(conflict);
                let learnt_levels = solver.level_count(&learnt);
                solver.backjump(jump);
                solver.act_inc /= ACTIVITY_DECAY;
                let asserting = learnt[0];
                if learnt.len() == 1 {
                    debug_assert_eq!(solver.current_level(), 0);
                    solver.assign(asserting, NO_REASON);
                } else {
                    let c = solver.clauses.len();
                    solver.watches[watch_index(learnt[0])].push(c);
                    solver.watches[watch_index(learnt[1])].push(c);
                    solver.lbd.push(learnt_levels);
                    solver.clauses.push(learnt);
                    solver.assign(asserting, c);
                }
            } else if conflicts_since_restart >= RESTART_UNIT * luby(restarts) {
                restarts += 1;
                conflicts_since_restart = 0;
                solver.backjump(0);
                if solver.clauses.len() - solver.first_learnt >= solver.max_learnt {
                    solver.reduce_db();
                    solver.max_learnt = (solver.max_learnt as f64 * LEARNT_GROWTH) as usize;
                }
            } else {
                match solver.next_decision() {
                    Some(lit) => {
                        solver.stats_decisions += 1;
                        solver.trail_lim.push(solver.trail.len());
                        solver.assign(lit, NO_REASON);
                    }
                    None => {
                        let mut assignment: Vec<bool> =
                            solver.value.iter().map(|&v| v == 1).collect();
                        reconstruct(&eliminated, &mut assignment);
                        check_assignment(cnf, &assignment)?;
                        return Ok(SatOutcome {
                            assignment: Some(assignment),
                            decisions: solver.stats_decisions,
                            propagations: solver.stats_propagations,
                            conflicts: solver.stats_conflicts,
                        });
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(n_vars: usize, clauses: &[&[i32]]) -> SatOutcome {
        let cnf = Cnf {
            n_vars,
            clauses: clauses.iter().map(|c| c.to_vec()).collect(),
        };
        Cdcl::default().solve(&cnf).unwrap()
    }

    #[test]
    fn trivial_cases() {
        assert!(solve(2, &[]).assignment.is_some());
        assert!(solve(1, &[&[1], &[]]).assignment.is_none());
        assert!(solve(1, &[&[1], &[-1]]).assignment.is_none());
        assert!(solve(1, &[&[1, -1]]).assignment.is_some());
        let out = solve(3, &[&[1], &[-1, 2], &[-2, 3]]);
        let a = out.assignment.unwrap();
        assert!(a[1] && a[2] && a[3]);
    }

    #[test]
    fn pigeonhole_four_into_three_is_unsatisfiable() {
        // Pigeon i in hole h is a variable; at least one hole per pigeon,
        // no hole shared. Learning handles the size the plain engine is
        // also tested on, plus one.
        let var = |i: i32, h: i32| 3 * (i - 1) + h;
        let mut clauses: Vec<Vec<i32>> =
            (1..=4).map(|i| (1..=3).map(|h| var(i, h)).collect()).collect();
        for h in 1..=3 {
            for i in 1..=4 {
                for j in (i + 1)..=4 {
                    clauses.push(vec![-var(i, h), -var(j, h)]);
                }
            }
        }
        let cnf = Cnf { n_vars: 12, clauses };
        for mut engine in [Cdcl::default(), Cdcl::plain()] {
            let out = engine.solve(&cnf).unwrap();
            assert!(out.assignment.is_none());
        }
    }

    #[test]
    fn random_instances_agree_with_truth_table() {
        // Same deterministic generator as the plain engine's battery; the
        // two engines and the truth table must always agree.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..300 {
            let n_vars = 1 + (next() % 5) as usize;
            let n_clauses = (next() % 14) as usize;
            let clauses: Vec<Vec<i32>> = (0..n_clauses)
                .map(|_| {
                    let len = 1 + (next() % 3) as usize;
                    (0..len)
                        .map(|_| {
                            let v = 1 + (next() % n_vars as u64) as i32;
                            if next() % 2 == 0 {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let cnf = Cnf { n_vars, clauses };
            let brute = (0..1u32 << n_vars).any(|mask| {
                cnf.clauses.iter().all(|c| {
                    c.iter().any(|&lit| {
                        let bit = mask >> (lit.unsigned_abs() - 1) & 1 == 1;
                        bit == (lit > 0)
                    })
                })
            });
            for mut engine in [Cdcl::default(), Cdcl::plain()] {
                let out = engine.solve(&cnf).unwrap();
                assert_eq!(out.assignment.is_some(), brute, "{cnf:?}");
                if let Some(a) = out.assignment {
                    check_assignment(&cnf, &a).unwrap();
                }
            }
        }
    }

    #[test]
    fn luby_sequence_prefix() {
        let prefix: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(prefix, [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }
}
