use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use super::{ClauseDb, Lit, SatError, Var};

/// A total assignment; index 0 is unused.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn from_values(values: Vec<bool>) -> Self {
        let mut v = Vec::with_capacity(values.len() + 1);
        v.push(false);
        v.extend(values);
        Assignment(v)
    }

    pub fn value(&self, var: Var) -> bool {
        self.0[var as usize]
    }

    pub fn lit(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }

    pub fn num_vars(&self) -> u32 {
        (self.0.len() - 1) as u32
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    Sat(Assignment),
    /// The subset of assumptions involved in the refutation; empty when the
    /// clauses alone are unsatisfiable.
    Unsat(Vec<Lit>),
}

impl SatOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatOutcome::Sat(_))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolverStats {
    pub solves: u64,
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Value {
    Unassigned,
    True,
    False,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branching {
    /// Lowest unassigned variable in the order list, preferred polarity first.
    Ordered,
    /// Conflict-activity driven (VSIDS) with the order list breaking ties.
    Activity,
}

struct Clause {
    lits: Vec<Lit>,
}

/// Conflict-driven clause-learning solver with two watched literals.
///
/// Assumptions occupy the first decision levels. Without a seed, branching
/// is deterministic: variables are tried in id order, positive first.
pub struct Solver {
    num_vars: usize,
    clauses: Vec<Clause>,
    watches: Vec<Vec<usize>>,
    values: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    ok: bool,
    seen: Vec<bool>,
    order: Vec<Var>,
    polarity: Vec<bool>,
    branching: Branching,
    activity: Vec<f64>,
    bump: f64,
    heap: VarHeap,
    original: ClauseDb,
    last_model: Option<Assignment>,
    stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            num_vars: 0,
            clauses: Vec::new(),
            watches: vec![Vec::new(), Vec::new()],
            values: vec![Value::Unassigned],
            level: vec![0],
            reason: vec![None],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            ok: true,
            seen: vec![false],
            order: Vec::new(),
            polarity: vec![true],
            branching: Branching::Ordered,
            activity: vec![0.0],
            bump: 1.0,
            heap: VarHeap::default(),
            original: ClauseDb::new(),
            last_model: None,
            stats: SolverStats::default(),
        }
    }

    pub fn from_db(db: &ClauseDb) -> Self {
        let mut s = Solver::new();
        s.ensure_vars(db.num_vars());
        if db.has_empty_clause() {
            s.ok = false;
            s.original.add_clause(&[]);
        }
        for c in db.clauses() {
            s.add_clause(c);
        }
        s
    }

    pub fn set_branching(&mut self, branching: Branching) {
        self.branching = branching;
        self.rebuild_heap();
    }

    /// Replaces the deterministic branching order with a seeded shuffle and
    /// seeded preferred polarities.
    pub fn randomize(&mut self, seed: u64) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        self.order.shuffle(&mut rng);
        for p in self.polarity.iter_mut().skip(1) {
            *p = rng.gen();
        }
        self.rebuild_heap();
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars as u32
    }

    pub fn ensure_vars(&mut self, n: u32) {
        while (self.num_vars as u32) < n {
            self.num_vars += 1;
            let v = self.num_vars as Var;
            self.values.push(Value::Unassigned);
            self.level.push(0);
            self.reason.push(None);
            self.seen.push(false);
            self.polarity.push(true);
            self.activity.push(0.0);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
            self.order.push(v);
        }
        self.original.reserve_vars(n);
        self.rebuild_heap();
    }

    fn rebuild_heap(&mut self) {
        if self.branching == Branching::Activity {
            let rank: Vec<usize> = {
                let mut r = vec![0; self.num_vars + 1];
                for (i, &v) in self.order.iter().enumerate() {
                    r[v as usize] = i;
                }
                r
            };
            self.heap = VarHeap::new(self.num_vars, rank);
            for v in 1..=self.num_vars as Var {
                if self.values[v as usize] == Value::Unassigned {
                    self.heap.insert(v, &self.activity);
                }
            }
        }
    }

    fn value(&self, lit: Lit) -> Value {
        match self.values[lit.var() as usize] {
            Value::Unassigned => Value::Unassigned,
            v if lit.is_positive() => v,
            Value::True => Value::False,
            Value::False => Value::True,
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, lit: Lit, reason: Option<usize>) {
        let v = lit.var() as usize;
        debug_assert_eq!(self.values[v], Value::Unassigned);
        self.values[v] = if lit.is_positive() { Value::True } else { Value::False };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let keep = self.trail_lim[level as usize];
        for i in (keep..self.trail.len()).rev() {
            let v = self.trail[i].var();
            self.values[v as usize] = Value::Unassigned;
            self.reason[v as usize] = None;
            if self.branching == Branching::Activity {
                self.heap.insert(v, &self.activity);
            }
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(level as usize);
        self.qhead = keep;
    }

    /// Adds a clause permanently. An empty clause (or one falsified at the top
    /// level) makes every later solve UNSAT.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        self.cancel_until(0);
        self.original.add_clause(lits);
        if let Some(max) = lits.iter().map(|l| l.var()).max() {
            self.ensure_vars(max);
        }
        if !self.ok {
            return;
        }
        let mut c = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        if c.iter().any(|&l| self.value(l) == Value::True) {
            return;
        }
        c.retain(|&l| self.value(l) != Value::False);
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(c);
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>) -> usize {
        let idx = self.clauses.len();
        self.watches[(!lits[0]).code()].push(idx);
        self.watches[(!lits[1]).code()].push(idx);
        self.clauses.push(Clause { lits });
        idx
    }

    fn propagate(&mut self) -> Option<usize> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let watchers = std::mem::take(&mut self.watches[p.code()]);
            let mut kept = Vec::with_capacity(watchers.len());
            let mut iter = watchers.into_iter();
            for ci in iter.by_ref() {
                let lits = &mut self.clauses[ci].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                if self.values[first.var() as usize] != Value::Unassigned
                    && (self.values[first.var() as usize] == Value::True) == first.is_positive()
                {
                    kept.push(ci);
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    let l = lits[k];
                    let val = self.values[l.var() as usize];
                    let is_false = val != Value::Unassigned && (val == Value::True) != l.is_positive();
                    if !is_false {
                        lits.swap(1, k);
                        self.watches[(!lits[1]).code()].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                kept.push(ci);
                if self.value(first) == Value::False {
                    conflict = Some(ci);
                    break;
                }
                self.enqueue(first, Some(ci));
            }
            kept.extend(iter);
            self.watches[p.code()] = kept;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: Var) {
        if self.branching != Branching::Activity {
            return;
        }
        self.activity[v as usize] += self.bump;
        if self.activity[v as usize] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.bump *= 1e-100;
        }
        self.heap.increase(v, &self.activity);
    }

    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit(0)];
        let mut counter = 0;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        loop {
            let start = usize::from(p.is_some());
            let lits = self.clauses[confl].lits.clone();
            for &q in &lits[start..] {
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(q.var());
                    if self.level[v] == self.decision_level() {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var() as usize] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            self.seen[lit.var() as usize] = false;
            counter -= 1;
            if counter == 0 {
                break;
            }
            confl = self.reason[lit.var() as usize].expect("implied literal has a reason");
        }
        learnt[0] = !p.unwrap();
        for l in &learnt[1..] {
            self.seen[l.var() as usize] = false;
        }
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var() as usize] > self.level[learnt[max_i].var() as usize] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].var() as usize];
        }
        self.bump *= 1.05;
        (learnt, bt)
    }

    /// Assumptions responsible for `p` (the negation of a failed assumption)
    /// being true.
    fn analyze_final(&mut self, failed: Lit) -> Vec<Lit> {
        let mut out = vec![failed];
        let p = !failed;
        if self.decision_level() == 0 || self.level[p.var() as usize] == 0 {
            return out;
        }
        self.seen[p.var() as usize] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = lit.var() as usize;
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                None => {
                    if lit != failed {
                        out.push(lit);
                    }
                }
                Some(ci) => {
                    for k in 1..self.clauses[ci].lits.len() {
                        let q = self.clauses[ci].lits[k];
                        if self.level[q.var() as usize] > 0 {
                            self.seen[q.var() as usize] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[p.var() as usize] = false;
        out
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        let v = match self.branching {
            Branching::Ordered => self
                .order
                .iter()
                .copied()
                .find(|&v| self.values[v as usize] == Value::Unassigned)?,
            Branching::Activity => loop {
                let v = self.heap.pop(&self.activity)?;
                if self.values[v as usize] == Value::Unassigned {
                    break v;
                }
            },
        };
        Some(Lit::new(v, self.polarity[v as usize]))
    }

    /// Solves under `assumptions`, which must reference existing variables.
    pub fn solve(&mut self, assumptions: &[Lit]) -> SatOutcome {
        self.stats.solves += 1;
        for a in assumptions {
            self.ensure_vars(a.var());
        }
        self.cancel_until(0);
        if !self.ok {
            return SatOutcome::Unsat(Vec::new());
        }
        let mut conflicts_since_restart = 0u64;
        let mut restart_index = 0u32;
        let mut restart_limit = 100 * luby(restart_index);
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_since_restart += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SatOutcome::Unsat(Vec::new());
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(first, Some(ci));
                }
                continue;
            }
            if conflicts_since_restart >= restart_limit {
                conflicts_since_restart = 0;
                restart_index += 1;
                restart_limit = 100 * luby(restart_index);
                self.cancel_until(0);
                continue;
            }
            let level = self.decision_level() as usize;
            if level < assumptions.len() {
                let a = assumptions[level];
                match self.value(a) {
                    Value::True => self.trail_lim.push(self.trail.len()),
                    Value::False => {
                        let failed = self.analyze_final(a);
                        self.cancel_until(0);
                        return SatOutcome::Unsat(failed);
                    }
                    Value::Unassigned => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(a, None);
                    }
                }
                continue;
            }
            match self.pick_branch() {
                None => {
                    let values = (1..=self.num_vars).map(|v| self.values[v] == Value::True).collect();
                    let model = Assignment::from_values(values);
                    debug_assert!(self.original.satisfied_by(&model), "model violates a clause");
                    self.cancel_until(0);
                    return SatOutcome::Sat(model);
                }
                Some(lit) => {
                    self.stats.decisions += 1;
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(lit, None);
                }
            }
        }
    }

    /// Deletion-based minimization: tries dropping each literal of `core` in
    /// order and keeps the drop whenever the rest stays unsatisfiable. The
    /// result is 1-minimal.
    pub fn minimize_core(&mut self, core: &[Lit]) -> Result<Vec<Lit>, SatError> {
        if self.solve(core).is_sat() {
            return Err(SatError::MinimizeOnSat);
        }
        let mut current = core.to_vec();
        let mut i = 0;
        while i < current.len() {
            let mut candidate = current.clone();
            candidate.remove(i);
            if self.solve(&candidate).is_sat() {
                i += 1;
            } else {
                current = candidate;
            }
        }
        Ok(current)
    }

    /// Returns a model that differs from every model previously returned by
    /// this method on at least one `projection` variable, or UNSAT once they
    /// are exhausted. Each call first blocks the previous model.
    pub fn next_model(&mut self, projection: &[Var], assumptions: &[Lit]) -> SatOutcome {
        if let Some(prev) = self.last_model.take() {
            let block: Vec<Lit> = projection.iter().map(|&v| Lit::new(v, !prev.value(v))).collect();
            self.add_clause(&block);
        }
        let out = self.solve(assumptions);
        if let SatOutcome::Sat(m) = &out {
            self.last_model = Some(m.clone());
        }
        out
    }

    /// Every clause added so far, as given.
    pub fn clause_db(&self) -> &ClauseDb {
        &self.original
    }
}

fn luby(mut i: u32) -> u64 {
    // Position i (0-based) of 1 1 2 1 1 2 4 1 1 2 ...
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < u64::from(i) + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = u64::from(i);
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    i = seq;
    1u64 << i
}

/// Max-heap of variables keyed by activity, ties broken by order rank.
#[derive(Default)]
struct VarHeap {
    heap: Vec<Var>,
    pos: Vec<Option<usize>>,
    rank: Vec<usize>,
}

impl VarHeap {
    fn new(num_vars: usize, rank: Vec<usize>) -> Self {
        VarHeap {
            heap: Vec::with_capacity(num_vars),
            pos: vec![None; num_vars + 1],
            rank,
        }
    }

    fn better(&self, a: Var, b: Var, act: &[f64]) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && self.rank[a as usize] < self.rank[b as usize])
    }

    fn insert(&mut self, v: Var, act: &[f64]) {
        if self.pos.len() <= v as usize || self.pos[v as usize].is_some() {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = Some(i);
        self.sift_up(i, act);
    }

    fn increase(&mut self, v: Var, act: &[f64]) {
        if let Some(Some(i)) = self.pos.get(v as usize) {
            self.sift_up(*i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<Var> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.pos[self.heap[0] as usize] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.better(self.heap[i], self.heap[parent], act) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut best = i;
            if l < self.heap.len() && self.better(self.heap[l], self.heap[best], act) {
                best = l;
            }
            if r < self.heap.len() && self.better(self.heap[r], self.heap[best], act) {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.pos[self.heap[a] as usize] = Some(a);
        self.pos[self.heap[b] as usize] = Some(b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solver(clauses: &[&[i64]]) -> Solver {
        let mut s = Solver::new();
        for c in clauses {
            let lits: Vec<Lit> = c.iter().map(|&l| Lit::from_dimacs(l)).collect();
            s.add_clause(&lits);
        }
        s
    }

    #[test]
    fn unit_clause() {
        let mut s = solver(&[&[1]]);
        match s.solve(&[]) {
            SatOutcome::Sat(m) => assert!(m.value(1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pigeonhole_of_one() {
        let mut s = solver(&[&[1, 2], &[-1], &[-2]]);
        assert_eq!(s.solve(&[]), SatOutcome::Unsat(vec![]));
    }

    #[test]
    fn empty_clause_is_permanent() {
        let mut s = solver(&[&[]]);
        s.add_clause(&[Lit::pos(1)]);
        assert!(!s.solve(&[]).is_sat());
        assert!(!s.solve(&[Lit::pos(1)]).is_sat());
    }

    #[test]
    fn selector_forces_contradiction() {
        // s = 1, a = 2
        let mut s = solver(&[&[-1, 2], &[-2]]);
        match s.solve(&[Lit::pos(1)]) {
            SatOutcome::Unsat(failed) => assert!(failed.iter().all(|l| *l == Lit::pos(1))),
            other => panic!("{other:?}"),
        }
        assert!(s.solve(&[]).is_sat());
    }

    #[test]
    fn minimize_drops_irrelevant_selectors() {
        // selectors 1,2,3; only 2 forces a contradiction on var 4.
        let mut s = solver(&[&[-1, 5], &[-2, 4], &[-4], &[-3, 6]]);
        let core = s.minimize_core(&[Lit::pos(1), Lit::pos(2), Lit::pos(3)]).unwrap();
        assert_eq!(core, vec![Lit::pos(2)]);
        assert_eq!(s.minimize_core(&core).unwrap(), core);
        assert_eq!(s.minimize_core(&[Lit::pos(1)]), Err(SatError::MinimizeOnSat));
    }

    #[test]
    fn enumerate_single_free_var() {
        let mut s = Solver::new();
        s.ensure_vars(1);
        let mut n = 0;
        while s.next_model(&[1], &[]).is_sat() {
            n += 1;
        }
        assert_eq!(n, 2);
    }

    #[test]
    fn enumerate_k_free_vars() {
        for k in 0..6u32 {
            let mut s = Solver::new();
            s.ensure_vars(k);
            let proj: Vec<Var> = (1..=k).collect();
            let mut n = 0;
            while s.next_model(&proj, &[]).is_sat() {
                n += 1;
            }
            assert_eq!(n, 1 << k);
        }
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn activity_branching_agrees() {
        let mut s = solver(&[&[1, 2, 3], &[-1, -2], &[-2, -3], &[-1, -3], &[1, 2]]);
        s.set_branching(Branching::Activity);
        assert!(s.solve(&[]).is_sat());
        s.randomize(7);
        assert!(!s.solve(&[Lit::pos(3)]).is_sat());
        assert!(s.solve(&[Lit::pos(1)]).is_sat());
    }
}
