//! Seeded random terms and exhaustive enumeration of small terms.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::terms::{Names, Term, VarId};

const BINDER_NAMES: [&str; 4] = ["x", "y", "z", "w"];

/// A deterministic generator of random terms over a fixed set of free
/// variables.
pub struct TermGen {
    rng: ChaCha8Rng,
    free: Vec<VarId>,
}

impl TermGen {
    pub fn new(names: &mut Names, seed: u64, free_names: &[&str]) -> TermGen {
        TermGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            free: free_names.iter().map(|n| names.free(n)).collect(),
        }
    }

    pub fn free_vars(&self) -> &[VarId] {
        &self.free
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A term of size between 1 and `max_size`, possibly open.
    pub fn term(&mut self, names: &mut Names, max_size: u64) -> Term {
        let n = self.rng.random_range(1..=max_size.max(1));
        self.sized(names, n, &mut Vec::new(), false)
    }

    /// A closed term of size between 2 and `max_size`.
    pub fn closed_term(&mut self, names: &mut Names, max_size: u64) -> Term {
        let n = self.rng.random_range(2..=max_size.max(2));
        self.sized(names, n, &mut Vec::new(), true)
    }

    /// An inert term `x f1 … fk` of size at most `max_size`, with `x` free.
    pub fn inert(&mut self, names: &mut Names, max_size: u64) -> Term {
        let head = self.free[self.rng.random_range(0..self.free.len())].clone();
        let mut t = Term::var(head);
        while t.size() + 3 <= max_size && self.rng.random_bool(0.5) {
            let room = max_size - t.size() - 1;
            let arg = self.fireball(names, room);
            t = Term::app(t, arg);
        }
        t
    }

    /// An abstraction or an inert term of size at most `max_size` (at least 2).
    pub fn fireball(&mut self, names: &mut Names, max_size: u64) -> Term {
        if max_size >= 2 && self.rng.random_bool(0.5) {
            let n = self.rng.random_range(2..=max_size);
            let x = self.binder(names, 0);
            let mut scope = vec![x.clone()];
            let body = self.sized(names, n - 1, &mut scope, false);
            Term::abs(x, body)
        } else {
            self.inert(names, max_size.max(1))
        }
    }

    fn binder(&mut self, names: &mut Names, depth: usize) -> VarId {
        names.binder(BINDER_NAMES[depth % BINDER_NAMES.len()])
    }

    fn sized(&mut self, names: &mut Names, n: u64, scope: &mut Vec<VarId>, closed: bool) -> Term {
        let no_vars = closed && scope.is_empty();
        if n == 1 {
            let pick = self.rng.random_range(0..scope.len() + if closed { 0 } else { self.free.len() });
            return Term::var(if pick < scope.len() {
                scope[pick].clone()
            } else {
                self.free[pick - scope.len()].clone()
            });
        }
        let app_ok = if no_vars { n >= 5 } else { n >= 3 };
        if !app_ok || self.rng.random_bool(0.4) {
            let x = self.binder(names, scope.len());
            scope.push(x.clone());
            let body = self.sized(names, n - 1, scope, closed);
            scope.pop();
            return Term::abs(x, body);
        }
        let min = if no_vars { 2 } else { 1 };
        let left = self.rng.random_range(min..=n - 1 - min);
        let l = self.sized(names, left, scope, closed);
        let r = self.sized(names, n - 1 - left, scope, closed);
        Term::app(l, r)
    }
}

/// Every term of size at most `max_size` whose free variables are among
/// `free`, one representative per α-class, smaller sizes first.
pub fn enumerate_terms(names: &mut Names, max_size: u64, free: &[VarId]) -> Vec<Term> {
    let binders: Vec<VarId> = (0..max_size as usize)
        .map(|d| names.binder(BINDER_NAMES[d % BINDER_NAMES.len()]))
        .collect();
    let mut memo: HashMap<(u64, usize), Vec<Term>> = HashMap::new();
    let mut out = Vec::new();
    for n in 1..=max_size {
        out.extend(of_size(n, 0, free, &binders, &mut memo));
    }
    out
}

// Terms of size `n` with the first `depth` binders in scope.
fn of_size(
    n: u64,
    depth: usize,
    free: &[VarId],
    binders: &[VarId],
    memo: &mut HashMap<(u64, usize), Vec<Term>>,
) -> Vec<Term> {
    if let Some(v) = memo.get(&(n, depth)) {
        return v.clone();
    }
    let mut out = Vec::new();
    if n == 1 {
        out.extend(binders[..depth].iter().chain(free).cloned().map(Term::var));
    } else {
        if depth < binders.len() {
            for body in of_size(n - 1, depth + 1, free, binders, memo) {
                out.push(Term::abs(binders[depth].clone(), body));
            }
        }
        for left in 1..n - 1 {
            let ls = of_size(left, depth, free, binders, memo);
            let rs = of_size(n - 1 - left, depth, free, binders, memo);
            for l in &ls {
                for r in &rs {
                    out.push(Term::app(l.clone(), r.clone()));
                }
            }
        }
    }
    memo.insert((n, depth), out.clone());
    out
}

/// The seeded corpus used for lockstep checking: `open` random terms of size
/// at most `open_max` over free variables `a`, `b`, `c`, then `closed` random
/// closed terms of size at most `closed_max`.
pub fn seeded_corpus(
    names: &mut Names,
    seed: u64,
    open: usize,
    open_max: u64,
    closed: usize,
    closed_max: u64,
) -> Vec<Term> {
    let mut g = TermGen::new(names, seed, &["a", "b", "c"]);
    let mut out: Vec<Term> = (0..open).map(|_| g.term(names, open_max)).collect();
    out.extend((0..closed).map(|_| g.closed_term(names, closed_max)));
    out
}
