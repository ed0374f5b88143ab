use std::collections::HashMap;

use thiserror::Error;

use super::{Env, Item, Stack, State};
use crate::terms::{Term, TermKind, VarId};

/// The decoded term would have more nodes than allowed. This is how size
/// explosion shows up, not a bug.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("decoded term has at least {at_least} nodes (budget {budget})")]
pub struct BudgetExceeded {
    pub at_least: u64,
    pub budget: u64,
}

/// `⟨λx.u, ε⟩` decodes to `λx.u`, `⟨x, φ1:…:φn⟩` to `x φ1 … φn`. No
/// unfolding.
pub fn decode_item(item: &Item) -> Term {
    match item {
        Item::Abs(c) => c.term().clone(),
        Item::Var(x, args) => plug_stack(Term::var(x.clone()), args),
    }
}

/// `π⟨t⟩`: the stack head is the first argument.
pub(crate) fn plug_stack(t: Term, stack: &Stack) -> Term {
    Term::apply(t, stack.iter().map(decode_item))
}

/// `D⟨π⟨t⟩⟩` with no unfolding; the innermost dump entry wraps first.
pub(crate) fn plug_context(s: &State, t: Term) -> Term {
    let mut cur = plug_stack(t, &s.stack);
    for e in s.dump.iter() {
        cur = plug_stack(Term::app(e.code.term().clone(), cur), &e.stack);
    }
    cur
}

/// `t↓E`: every variable bound in `E` replaced by its unfolded item.
pub fn unfold(t: &Term, env: &Env, budget: u64) -> Result<Term, BudgetExceeded> {
    Unfolder::new(env, budget).unfold(t)
}

/// `(D⟨π⟨t⟩⟩)↓E`.
pub fn decode_state(s: &State, budget: u64) -> Result<Term, BudgetExceeded> {
    unfold(&plug_context(s, s.code.term().clone()), &s.env, budget)
}

/// Unfolds many terms against one environment, sharing the work.
///
/// Bindings are applied as one simultaneous substitution: the unfolded value
/// of `x` is its decoded item unfolded by the older bindings, which is the
/// same as substituting newest-first because a bound name never occurs in
/// older entries. No renaming is needed either: binders are fresh with
/// respect to the environment, so substituted values cannot be captured.
/// Values are shared between occurrences, so the result is a DAG whose tree
/// size is checked against the budget before anything is built.
pub struct Unfolder<'e> {
    env: &'e Env,
    budget: u64,
    sizes: HashMap<VarId, u64>,
    values: HashMap<VarId, Term>,
}

impl<'e> Unfolder<'e> {
    pub fn new(env: &'e Env, budget: u64) -> Unfolder<'e> {
        Unfolder {
            env,
            budget,
            sizes: HashMap::new(),
            values: HashMap::new(),
        }
    }

    pub fn unfold(&mut self, t: &Term) -> Result<Term, BudgetExceeded> {
        let size = self.unfolded_size(t);
        if size > self.budget {
            return Err(BudgetExceeded {
                at_least: size,
                budget: self.budget,
            });
        }
        Ok(self.build(t))
    }

    pub fn unfold_item(&mut self, item: &Item) -> Result<Term, BudgetExceeded> {
        self.unfold(&decode_item(item))
    }

    /// Size of `t↓E` without building it (saturating).
    pub fn unfolded_size(&mut self, t: &Term) -> u64 {
        match t.kind() {
            TermKind::Var(v) => self.var_size(v),
            TermKind::Abs(_, b) => self.unfolded_size(b).saturating_add(1),
            TermKind::App(l, r) => self
                .unfolded_size(l)
                .saturating_add(self.unfolded_size(r))
                .saturating_add(1),
        }
    }

    fn var_size(&mut self, v: &VarId) -> u64 {
        if let Some(&n) = self.sizes.get(v) {
            return n;
        }
        let n = match self.env.lookup(v) {
            None => 1,
            Some(item) => self.item_size(item),
        };
        self.sizes.insert(v.clone(), n);
        n
    }

    fn item_size(&mut self, item: &Item) -> u64 {
        match item {
            Item::Abs(c) => self.unfolded_size(c),
            Item::Var(x, args) => args.iter().fold(self.var_size(x), |n, a| {
                n.saturating_add(self.item_size(a)).saturating_add(1)
            }),
        }
    }

    fn build(&mut self, t: &Term) -> Term {
        match t.kind() {
            TermKind::Var(v) => self.value(v).unwrap_or_else(|| t.clone()),
            TermKind::Abs(x, b) => {
                let b2 = self.build(b);
                if b2.ptr_eq(b) {
                    t.clone()
                } else {
                    Term::abs(x.clone(), b2)
                }
            }
            TermKind::App(l, r) => {
                let (l2, r2) = (self.build(l), self.build(r));
                if l2.ptr_eq(l) && r2.ptr_eq(r) {
                    t.clone()
                } else {
                    Term::app(l2, r2)
                }
            }
        }
    }

    fn value(&mut self, v: &VarId) -> Option<Term> {
        if let Some(t) = self.values.get(v) {
            return Some(t.clone());
        }
        let item = self.env.lookup(v)?;
        let t = self.build(&decode_item(item));
        self.values.insert(v.clone(), t.clone());
        Some(t)
    }
}
