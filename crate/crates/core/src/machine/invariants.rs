//! Checkable forms of the machine invariants: names, fireball items,
//! subterms, contextual decoding, and the two counting measures.

use std::collections::{HashMap, HashSet};
use std::fmt;

use super::decode::{plug_context, Unfolder};
use super::{Counters, Item, MachineKind, Stack, State};
use crate::terms::{skeleton_equal, skeleton_mix, CodeView, FireballClass, Names, Term, TermKind, VarId};

/// A broken invariant. Reachable states never produce one.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum Violation {
    Name(String),
    FireballItem(String),
    Subterm(String),
    ContextualDecoding(String),
    FreeOccurrences { free_size: u64, bound: i128 },
    CommutativeMeasure { measure: u64, bound: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Name(m) => write!(f, "name invariant: {m}"),
            Violation::FireballItem(m) => write!(f, "fireball item: {m}"),
            Violation::Subterm(m) => write!(f, "subterm invariant: {m}"),
            Violation::ContextualDecoding(m) => write!(f, "contextual decoding: {m}"),
            Violation::FreeOccurrences { free_size, bound } => {
                write!(f, "free occurrences: {free_size} > {bound}")
            }
            Violation::CommutativeMeasure { measure, bound } => {
                write!(f, "commutative measure: {measure} > {bound}")
            }
        }
    }
}

/// Checks states reached from one initial term.
///
/// Environment bindings never change once made, so each one is checked when
/// it first shows up; a violation inside the environment is reported once,
/// on the first state holding it.
pub struct InvariantChecker {
    machine: MachineKind,
    t0_size: u64,
    t0_free_size: u64,
    skeletons: HashMap<u64, Vec<Term>>,
    decode_budget: u64,
    log: EnvLog,
}

// What is known about the oldest bindings of the last environment checked.
#[derive(Default)]
struct EnvLog {
    // bound variables, oldest first
    bound: Vec<VarId>,
    // every variable occurring in, bound by, or bound inside the bindings
    vars: HashSet<VarId>,
    // abstraction binders inside the bound items
    binders: HashSet<VarId>,
}

/// Budget for the decoding done by the fireball-item and contextual-decoding
/// checks; larger states are checked structurally only.
pub const CHECK_BUDGET: u64 = 1 << 14;

impl InvariantChecker {
    pub fn new(machine: MachineKind, t0: &Term) -> InvariantChecker {
        let mut skeletons: HashMap<u64, Vec<Term>> = HashMap::new();
        record_abs_skeletons(t0, &mut |h, t| {
            let bucket = skeletons.entry(h).or_default();
            if !bucket.iter().any(|u| skeleton_equal(u, t)) {
                bucket.push(t.clone());
            }
        });
        InvariantChecker {
            machine,
            t0_size: t0.size(),
            t0_free_size: t0.free_size(),
            skeletons,
            decode_budget: CHECK_BUDGET,
            log: EnvLog::default(),
        }
    }

    pub fn with_decode_budget(mut self, budget: u64) -> InvariantChecker {
        self.decode_budget = budget;
        self
    }

    pub fn check(&mut self, s: &State, counters: &Counters) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut unfolder = Unfolder::new(&s.env, self.decode_budget);
        self.check_new_bindings(s, &mut unfolder, &mut out);
        self.check_names(s, &mut out);
        let mut top: Vec<&Item> = s.stack.iter().collect();
        for e in s.dump.iter() {
            top.extend(e.stack.iter());
        }
        for item in top {
            self.check_item(s, item, &mut unfolder, &mut out);
        }
        if self.machine != MachineKind::Naive {
            let mut visit = |t: &Term| self.check_subterms(t, &mut out);
            visit(&s.code);
            for e in s.dump.iter() {
                visit(&e.code);
                for_each_item_code(&e.stack, &mut visit);
            }
            for_each_item_code(&s.stack, &mut visit);
        }
        self.check_context(s, &mut out);
        if self.machine == MachineKind::Easy {
            let bound = self.t0_free_size as i128 + self.t0_size as i128 * counters.beta as i128
                - counters.subst as i128;
            if s.free_size() as i128 > bound {
                out.push(Violation::FreeOccurrences {
                    free_size: s.free_size(),
                    bound,
                });
            }
        }
        if self.machine != MachineKind::Naive {
            let measure = counters.commutative.saturating_add(s.commutative_size());
            let bound = (1 + counters.subst).saturating_mul(self.t0_size);
            if measure > bound {
                out.push(Violation::CommutativeMeasure { measure, bound });
            }
        }
        out
    }

    /// Checks the bindings added since the last call, or all of them if the
    /// environment is not an extension of the last one.
    fn check_new_bindings(&mut self, s: &State, unfolder: &mut Unfolder, out: &mut Vec<Violation>) {
        let known = self.log.bound.len();
        let extends = known <= s.env.len()
            && (known == 0 || s.env.binding(known - 1).is_some_and(|(x, _)| *x == self.log.bound[known - 1]));
        if !extends {
            self.log = EnvLog::default();
        }
        for i in self.log.bound.len()..s.env.len() {
            let (x, item) = s.env.binding(i).expect("index within the environment");
            let mut scan = Scan::default();
            scan.item(item);
            if self.log.vars.contains(x) || scan.occurrences.contains_key(x) || scan.binders.contains_key(x) {
                out.push(Violation::Name(format!("environment binding {x:?} is not fresh")));
            }
            for b in &scan.duplicated {
                out.push(Violation::Name(format!("{b:?} binds two abstractions")));
            }
            for (b, inside) in &scan.binders {
                if self.log.binders.contains(b) {
                    out.push(Violation::Name(format!("{b:?} binds two abstractions")));
                } else if self.log.vars.contains(b) || scan.occurrences.get(b).copied().unwrap_or(0) != *inside {
                    out.push(Violation::Name(format!("{b:?} occurs outside its abstraction")));
                }
            }
            for v in scan.occurrences.keys() {
                if self.log.binders.contains(v) {
                    out.push(Violation::Name(format!("{v:?} occurs outside its abstraction")));
                }
            }
            if self.machine == MachineKind::Fast {
                if let Item::Var(y, args) = item {
                    if args.is_empty() {
                        out.push(Violation::FireballItem(format!("{x:?} is bound to the bare variable {y:?}")));
                    }
                }
            }
            self.check_item(s, item, unfolder, out);
            if self.machine != MachineKind::Naive {
                let mut visit = |t: &Term| self.check_subterms(t, out);
                match item {
                    Item::Abs(c) => visit(c),
                    Item::Var(_, args) => for_each_item_code(args, &mut visit),
                }
            }
            self.log.bound.push(x.clone());
            self.log.vars.insert(x.clone());
            self.log.vars.extend(scan.occurrences.into_keys());
            self.log.vars.extend(scan.binders.keys().cloned());
            self.log.binders.extend(scan.binders.into_keys());
        }
    }

    /// Every variable occurrence (item heads included) and binder must
    /// respect the name discipline: abstraction binders are pairwise
    /// distinct, occur only in their bodies, and are never bound in the
    /// environment; an environment binding `[x←φ]` has `x` fresh for `φ` and
    /// for all older bindings. This checks code, stack and dump against the
    /// environment already logged.
    fn check_names(&self, s: &State, out: &mut Vec<Violation>) {
        let mut scan = Scan::default();
        scan.term(&s.code);
        scan.stack(&s.stack);
        for e in s.dump.iter() {
            scan.term(&e.code);
            scan.stack(&e.stack);
        }
        for x in &scan.duplicated {
            out.push(Violation::Name(format!("{x:?} binds two abstractions")));
        }
        for (x, inside) in &scan.binders {
            if self.log.binders.contains(x) {
                out.push(Violation::Name(format!("{x:?} binds two abstractions")));
            }
            if s.env.lookup(x).is_some() {
                out.push(Violation::Name(format!(
                    "{x:?} is both an abstraction binder and bound in the environment"
                )));
            } else if self.log.vars.contains(x) || scan.occurrences.get(x).copied().unwrap_or(0) != *inside {
                out.push(Violation::Name(format!("{x:?} occurs outside its abstraction")));
            }
        }
        for v in scan.occurrences.keys() {
            if self.log.binders.contains(v) && !scan.binders.contains_key(v) {
                out.push(Violation::Name(format!("{v:?} occurs outside its abstraction")));
            }
        }
    }

    fn check_item(&self, s: &State, item: &Item, unfolder: &mut Unfolder, out: &mut Vec<Violation>) {
        self.check_item_shape(s, item, out);
        let Ok(t) = unfolder.unfold_item(item) else {
            return;
        };
        let class = t.classify();
        let ok = match item {
            Item::Abs(_) => class == FireballClass::Abstraction,
            Item::Var(x, args) => match self.machine {
                MachineKind::Fast if args.is_empty() && matches!(s.env.lookup(x), Some(Item::Abs(_))) => {
                    class == FireballClass::Abstraction
                }
                _ => class == FireballClass::Inert,
            },
        };
        if !ok {
            out.push(Violation::FireballItem(format!("{item:?} decodes to {t} ({class:?})")));
        }
    }

    fn check_item_shape(&self, s: &State, item: &Item, out: &mut Vec<Violation>) {
        match item {
            Item::Abs(c) => {
                if !c.is_abs() {
                    out.push(Violation::FireballItem(format!("abstraction item holds {c}")));
                }
            }
            Item::Var(x, args) => {
                if let Some(Item::Abs(_)) = s.env.lookup(x) {
                    if self.machine != MachineKind::Fast || !args.is_empty() {
                        out.push(Violation::FireballItem(format!(
                            "{item:?} has a head bound to an abstraction"
                        )));
                    }
                }
                for a in args.iter() {
                    self.check_item_shape(s, a, out);
                }
            }
        }
    }

    fn check_subterms(&self, t: &Term, out: &mut Vec<Violation>) {
        record_abs_skeletons(t, &mut |h, abs| {
            let found = self
                .skeletons
                .get(&h)
                .is_some_and(|b| b.iter().any(|u| skeleton_equal(u, abs)));
            if !found {
                out.push(Violation::Subterm(format!("{abs} is not a subterm of the initial term")));
            }
        });
    }

    fn check_context(&self, s: &State, out: &mut Vec<Violation>) {
        let hole = Names::new().binder("□");
        let ctx = plug_context(s, Term::var(hole.clone()));
        let Ok(ctx) = Unfolder::new(&s.env, self.decode_budget).unfold(&ctx) else {
            return;
        };
        if let Err(m) = right_context_shape(&ctx, &hole) {
            out.push(Violation::ContextualDecoding(m));
        }
    }
}

/// Checks the invariants of a state reached from `t0`. The subterm clause is
/// skipped for the naive machine, the free-occurrence inequality applies to
/// the Easy machine only.
pub fn check_state_invariants(
    s: &State,
    t0: &Term,
    counters: &Counters,
    machine: MachineKind,
) -> Vec<Violation> {
    InvariantChecker::new(machine, t0).check(s, counters)
}

fn for_each_item_code(stack: &Stack, f: &mut dyn FnMut(&Term)) {
    for item in stack.iter() {
        match item {
            Item::Abs(c) => f(c),
            Item::Var(_, args) => for_each_item_code(args, f),
        }
    }
}

/// Calls `f` with the skeleton hash of every abstraction sub-term, in one
/// bottom-up pass.
fn record_abs_skeletons(t: &Term, f: &mut dyn FnMut(u64, &Term)) -> u64 {
    match t.kind() {
        TermKind::Var(_) => skeleton_mix(0, 0, 0),
        TermKind::Abs(_, b) => {
            let h = skeleton_mix(1, record_abs_skeletons(b, f), 0);
            f(h, t);
            h
        }
        TermKind::App(l, r) => {
            let hl = record_abs_skeletons(l, f);
            let hr = record_abs_skeletons(r, f);
            skeleton_mix(2, hl, hr)
        }
    }
}

// Variable occurrences and abstraction binders of a piece of a state.
#[derive(Default)]
struct Scan {
    occurrences: HashMap<VarId, u64>,
    // occurrences inside each binder's body
    binders: HashMap<VarId, u64>,
    duplicated: Vec<VarId>,
}

impl Scan {
    fn term(&mut self, t: &Term) {
        match t.kind() {
            TermKind::Var(v) => *self.occurrences.entry(v.clone()).or_default() += 1,
            TermKind::Abs(x, b) => {
                let before = self.occurrences.get(x).copied().unwrap_or(0);
                self.term(b);
                let inside = self.occurrences.get(x).copied().unwrap_or(0) - before;
                if self.binders.insert(x.clone(), inside).is_some() {
                    self.duplicated.push(x.clone());
                }
            }
            TermKind::App(l, r) => {
                self.term(l);
                self.term(r);
            }
        }
    }

    fn item(&mut self, item: &Item) {
        match item {
            Item::Abs(c) => self.term(c),
            Item::Var(x, args) => {
                *self.occurrences.entry(x.clone()).or_default() += 1;
                self.stack(args);
            }
        }
    }

    fn stack(&mut self, s: &Stack) {
        for i in s.iter() {
            self.item(i);
        }
    }
}

/// `R ::= ⟨·⟩ | t R | R f`: the path to the hole enters only right
/// arguments, or left parts whose argument is a fireball, never abstractions.
fn right_context_shape(ctx: &Term, hole: &VarId) -> Result<(), String> {
    fn count(t: &Term, hole: &VarId) -> u64 {
        match t.kind() {
            TermKind::Var(v) => (v == hole) as u64,
            TermKind::Abs(_, b) => count(b, hole),
            TermKind::App(l, r) => count(l, hole) + count(r, hole),
        }
    }
    if count(ctx, hole) != 1 {
        return Err(format!("the hole does not occur exactly once in {ctx}"));
    }
    let mut cur = ctx;
    loop {
        match cur.kind() {
            TermKind::Var(_) => return Ok(()),
            TermKind::Abs(..) => return Err(format!("the hole is under an abstraction in {ctx}")),
            TermKind::App(l, r) => {
                if count(r, hole) == 1 {
                    cur = r;
                } else if r.is_fireball() {
                    cur = l;
                } else {
                    return Err(format!("{r} is not a fireball in {ctx}"));
                }
            }
        }
    }
}

/// The shapes a final state may have.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalShape {
    /// `(ε, λx.u, ε, E)`.
    UnappliedAbstraction,
    /// `(ε, x, π, E)` with `x` unbound or bound to an inert item.
    InertHead,
    /// `(ε, x, ε, E)` with `x` bound to an abstraction (Fast machine only).
    OnDemandAbstraction,
}

/// Classifies a state on which `machine` cannot step; an error means the
/// machine is stuck on a state that is not a legitimate final state.
pub fn final_shape(s: &State, machine: MachineKind) -> Result<FinalShape, String> {
    if !s.dump.is_empty() {
        return Err("stuck with a nonempty dump".into());
    }
    match s.code.view() {
        CodeView::App(..) => Err("stuck on an application".into()),
        CodeView::Abs(..) if s.stack.is_empty() => Ok(FinalShape::UnappliedAbstraction),
        CodeView::Abs(..) => Err("stuck on an applied abstraction".into()),
        CodeView::Var(x) => match (s.env.lookup(&x), machine) {
            (None, _) => Ok(FinalShape::InertHead),
            (Some(Item::Var(..)), MachineKind::Easy | MachineKind::Fast) => Ok(FinalShape::InertHead),
            (Some(Item::Abs(_)), MachineKind::Fast) if s.stack.is_empty() => {
                Ok(FinalShape::OnDemandAbstraction)
            }
            _ => Err(format!("stuck on the bound variable {x:?}")),
        },
    }
}
