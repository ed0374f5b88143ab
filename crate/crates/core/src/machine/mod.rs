//! The substrate shared by the machines: items, stacks, dumps, the global
//! environment, states, counters, compilation, decoding, and invariant
//! checking.
//!
//! A state is `(D, code, π, E)`. Stacks and dumps are persistent lists, the
//! environment is an append-only vector with a hash index, and machines step
//! a state in place.

mod decode;
mod invariants;
mod list;
mod render;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::terms::{fresh_rename, Code, CodeView, Names, Term, VarId};
use crate::{easy, fast, naive};

pub use decode::{decode_item, decode_state, unfold, BudgetExceeded, Unfolder};
pub use invariants::{check_state_invariants, final_shape, FinalShape, InvariantChecker, Violation};
pub use list::{Iter, List};
pub use render::{render_dump, render_env, render_item, render_row, render_stack, Renderer, TraceRow};

/// A stack entry: `⟨λx.u, ε⟩` or `⟨x, π⟩`.
#[derive(Clone)]
pub enum Item {
    Abs(Code),
    Var(VarId, Stack),
}

impl Item {
    /// `⟨x, ε⟩`.
    pub fn var(x: VarId) -> Item {
        Item::Var(x, Stack::new())
    }

    /// Number of constructors of the item read as a term.
    pub fn footprint(&self) -> u64 {
        match self {
            Item::Abs(c) => c.size(),
            Item::Var(_, args) => args.iter().fold(1, |n, a| n.saturating_add(1 + a.footprint())),
        }
    }

    pub fn free_size(&self) -> u64 {
        match self {
            Item::Abs(_) => 0,
            Item::Var(_, args) => 1 + stack_free_size(args),
        }
    }
}

impl fmt::Debug for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_item(self, &Renderer::default()))
    }
}

/// Arguments of the current code; the head is the first argument.
pub type Stack = List<Item>;

/// A saved application context `(t, π)`: `t` is the left part of an
/// application whose right part is being evaluated.
#[derive(Clone, Debug)]
pub struct DumpEntry {
    pub code: Code,
    pub stack: Stack,
}

/// The head is the innermost saved context.
pub type Dump = List<DumpEntry>;

fn stack_free_size(s: &Stack) -> u64 {
    s.iter().map(Item::free_size).sum()
}

fn stack_footprint(s: &Stack) -> u64 {
    s.iter().fold(0, |n, i| n.saturating_add(i.footprint()))
}

/// The global environment `[x←φ] : E`, with constant-time lookup.
#[derive(Clone, Default)]
pub struct Env {
    // oldest first
    entries: Vec<(VarId, Item)>,
    index: HashMap<VarId, usize>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    /// Adds `[x←φ]` as the newest binding. Returns false, leaving the
    /// environment unchanged, if `x` is already bound.
    pub fn bind(&mut self, x: VarId, item: Item) -> bool {
        if self.index.contains_key(&x) {
            return false;
        }
        self.index.insert(x.clone(), self.entries.len());
        self.entries.push((x, item));
        true
    }

    pub fn lookup(&self, x: &VarId) -> Option<&Item> {
        self.index.get(x).map(|&i| &self.entries[i].1)
    }

    /// The `i`-th oldest binding.
    pub fn binding(&self, i: usize) -> Option<(&VarId, &Item)> {
        self.entries.get(i).map(|(x, item)| (x, item))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Bindings from the newest to the oldest.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (&VarId, &Item)> + ExactSizeIterator {
        self.entries.iter().rev().map(|(x, i)| (x, i))
    }
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.iter()).finish()
    }
}

#[derive(Clone, Debug)]
pub struct State {
    pub dump: Dump,
    pub code: Code,
    pub stack: Stack,
    pub env: Env,
}

impl State {
    /// Measure counting the current code and the codes saved in the dump.
    pub fn commutative_size(&self) -> u64 {
        self.dump
            .iter()
            .fold(self.code.size(), |n, e| n.saturating_add(e.code.size()))
    }

    /// Free variable occurrences not under abstractions, over dump, code and
    /// stack (the environment does not count).
    pub fn free_size(&self) -> u64 {
        let dump: u64 = self
            .dump
            .iter()
            .map(|e| e.code.free_size() + stack_free_size(&e.stack))
            .sum();
        dump + self.code.free_size() + stack_free_size(&self.stack)
    }

    /// Number of constructors held by the state, environment included.
    pub fn footprint(&self) -> u64 {
        let mut n = self.code.size().saturating_add(stack_footprint(&self.stack));
        for e in self.dump.iter() {
            n = n
                .saturating_add(e.code.size())
                .saturating_add(stack_footprint(&e.stack));
        }
        for (_, item) in self.env.iter() {
            n = n.saturating_add(1 + item.footprint());
        }
        n
    }
}

/// `(ε, t, ε, ε)` where `t` is a fresh well-named copy of the input.
pub fn compile(names: &mut Names, t: &Term) -> State {
    State {
        dump: Dump::new(),
        code: fresh_rename(names, t),
        stack: Stack::new(),
        env: Env::new(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MachineKind {
    Easy,
    Fast,
    Naive,
}

impl MachineKind {
    pub const ALL: [MachineKind; 3] = [MachineKind::Easy, MachineKind::Fast, MachineKind::Naive];

    pub fn name(self) -> &'static str {
        match self {
            MachineKind::Easy => "easy",
            MachineKind::Fast => "fast",
            MachineKind::Naive => "naive",
        }
    }

    /// No transition applies.
    pub fn is_final(self, s: &State) -> bool {
        match self {
            MachineKind::Easy => easy::is_final(s),
            MachineKind::Fast => fast::is_final(s),
            MachineKind::Naive => naive::is_final(s),
        }
    }

    pub fn step(self, names: &mut Names, s: &mut State) -> Option<Step> {
        match self {
            MachineKind::Easy => easy::step(names, s),
            MachineKind::Fast => fast::step(names, s),
            MachineKind::Naive => naive::step(names, s),
        }
    }
}

impl fmt::Display for MachineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MachineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<MachineKind, String> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(MachineKind::Easy),
            "fast" => Ok(MachineKind::Fast),
            "naive" => Ok(MachineKind::Naive),
            _ => Err(format!("unknown machine `{s}` (expected easy, fast or naive)")),
        }
    }
}

/// Every transition of the three machines. The Easy and naive machines use
/// `M` as their β-transition; the Fast machine splits it into `B1`
/// (renaming) and `B2` (binding).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Transition {
    C1,
    C2,
    C3,
    M,
    B1,
    B2,
    S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransitionClass {
    Beta,
    Substitution,
    Commutative,
}

impl Transition {
    pub const ALL: [Transition; 7] = [
        Transition::C1,
        Transition::C2,
        Transition::C3,
        Transition::M,
        Transition::B1,
        Transition::B2,
        Transition::S,
    ];

    pub fn class(self) -> TransitionClass {
        match self {
            Transition::M | Transition::B1 | Transition::B2 => TransitionClass::Beta,
            Transition::S => TransitionClass::Substitution,
            Transition::C1 | Transition::C2 | Transition::C3 => TransitionClass::Commutative,
        }
    }

    /// ASCII name, used as a key in machine-readable output.
    pub fn label(self) -> &'static str {
        match self {
            Transition::C1 => "c1",
            Transition::C2 => "c2",
            Transition::C3 => "c3",
            Transition::M => "m",
            Transition::B1 => "b1",
            Transition::B2 => "b2",
            Transition::S => "s",
        }
    }

    /// Name used in traces.
    pub fn symbol(self) -> &'static str {
        match self {
            Transition::B1 => "β1",
            Transition::B2 => "β2",
            t => t.label(),
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One transition and its cost in the RAM model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub transition: Transition,
    pub cost: u64,
}

impl Step {
    pub fn new(transition: Transition, cost: u64) -> Step {
        Step { transition, cost }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub beta: u64,
    pub subst: u64,
    pub commutative: u64,
    per_kind: [u64; 7],
    pub ram_cost: u64,
}

impl Counters {
    pub fn record(&mut self, step: Step) {
        match step.transition.class() {
            TransitionClass::Beta => self.beta += 1,
            TransitionClass::Substitution => self.subst += 1,
            TransitionClass::Commutative => self.commutative += 1,
        }
        self.per_kind[step.transition.index()] += 1;
        self.ram_cost = self.ram_cost.saturating_add(step.cost);
    }

    pub fn total(&self) -> u64 {
        self.beta + self.subst + self.commutative
    }

    pub fn count(&self, t: Transition) -> u64 {
        self.per_kind[t.index()]
    }

    /// Counts of the transitions that occurred, by label.
    pub fn per_kind(&self) -> BTreeMap<&'static str, u64> {
        Transition::ALL
            .iter()
            .filter(|t| self.count(**t) > 0)
            .map(|t| (t.label(), self.count(*t)))
            .collect()
    }
}

/// A machine session: a state, its name supply and its counters.
pub struct Machine {
    kind: MachineKind,
    names: Names,
    state: State,
    counters: Counters,
}

impl Machine {
    /// Compiles `t`.
    pub fn new(kind: MachineKind, mut names: Names, t: &Term) -> Machine {
        let state = compile(&mut names, t);
        Machine::from_state(kind, names, state)
    }

    pub fn from_state(kind: MachineKind, names: Names, state: State) -> Machine {
        Machine {
            kind,
            names,
            state,
            counters: Counters::default(),
        }
    }

    pub fn kind(&self) -> MachineKind {
        self.kind
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    /// Performs one transition; `None` on a final state.
    pub fn step(&mut self) -> Option<Step> {
        let step = self.kind.step(&mut self.names, &mut self.state)?;
        self.counters.record(step);
        Some(step)
    }

    /// Steps until a final state or `fuel` transitions. Returns whether fuel
    /// ran out.
    pub fn run(&mut self, fuel: u64) -> bool {
        for _ in 0..fuel {
            if self.step().is_none() {
                return false;
            }
        }
        !self.kind.is_final(&self.state)
    }

    pub fn into_parts(self) -> (Names, State, Counters) {
        (self.names, self.state, self.counters)
    }
}

/// A state of a trace and the transition taken from it (`None` on the last
/// row).
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub state: State,
    pub transition: Option<Transition>,
}

pub struct RunResult {
    pub machine: MachineKind,
    pub t0: Term,
    pub final_state: State,
    pub counters: Counters,
    pub fuel_exhausted: bool,
    pub trace: Option<Vec<TraceStep>>,
}

impl RunResult {
    pub fn decode(&self, budget: u64) -> Result<Term, BudgetExceeded> {
        decode_state(&self.final_state, budget)
    }

    pub fn stats(&self, budget: u64) -> Stats {
        Stats {
            machine: self.machine.name().to_string(),
            term: self.t0.to_string(),
            size_t0: self.t0.size(),
            beta: self.counters.beta,
            subst: self.counters.subst,
            commutative: self.counters.commutative,
            per_kind: self
                .counters
                .per_kind()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            ram_cost: self.counters.ram_cost,
            state_size: self.final_state.footprint(),
            fuel_exhausted: self.fuel_exhausted,
            decoded_size: match self.decode(budget) {
                Ok(t) => DecodedSize::Size(t.size()),
                Err(_) => DecodedSize::Flag(BUDGET_EXCEEDED),
            },
        }
    }
}

pub const BUDGET_EXCEEDED: &str = "budget_exceeded";

/// Machine-readable summary of a run.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Stats {
    pub machine: String,
    pub term: String,
    pub size_t0: u64,
    pub beta: u64,
    pub subst: u64,
    pub commutative: u64,
    pub per_kind: BTreeMap<String, u64>,
    pub ram_cost: u64,
    pub state_size: u64,
    pub fuel_exhausted: bool,
    pub decoded_size: DecodedSize,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(untagged)]
pub enum DecodedSize {
    Size(u64),
    Flag(&'static str),
}

impl fmt::Display for DecodedSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodedSize::Size(n) => write!(f, "{n}"),
            DecodedSize::Flag(s) => f.write_str(s),
        }
    }
}

/// Compiles `t` and runs `machine` for at most `fuel` transitions, keeping a
/// snapshot of every state if `trace` is set.
pub fn run(machine: MachineKind, names: Names, t: &Term, fuel: u64, trace: bool) -> RunResult {
    let mut m = Machine::new(machine, names, t);
    let mut rows = trace.then(Vec::new);
    let mut fuel_exhausted = false;
    loop {
        let before = rows.as_ref().map(|_| m.state().clone());
        if m.counters().total() == fuel {
            fuel_exhausted = !machine.is_final(m.state());
            if let (Some(rows), Some(state)) = (rows.as_mut(), before) {
                rows.push(TraceStep {
                    state,
                    transition: None,
                });
            }
            break;
        }
        let step = m.step();
        if let (Some(rows), Some(state)) = (rows.as_mut(), before) {
            rows.push(TraceStep {
                state,
                transition: step.map(|s| s.transition),
            });
        }
        if step.is_none() {
            break;
        }
    }
    let (_, final_state, counters) = m.into_parts();
    RunResult {
        machine,
        t0: t.clone(),
        final_state,
        counters,
        fuel_exhausted,
        trace: rows,
    }
}

// Transitions shared by all three machines.

/// `c1`: enter the right subterm of an application.
pub(crate) fn enter_argument(s: &mut State, left: Code, right: Code) -> Step {
    let stack = std::mem::take(&mut s.stack);
    s.dump = s.dump.push(DumpEntry { code: left, stack });
    s.code = right;
    Step::new(Transition::C1, 1)
}

/// `c2`/`c3`: the current code and stack form an item; push it and resume
/// the innermost saved context. `None` if the dump is empty.
pub(crate) fn backtrack(s: &mut State, item: Item, transition: Transition) -> Option<Step> {
    let (entry, rest) = s.dump.pop()?;
    let (entry, rest) = (entry.clone(), rest.clone());
    s.stack = entry.stack.push(item);
    s.code = entry.code;
    s.dump = rest;
    Some(Step::new(transition, 1))
}

/// `m`/`β2`: bind the first argument and continue with the body.
pub(crate) fn bind_argument(s: &mut State, x: VarId, body: Code, transition: Transition) -> Step {
    let (arg, rest) = s.stack.pop().expect("caller checked the stack");
    let (arg, rest) = (arg.clone(), rest.clone());
    let fresh = s.env.bind(x, arg);
    debug_assert!(fresh, "binder already in the environment");
    s.stack = rest;
    s.code = body;
    Step::new(transition, 1)
}

/// The item formed by the current code and stack, when the code is a
/// variable or an abstraction.
pub(crate) fn current_item(s: &State) -> Item {
    match s.code.view() {
        CodeView::Var(x) => Item::Var(x, s.stack.clone()),
        CodeView::Abs(..) => Item::Abs(s.code.clone()),
        CodeView::App(..) => unreachable!("applications are never items"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{alpha_eq, parse};

    #[test]
    fn compile_is_inverted_by_decode() {
        let mut n = Names::new();
        let t = parse(&mut n, "(\\z.z (y z)) \\x.x").unwrap();
        let s = compile(&mut n, &t);
        assert!(s.dump.is_empty() && s.stack.is_empty() && s.env.is_empty());
        assert!(alpha_eq(&decode_state(&s, 1 << 10).unwrap(), &t));
        assert_eq!(s.commutative_size(), t.size());
        assert_eq!(s.free_size(), t.free_size());
    }

    #[test]
    fn env_lookup_and_rebinding() {
        let mut n = Names::new();
        let (x, y) = (n.binder("x"), n.binder("y"));
        let mut e = Env::new();
        assert!(e.lookup(&x).is_none());
        assert!(e.bind(x.clone(), Item::var(y.clone())));
        assert!(e.bind(y.clone(), Item::var(n.free("z"))));
        assert!(!e.bind(x.clone(), Item::var(y.clone())));
        assert!(matches!(e.lookup(&x), Some(Item::Var(h, _)) if *h == y));
        assert_eq!(e.iter().map(|(v, _)| v.clone()).collect::<Vec<_>>(), [y, x]);
    }

    #[test]
    fn counters_add_up() {
        let mut c = Counters::default();
        for t in [Transition::C1, Transition::S, Transition::M, Transition::C1] {
            c.record(Step::new(t, 2));
        }
        assert_eq!((c.beta, c.subst, c.commutative), (1, 1, 2));
        assert_eq!(c.total(), 4);
        assert_eq!(c.ram_cost, 8);
        assert_eq!(c.per_kind().get("c1"), Some(&2));
        assert_eq!(c.per_kind().values().sum::<u64>(), c.total());
    }
}
