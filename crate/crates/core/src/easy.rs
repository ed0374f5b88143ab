//! The Easy GLAMOUr: substitutes every abstraction it meets in head position
//! of the code, never an inert term.

use crate::machine::{
    backtrack, bind_argument, current_item, enter_argument, run, Item, MachineKind, RunResult, State, Step,
    Transition,
};
use crate::terms::{copy_code, CodeView, Names, Term};

/// One transition in place, or `None` (state untouched) on a final state.
pub fn step(names: &mut Names, s: &mut State) -> Option<Step> {
    match s.code.view() {
        CodeView::App(t, u) => Some(enter_argument(s, t, u)),
        CodeView::Abs(x, body) => {
            if s.stack.is_empty() {
                backtrack(s, current_item(s), Transition::C2)
            } else {
                Some(bind_argument(s, x, body, Transition::M))
            }
        }
        CodeView::Var(x) => match s.env.lookup(&x) {
            Some(Item::Abs(abs)) => {
                let copy = copy_code(names, abs);
                let cost = copy.size();
                s.code = copy;
                Some(Step::new(Transition::S, cost))
            }
            None | Some(Item::Var(..)) => backtrack(s, current_item(s), Transition::C3),
        },
    }
}

pub fn is_final(s: &State) -> bool {
    // with a nonempty dump some transition always applies
    if !s.dump.is_empty() {
        return false;
    }
    match s.code.view() {
        CodeView::App(..) => false,
        CodeView::Abs(..) => s.stack.is_empty(),
        CodeView::Var(x) => !matches!(s.env.lookup(&x), Some(Item::Abs(_))),
    }
}

pub fn run_easy(names: Names, t: &Term, fuel: u64, trace: bool) -> RunResult {
    run(MachineKind::Easy, names, t, fuel, trace)
}
