//! The Fast GLAMOUr: substitutes abstractions only when they are applied,
//! and splits β into a renaming transition for variable arguments and a
//! binding one for everything else, so that environment entries never chain.

use crate::machine::{
    backtrack, bind_argument, current_item, enter_argument, run, Env, Item, MachineKind, RunResult, Stack,
    State, Step, Transition,
};
use crate::terms::{copy_code, rename_free, Code, CodeView, Names, Term, VarId};

/// The guard of `c3`, whose negation is the guard of `s`: `x` is unbound, or
/// bound to an inert item, or bound to an abstraction that is not applied.
fn no_substitution_needed(env: &Env, x: &VarId, stack: &Stack) -> bool {
    match env.lookup(x) {
        None | Some(Item::Var(..)) => true,
        Some(Item::Abs(_)) => stack.is_empty(),
    }
}

/// One transition in place, or `None` (state untouched) on a final state.
pub fn step(names: &mut Names, s: &mut State) -> Option<Step> {
    match s.code.view() {
        CodeView::App(t, u) => Some(enter_argument(s, t, u)),
        CodeView::Abs(x, body) => match s.stack.head() {
            None => backtrack(s, current_item(s), Transition::C2),
            Some(Item::Var(y, args)) if args.is_empty() => {
                let y = y.clone();
                let cost = body.size();
                s.code = rename_in_code(&body, &x, &y);
                s.stack = s.stack.pop().expect("nonempty").1.clone();
                Some(Step::new(Transition::B1, cost))
            }
            Some(_) => Some(bind_argument(s, x, body, Transition::B2)),
        },
        CodeView::Var(x) => {
            if no_substitution_needed(&s.env, &x, &s.stack) {
                return backtrack(s, current_item(s), Transition::C3);
            }
            let Some(Item::Abs(abs)) = s.env.lookup(&x) else {
                unreachable!("guard checked")
            };
            let copy = copy_code(names, abs);
            let cost = copy.size();
            s.code = copy;
            Some(Step::new(Transition::S, cost))
        }
    }
}

/// `u{x←y}`: the free occurrences of `x` replaced by `y`, binders untouched.
///
/// Panics if `y` is a binder of `u`, which the freshness of binders rules out.
pub fn rename_in_code(body: &Code, x: &VarId, y: &VarId) -> Code {
    Code::new(rename_free(body, x, y)).expect("renaming preserves well-naming")
}

pub fn is_final(s: &State) -> bool {
    if !s.dump.is_empty() {
        return false;
    }
    match s.code.view() {
        CodeView::App(..) => false,
        CodeView::Abs(..) => s.stack.is_empty(),
        CodeView::Var(x) => no_substitution_needed(&s.env, &x, &s.stack),
    }
}

pub fn run_fast(names: Names, t: &Term, fuel: u64, trace: bool) -> RunResult {
    run(MachineKind::Fast, names, t, fuel, trace)
}
