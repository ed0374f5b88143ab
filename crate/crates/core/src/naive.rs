//! The Easy GLAMOUr without its usefulness side-condition: every variable
//! bound in the environment is substituted, inert terms included. Still a
//! correct implementation, but one whose cost can be exponential in the
//! number of β-steps.

use crate::machine::{
    backtrack, bind_argument, current_item, enter_argument, run, Item, MachineKind, RunResult, State, Step,
    Transition,
};
use crate::terms::{copy_code, Code, CodeView, Names, Term};

/// Reads an item back as code: a renamed copy of an abstraction, or the head
/// variable applied to the read-back arguments, stack head first.
pub fn code_of_item(names: &mut Names, item: &Item) -> Code {
    fn go(names: &mut Names, item: &Item) -> Term {
        match item {
            Item::Abs(c) => copy_code(names, c).into_term(),
            Item::Var(x, args) => {
                let args: Vec<Term> = args.iter().map(|a| go(names, a)).collect();
                Term::apply(Term::var(x.clone()), args)
            }
        }
    }
    Code::new(go(names, item)).expect("read-back copies are well-named")
}

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
            Some(item) => {
                let code = code_of_item(names, item);
                let cost = code.size();
                s.code = code;
                Some(Step::new(Transition::S, cost))
            }
            None => backtrack(s, current_item(s), Transition::C3),
        },
    }
}

pub fn is_final(s: &State) -> bool {
    if !s.dump.is_empty() {
        return false;
    }
    match s.code.view() {
        CodeView::App(..) => false,
        CodeView::Abs(..) => s.stack.is_empty(),
        CodeView::Var(x) => s.env.lookup(&x).is_none(),
    }
}

pub fn run_naive(names: Names, t: &Term, fuel: u64, trace: bool) -> RunResult {
    run(MachineKind::Naive, names, t, fuel, trace)
}
