//! Machines checked against the calculus: lockstep runs, counter bounds and
//! explosion reports.

use std::fmt::Write as _;

use crate::calculus::{rtl_step, Family};
use crate::machine::{
    decode_state, final_shape, run, Counters, DecodedSize, FinalShape, InvariantChecker, Machine,
    MachineKind, RunResult, State, TransitionClass, BUDGET_EXCEEDED,
};
use crate::terms::{alpha_eq, Names, Term};
use crate::machine::Transition;

#[derive(Clone, Copy, Debug)]
pub struct LockstepOptions {
    pub fuel: u64,
    /// Node budget for decoding states and for the oracle's terms.
    pub budget: u64,
    pub check_invariants: bool,
}

impl Default for LockstepOptions {
    fn default() -> Self {
        LockstepOptions {
            fuel: 100_000,
            budget: 1 << 16,
            check_invariants: true,
        }
    }
}

/// The outcome of one lockstep run. A passing report has every violation
/// list empty.
#[derive(Clone, Debug, serde::Serialize)]
pub struct LockstepReport {
    pub term: String,
    pub machine: MachineKind,
    pub transitions: u64,
    pub beta: u64,
    /// β-transitions matched by an oracle step.
    pub beta_matched: u64,
    pub decode_mismatches: Vec<String>,
    pub invariant_violations: Vec<String>,
    pub bound_violations: Vec<String>,
    pub final_shape: Option<FinalShape>,
    pub fuel_exhausted: bool,
    /// Set once a decoded term outgrew the budget; from there on only
    /// counters were checked.
    pub degraded: bool,
}

impl LockstepReport {
    pub fn passed(&self) -> bool {
        self.decode_mismatches.is_empty()
            && self.invariant_violations.is_empty()
            && self.bound_violations.is_empty()
    }
}

/// Runs `machine` on `t` and checks, transition by transition, that
/// β-transitions decode to exactly one right-to-left step of the calculus,
/// that every other transition leaves the decoding unchanged up to α, and
/// that a final state decodes to the oracle's normal form.
pub fn lockstep(t: &Term, machine: MachineKind, opts: LockstepOptions) -> LockstepReport {
    let mut oracle_names = Names::new();
    let mut checker = opts.check_invariants.then(|| InvariantChecker::new(machine, t));
    let mut m = Machine::new(machine, Names::new(), t);
    let mut report = LockstepReport {
        term: t.to_string(),
        machine,
        transitions: 0,
        beta: 0,
        beta_matched: 0,
        decode_mismatches: Vec::new(),
        invariant_violations: Vec::new(),
        bound_violations: Vec::new(),
        final_shape: None,
        fuel_exhausted: false,
        degraded: false,
    };
    // None once the oracle gave up on an oversized term
    let mut oracle = Some(t.clone());
    let mut previous: Option<Transition> = None;
    let mut since_beta = 0u64;
    let t0_size = t.size();

    let check_state = |report: &mut LockstepReport, oracle: &mut Option<Term>, s: &State, what: &str| {
        let Some(expected) = oracle.as_ref() else { return };
        match decode_state(s, opts.budget) {
            Ok(d) => {
                if !alpha_eq(&d, expected) {
                    report
                        .decode_mismatches
                        .push(format!("after {what}: decodes to {d}, expected {expected}"));
                }
            }
            Err(_) => {
                report.degraded = true;
                *oracle = None;
            }
        }
    };

    check_state(&mut report, &mut oracle, m.state(), "compilation");
    if let Some(c) = &mut checker {
        record_violations(&mut report, c, m.state(), m.counters(), 0);
    }
    loop {
        if report.transitions == opts.fuel {
            report.fuel_exhausted = !machine.is_final(m.state());
            break;
        }
        let Some(step) = m.step() else { break };
        report.transitions += 1;
        let n = report.transitions;
        if previous == Some(Transition::S)
            && machine == MachineKind::Fast
            && step.transition.class() != TransitionClass::Beta
        {
            report
                .bound_violations
                .push(format!("transition {n}: substitution followed by {}", step.transition));
        }
        previous = Some(step.transition);
        if step.transition.class() == TransitionClass::Beta {
            report.beta += 1;
            since_beta = 0;
            if let Some(cur) = oracle.take() {
                match rtl_step(&mut oracle_names, &cur) {
                    Some((next, _)) => {
                        report.beta_matched += 1;
                        oracle = (next.size() <= opts.budget).then_some(next);
                        report.degraded |= oracle.is_none();
                    }
                    None => report.decode_mismatches.push(format!(
                        "transition {n} ({}): the oracle term {cur} is normal",
                        step.transition
                    )),
                }
            }
        } else {
            since_beta += 1;
            let c = m.counters();
            let segment_bound = (2 + c.subst + c.beta).saturating_mul(t0_size);
            if machine != MachineKind::Naive && since_beta > segment_bound {
                report
                    .bound_violations
                    .push(format!("transition {n}: {since_beta} overhead transitions since the last β"));
            }
        }
        check_state(&mut report, &mut oracle, m.state(), &format!("transition {n} ({})", step.transition));
        if let Some(c) = &mut checker {
            record_violations(&mut report, c, m.state(), m.counters(), n);
        }
    }

    if !report.fuel_exhausted {
        match final_shape(m.state(), machine) {
            Ok(shape) => report.final_shape = Some(shape),
            Err(e) => report.invariant_violations.push(format!("final state: {e}")),
        }
        if let Some(cur) = &oracle {
            if rtl_step(&mut oracle_names, cur).is_some() {
                report
                    .decode_mismatches
                    .push(format!("final state, but the oracle can still reduce {cur}"));
            }
        }
    }
    let counters = m.counters().clone();
    report
        .bound_violations
        .extend(audit_counters(machine, &counters, t, Some(m.state())));
    report
}

fn record_violations(
    report: &mut LockstepReport,
    checker: &mut InvariantChecker,
    s: &State,
    counters: &Counters,
    n: u64,
) {
    for v in checker.check(s, counters) {
        report.invariant_violations.push(format!("state {n}: {v}"));
    }
}

/// The counter inequalities that hold for `machine` on any run from `t0`.
/// With a final state, the Easy machine's free-occurrence inequality is
/// checked on it too.
pub fn audit_counters(
    machine: MachineKind,
    c: &Counters,
    t0: &Term,
    final_state: Option<&State>,
) -> Vec<String> {
    let size = t0.size();
    let mut out = Vec::new();
    let commutative_bound = (1 + c.subst).saturating_mul(size);
    match machine {
        MachineKind::Easy => {
            let subst_bound = (1 + c.beta).saturating_mul(size);
            if c.subst > subst_bound {
                out.push(format!("subst {} > (1 + beta) * |t0| = {subst_bound}", c.subst));
            }
            if c.commutative > commutative_bound {
                out.push(format!(
                    "commutative {} > (1 + subst) * |t0| = {commutative_bound}",
                    c.commutative
                ));
            }
            if let Some(s) = final_state {
                let bound = t0.free_size() as i128 + size as i128 * c.beta as i128 - c.subst as i128;
                if s.free_size() as i128 > bound {
                    out.push(format!("free size {} > {bound}", s.free_size()));
                }
            }
        }
        MachineKind::Fast => {
            if c.subst > c.beta {
                out.push(format!("subst {} > beta {}", c.subst, c.beta));
            }
            if c.commutative > commutative_bound {
                out.push(format!(
                    "commutative {} > (1 + subst) * |t0| = {commutative_bound}",
                    c.commutative
                ));
            }
        }
        MachineKind::Naive => {}
    }
    out
}

/// [`audit_counters`] on a finished run.
pub fn audit_bounds(result: &RunResult) -> Vec<String> {
    audit_counters(result.machine, &result.counters, &result.t0, Some(&result.final_state))
}

/// One line of an explosion report.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct ExplosionRow {
    pub family: Family,
    pub n: u32,
    pub machine: MachineKind,
    pub size_t0: u64,
    pub beta: u64,
    pub subst: u64,
    pub commutative: u64,
    pub ram_cost: u64,
    pub state_size: u64,
    pub decoded_size: DecodedSize,
    pub fuel_exhausted: bool,
}

/// Runs every machine on the first `n_max` members of a family.
pub fn explosion_report(
    family: Family,
    n_max: u32,
    machines: &[MachineKind],
    fuel: u64,
    budget: u64,
) -> Vec<ExplosionRow> {
    let mut rows = Vec::new();
    for n in 1..=n_max {
        for &machine in machines {
            let mut names = Names::new();
            let t = family.build(&mut names, n);
            let r = run(machine, names, &t, fuel, false);
            let stats = r.stats(budget);
            rows.push(ExplosionRow {
                family,
                n,
                machine,
                size_t0: stats.size_t0,
                beta: stats.beta,
                subst: stats.subst,
                commutative: stats.commutative,
                ram_cost: stats.ram_cost,
                state_size: stats.state_size,
                decoded_size: stats.decoded_size,
                fuel_exhausted: stats.fuel_exhausted,
            });
        }
    }
    rows
}

pub const CSV_HEADER: &str =
    "family,n,machine,size_t0,beta,subst,commutative,ram_cost,state_size,decoded_size_or_flag";

pub fn explosion_csv(rows: &[ExplosionRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let decoded = if r.fuel_exhausted {
            "fuel_exhausted".to_string()
        } else {
            r.decoded_size.to_string()
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.family, r.n, r.machine, r.size_t0, r.beta, r.subst, r.commutative, r.ram_cost, r.state_size, decoded
        )
        .unwrap();
    }
    out
}

/// Whether a decoded size column entry is the budget flag.
pub fn is_budget_flag(d: &DecodedSize) -> bool {
    matches!(d, DecodedSize::Flag(f) if *f == BUDGET_EXCEEDED)
}
