//! One test per acceptance criterion. Each prints a single `criterion N: PASS`
//! or `criterion N: FAIL` line with its measurements; run with `--nocapture`
//! to see them.

use std::time::{Duration, Instant};

use fireball::calculus::{
    check_inert_substitution, derivation_profile, evaluate_rtl, gen_gamma, gen_s_applied, gen_t, gen_u, rtl_step,
    StepKind,
};
use fireball::corpus::{enumerate_terms, seeded_corpus, TermGen};
use fireball::machine::{run, Machine, MachineKind, Transition};
use fireball::terms::{alpha_eq, parse, Names, Term};
use fireball::verify::{lockstep, LockstepOptions};
use fireball::DEFAULT_BUDGET;

use Transition::*;

const RUNNING_EXAMPLE: &str = "(\\z.z (y z)) \\x.x";
const SEED: u64 = 2017;

const GOLDEN_TIME_LIMIT: Duration = Duration::from_secs(1);
const CORPUS_TIME_LIMIT: Duration = Duration::from_secs(30);
const CORPUS_OPEN: usize = 500;
const CORPUS_CLOSED: usize = 100;
const CORPUS_MAX_SIZE: u64 = 30;
/// β-steps after which a corpus term counts as divergent; both sides are
/// then compared on this common prefix.
const ORACLE_BETA_FUEL: u64 = 2_000;
/// Oracle terms larger than this stop the oracle; the machine is then
/// compared on the β-steps done so far.
const ORACLE_SIZE_CAP: u64 = 1 << 16;
const MACHINE_FUEL: u64 = 1_000_000;
/// Transitions per lockstep run in the invariant and bound criteria.
const LOCKSTEP_FUEL: u64 = 20_000;
const EXPLOSION_TRANSITIONS_PER_N: u64 = 10;
const EXPLOSION_FOOTPRINT_PER_N: u64 = 16;
const ABS_EXPLOSION_FOOTPRINT_PER_N: u64 = 32;
const PROFILE_NODE_CAP: usize = 10_000;
const INERT_TRIPLES: usize = 200;

fn report(criterion: u32, ok: bool, detail: String) {
    println!("criterion {criterion}: {} | {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn traced_kinds(machine: MachineKind) -> (Vec<Transition>, u64, u64, bool, Duration) {
    let start = Instant::now();
    let mut names = Names::new();
    let t = parse(&mut names, RUNNING_EXAMPLE).unwrap();
    let normal = parse(&mut names, "y \\x.x").unwrap();
    let r = run(machine, names, &t, 1000, true);
    let kinds: Vec<Transition> = r.trace.as_ref().unwrap().iter().filter_map(|s| s.transition).collect();
    let decoded = r.decode(DEFAULT_BUDGET).is_ok_and(|d| alpha_eq(&d, &normal));
    (kinds, r.counters.beta, r.counters.subst, decoded, start.elapsed())
}

#[test]
fn criterion_01_easy_golden_trace() {
    let (kinds, beta, _, decoded, elapsed) = traced_kinds(MachineKind::Easy);
    let ok = kinds == [C1, C2, M, C1, C1, S, C2, C3, S, M] && beta == 2 && decoded && elapsed < GOLDEN_TIME_LIMIT;
    report(1, ok, format!("kinds={kinds:?} beta={beta} decodes_to_normal_form={decoded} time={elapsed:?}"));
}

#[test]
fn criterion_02_fast_golden_trace() {
    let (kinds, beta, subst, decoded, _) = traced_kinds(MachineKind::Fast);
    let (_, _, easy_subst, _, _) = traced_kinds(MachineKind::Easy);
    let tail_ok = kinds.ends_with(&[C3, C3, S, B2]);
    let ok = tail_ok && subst == 1 && easy_subst == 2 && beta == 2 && decoded;
    report(2, ok, format!("kinds={kinds:?} beta={beta} subst={subst} easy_subst={easy_subst}"));
}

/// The oracle's derivation: its length, its last term, and whether it was
/// cut short (divergence suspected or a term too large).
fn oracle(names: &mut Names, t: &Term) -> (u64, Term, bool) {
    let mut cur = t.clone();
    let mut steps = 0;
    while steps < ORACLE_BETA_FUEL && cur.size() <= ORACLE_SIZE_CAP {
        match rtl_step(names, &cur) {
            Some((next, _)) => {
                cur = next;
                steps += 1;
            }
            None => return (steps, cur, false),
        }
    }
    (steps, cur, true)
}

fn corpus(names: &mut Names) -> Vec<Term> {
    seeded_corpus(names, SEED, CORPUS_OPEN, CORPUS_MAX_SIZE, CORPUS_CLOSED, CORPUS_MAX_SIZE)
}

#[test]
fn criterion_03_beta_matching_on_the_corpus() {
    let start = Instant::now();
    let mut names = Names::new();
    let terms = corpus(&mut names);
    let mut failures = Vec::new();
    let mut cut = 0;
    for t in &terms {
        let (len, normal, truncated) = oracle(&mut names, t);
        cut += truncated as usize;
        for machine in MachineKind::ALL {
            let mut m = Machine::new(machine, Names::new(), t);
            if truncated {
                let mut left = MACHINE_FUEL;
                while m.counters().beta < len && left > 0 && m.step().is_some() {
                    left -= 1;
                }
                if m.counters().beta != len {
                    failures.push(format!("{machine} on {t}: {} β vs an oracle prefix of {len}", m.counters().beta));
                }
                continue;
            }
            let exhausted = m.run(MACHINE_FUEL);
            let beta = m.counters().beta;
            let (_, state, _) = m.into_parts();
            let decoded = fireball::machine::decode_state(&state, DEFAULT_BUDGET);
            let same = decoded.as_ref().is_ok_and(|d| alpha_eq(d, &normal));
            if exhausted || beta != len || !same {
                failures.push(format!("{machine} on {t}: beta {beta} vs {len}, decode matches: {same}"));
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && elapsed < CORPUS_TIME_LIMIT;
    report(
        3,
        ok,
        format!(
            "terms={} runs={} failures={} oracle_cut_short={cut} time={elapsed:?} {:?}",
            terms.len(),
            terms.len() * MachineKind::ALL.len(),
            failures.len(),
            failures.first()
        ),
    );
}

#[test]
fn criterion_04_open_size_explosion() {
    let mut problems = Vec::new();
    for n in 1..=8 {
        let mut names = Names::new();
        let t = gen_t(&mut names, n);
        let gamma = gen_gamma(&mut names, n);
        let d = evaluate_rtl(&mut names, &t, 1000);
        if d.len() != n as usize || d.count(StepKind::BetaInert) != n as usize || !alpha_eq(d.result(), &gamma) {
            problems.push(format!("oracle on t_{n}: {} steps", d.len()));
        }
        if gamma.size() < 1 << n {
            problems.push(format!("|gamma_{n}| = {}", gamma.size()));
        }
    }
    let mut worst_transitions = 0f64;
    let mut worst_footprint = 0f64;
    let ns: Vec<u32> = (1..=100).chain((200..=1000).step_by(100)).collect();
    for machine in [MachineKind::Easy, MachineKind::Fast] {
        for &n in &ns {
            let mut names = Names::new();
            let t = gen_t(&mut names, n);
            let mut m = Machine::new(machine, names, &t);
            let mut peak = m.state().footprint();
            while m.step().is_some() {
                peak = peak.max(m.state().footprint());
            }
            let total = m.counters().total();
            worst_transitions = worst_transitions.max(total as f64 / n as f64);
            worst_footprint = worst_footprint.max(peak as f64 / n as f64);
            if total > EXPLOSION_TRANSITIONS_PER_N * n as u64 || peak > EXPLOSION_FOOTPRINT_PER_N * n as u64 {
                problems.push(format!("{machine} on t_{n}: {total} transitions, footprint {peak}"));
            }
        }
    }
    let mut ram = Vec::new();
    for n in 4..=14 {
        let mut names = Names::new();
        let t = gen_t(&mut names, n);
        let r = run(MachineKind::Naive, names, &t, MACHINE_FUEL, false);
        ram.push(r.counters.ram_cost);
    }
    for (i, w) in ram.windows(2).enumerate() {
        if w[1] < 2 * w[0] {
            problems.push(format!("naive ram cost {} -> {} at n={}", w[0], w[1], i + 5));
        }
    }
    report(
        4,
        problems.is_empty(),
        format!(
            "max transitions/n={worst_transitions:.2} max footprint/n={worst_footprint:.2} naive ram n=4..14 {ram:?} problems={problems:?}"
        ),
    );
}

#[test]
fn criterion_05_quadratic_versus_bilinear() {
    let mut problems = Vec::new();
    for n in 1..=20 {
        for (machine, expected_subst) in [(MachineKind::Easy, n as u64), (MachineKind::Fast, 0)] {
            let mut names = Names::new();
            let t = gen_u(&mut names, n);
            let r = run(machine, names, &t, MACHINE_FUEL, false);
            if r.counters.beta != 1 || r.counters.subst != expected_subst {
                problems.push(format!("{machine} on u_{n}: beta {} subst {}", r.counters.beta, r.counters.subst));
            }
        }
    }
    report(5, problems.is_empty(), format!("n=1..20 problems={problems:?}"));
}

fn lockstep_corpus(machines: &[MachineKind]) -> (usize, usize, Vec<String>, Vec<String>) {
    let mut names = Names::new();
    let terms = corpus(&mut names);
    let opts = LockstepOptions {
        fuel: LOCKSTEP_FUEL,
        ..LockstepOptions::default()
    };
    let (mut runs, mut states) = (0, 0);
    let (mut bounds, mut invariants) = (Vec::new(), Vec::new());
    for t in &terms {
        for &machine in machines {
            let r = lockstep(t, machine, opts);
            runs += 1;
            states += r.transitions as usize + 1;
            bounds.extend(r.bound_violations.iter().map(|v| format!("{machine} on {t}: {v}")));
            invariants.extend(r.invariant_violations.iter().map(|v| format!("{machine} on {t}: {v}")));
            invariants.extend(r.decode_mismatches.iter().map(|v| format!("{machine} on {t}: {v}")));
        }
    }
    (runs, states, bounds, invariants)
}

#[test]
fn criterion_06_counter_bounds() {
    let (runs, states, bounds, invariants) = lockstep_corpus(&[MachineKind::Easy, MachineKind::Fast]);
    let free_occurrence: Vec<&String> = invariants.iter().filter(|v| v.contains("free occurrences")).collect();
    let ok = bounds.is_empty() && free_occurrence.is_empty();
    report(
        6,
        ok,
        format!(
            "runs={runs} states={states} bound violations={} free-occurrence violations={} {:?}",
            bounds.len(),
            free_occurrence.len(),
            bounds.first().or(free_occurrence.first().copied())
        ),
    );
}

#[test]
fn criterion_07_invariants() {
    let (runs, states, _, invariants) = lockstep_corpus(&MachineKind::ALL);
    report(
        7,
        invariants.is_empty(),
        format!("runs={runs} states={states} violations={} {:?}", invariants.len(), invariants.first()),
    );
}

#[test]
fn criterion_08_uniform_derivation_lengths() {
    let mut names = Names::new();
    let free = [names.free("a"), names.free("b")];
    let terms = enumerate_terms(&mut names, 10, &free);
    let (mut nonuniform, mut unexplored, mut divergent) = (Vec::new(), 0, 0);
    for t in &terms {
        match derivation_profile(&mut names, t, PROFILE_NODE_CAP) {
            Ok(p) => {
                divergent += p.diverges as usize;
                if !p.is_uniform() {
                    nonuniform.push(format!("{t}: {p:?}"));
                }
            }
            Err(_) => unexplored += 1,
        }
    }
    let ok = terms.len() >= 2000 && nonuniform.is_empty() && unexplored == 0;
    report(
        8,
        ok,
        format!(
            "terms={} divergent={divergent} unexplored={unexplored} nonuniform={} {:?}",
            terms.len(),
            nonuniform.len(),
            nonuniform.first()
        ),
    );
}

#[test]
fn criterion_09_inert_substitution() {
    let mut names = Names::new();
    let mut g = TermGen::new(&mut names, SEED, &["x", "y", "z"]);
    let x = g.free_vars()[0].clone();
    let mut failures = Vec::new();
    for _ in 0..INERT_TRIPLES {
        let t = g.term(&mut names, 10);
        let i = g.inert(&mut names, 6);
        match check_inert_substitution(&mut names, &t, &x, &i) {
            Ok(true) => {}
            other => failures.push(format!("t={t} i={i}: {other:?}")),
        }
    }
    report(9, failures.is_empty(), format!("triples={INERT_TRIPLES} failures={failures:?}"));
}

#[test]
fn criterion_10_abstraction_size_explosion() {
    let mut problems = Vec::new();
    for n in 1..=10 {
        let mut names = Names::new();
        let t = gen_s_applied(&mut names, n);
        let r = run(MachineKind::Fast, names, &t, MACHINE_FUEL, false);
        if r.counters.beta != n as u64 {
            problems.push(format!("s_{n} I: beta {}", r.counters.beta));
        }
        match r.decode(DEFAULT_BUDGET) {
            Ok(d) if d.size() >= 1 << n => {}
            other => problems.push(format!("s_{n} I decodes to {:?}", other.map(|d| d.size()))),
        }
    }
    let start = Instant::now();
    let mut names = Names::new();
    let t = gen_s_applied(&mut names, 30);
    let r = run(MachineKind::Fast, names, &t, MACHINE_FUEL, false);
    let elapsed = start.elapsed();
    let footprint = r.final_state.footprint();
    let decode = r.decode(DEFAULT_BUDGET);
    if r.fuel_exhausted || r.counters.beta != 30 || elapsed >= GOLDEN_TIME_LIMIT {
        problems.push(format!("s_30 I: beta {} in {elapsed:?}", r.counters.beta));
    }
    if footprint > ABS_EXPLOSION_FOOTPRINT_PER_N * 30 {
        problems.push(format!("s_30 I: footprint {footprint}"));
    }
    if decode.is_ok() {
        problems.push("s_30 I decoded within the budget".into());
    }
    report(
        10,
        problems.is_empty(),
        format!(
            "n=30: time={elapsed:?} footprint={footprint} decode={:?} problems={problems:?}",
            decode.map(|d| d.size())
        ),
    );
}
