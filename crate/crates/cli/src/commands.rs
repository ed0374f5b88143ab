use std::collections::BTreeMap;

use fireball::calculus::{rtl_step, Family, StepKind};
use fireball::machine::{render_row, run as run_machine, DecodedSize, MachineKind, Renderer, RunResult, TraceRow};
use fireball::terms::{alpha_eq, print_with, Lambda, Names, Term};
use fireball::verify::{explosion_csv, explosion_report, lockstep, LockstepOptions, LockstepReport, CSV_HEADER};
use serde_json::{json, Value};

use crate::output::{csv, json as to_json, opt, table, Namer, SCHEMA_VERSION};
use crate::{Config, Engine, Failure, Format, Outcome};

/// A reference derivation, stopped by fuel or by a term outgrowing the budget.
struct OracleRun {
    steps: Vec<(Term, StepKind)>,
    last: Term,
    beta_lambda: u64,
    beta_inert: u64,
    fuel_exhausted: bool,
    too_large: bool,
}

fn oracle(t: &Term, fuel: u64, budget: u64, keep_steps: bool) -> OracleRun {
    let mut names = Names::new();
    let mut o = OracleRun {
        steps: Vec::new(),
        last: t.clone(),
        beta_lambda: 0,
        beta_inert: 0,
        fuel_exhausted: false,
        too_large: t.size() > budget,
    };
    while !o.too_large {
        let Some((next, kind)) = rtl_step(&mut names, &o.last) else {
            break;
        };
        if o.beta_lambda + o.beta_inert == fuel {
            o.fuel_exhausted = true;
            break;
        }
        match kind {
            StepKind::BetaLambda => o.beta_lambda += 1,
            StepKind::BetaInert => o.beta_inert += 1,
        }
        o.too_large = next.size() > budget;
        if keep_steps {
            o.steps.push((next.clone(), kind));
        }
        o.last = next;
    }
    o
}

fn kind_symbol(k: StepKind) -> &'static str {
    match k {
        StepKind::BetaLambda => "βλ",
        StepKind::BetaInert => "βi",
    }
}

/// One evaluation, by a machine or by the oracle.
struct Record {
    engine: Engine,
    // the decoded final state, or the last oracle term, within the budget
    normal_form: Option<Term>,
    size_t0: u64,
    transitions: u64,
    beta: u64,
    beta_lambda: Option<u64>,
    beta_inert: Option<u64>,
    subst: Option<u64>,
    commutative: Option<u64>,
    ram_cost: Option<u64>,
    state_size: Option<u64>,
    decoded_size: DecodedSize,
    fuel_exhausted: bool,
    per_kind: BTreeMap<String, u64>,
}

impl Record {
    fn of_machine(r: &RunResult, budget: u64) -> Record {
        let stats = r.stats(budget);
        Record {
            engine: Engine::Machine(r.machine),
            normal_form: r.decode(budget).ok(),
            size_t0: stats.size_t0,
            transitions: r.counters.total(),
            beta: stats.beta,
            beta_lambda: None,
            beta_inert: None,
            subst: Some(stats.subst),
            commutative: Some(stats.commutative),
            ram_cost: Some(stats.ram_cost),
            state_size: Some(stats.state_size),
            decoded_size: stats.decoded_size,
            fuel_exhausted: stats.fuel_exhausted,
            per_kind: stats.per_kind,
        }
    }

    fn of_oracle(t: &Term, o: &OracleRun) -> Record {
        let beta = o.beta_lambda + o.beta_inert;
        Record {
            engine: Engine::Oracle,
            normal_form: (!o.too_large).then(|| o.last.clone()),
            size_t0: t.size(),
            transitions: beta,
            beta,
            beta_lambda: Some(o.beta_lambda),
            beta_inert: Some(o.beta_inert),
            subst: None,
            commutative: None,
            ram_cost: None,
            state_size: None,
            decoded_size: if o.too_large {
                DecodedSize::Flag(fireball::machine::BUDGET_EXCEEDED)
            } else {
                DecodedSize::Size(o.last.size())
            },
            fuel_exhausted: o.fuel_exhausted,
            per_kind: BTreeMap::new(),
        }
    }

    fn json(&self, namer: &Namer) -> Value {
        json!({
            "engine": self.engine.name(),
            "result": self.normal_form.as_ref().map(|t| show(t, namer)),
            "is_normal_form": self.normal_form.is_some() && !self.fuel_exhausted,
            "size_t0": self.size_t0,
            "transitions": self.transitions,
            "beta": self.beta,
            "beta_lambda": self.beta_lambda,
            "beta_inert": self.beta_inert,
            "subst": self.subst,
            "commutative": self.commutative,
            "ram_cost": self.ram_cost,
            "state_size": self.state_size,
            "decoded_size": self.decoded_size,
            "fuel_exhausted": self.fuel_exhausted,
            "per_kind": self.per_kind,
        })
    }

    fn cells(&self, namer: &Namer) -> Vec<String> {
        vec![
            self.engine.name().to_string(),
            self.transitions.to_string(),
            self.beta.to_string(),
            opt(self.subst),
            opt(self.commutative),
            opt(self.ram_cost),
            opt(self.state_size),
            self.decoded_size.to_string(),
            self.fuel_exhausted.to_string(),
            self.normal_form.as_ref().map_or_else(String::new, |t| show(t, namer)),
        ]
    }
}

const RECORD_HEADER: [&str; 10] = [
    "engine",
    "transitions",
    "beta",
    "subst",
    "commutative",
    "ram_cost",
    "state_size",
    "decoded_size",
    "fuel_exhausted",
    "result",
];

fn show(t: &Term, namer: &Namer) -> String {
    print_with(t, Lambda::Backslash, &|v| namer.name(v))
}

fn evaluate(config: &Config, t: &Term, engine: Engine, trace: bool) -> (Record, Option<Vec<TraceStep>>) {
    match engine {
        Engine::Machine(m) => {
            let r = run_machine(m, Names::new(), t, config.fuel, trace);
            let steps = r.trace.as_ref().map(|rows| {
                rows.iter()
                    .map(|s| TraceStep::State(s.state.clone(), s.transition))
                    .collect()
            });
            (Record::of_machine(&r, config.budget), steps)
        }
        Engine::Oracle => {
            let o = oracle(t, config.fuel, config.budget, trace);
            let steps = trace.then(|| {
                let mut v = vec![TraceStep::Term(t.clone(), None)];
                v.extend(o.steps.iter().map(|(u, k)| TraceStep::Term(u.clone(), Some(*k))));
                v
            });
            (Record::of_oracle(t, &o), steps)
        }
    }
}

enum TraceStep {
    State(fireball::machine::State, Option<fireball::machine::Transition>),
    Term(Term, Option<StepKind>),
}

/// Trace rows. A machine row shows the transition leaving the state; an
/// oracle row shows the step that produced the term.
fn trace_rows(steps: &[TraceStep], namer: &Namer) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let renderer = Renderer {
        lambda: Lambda::Greek,
        namer: &|v| namer.name(v),
    };
    match steps.first() {
        Some(TraceStep::Term(..)) => {
            let rows = steps
                .iter()
                .enumerate()
                .map(|(i, s)| match s {
                    TraceStep::Term(t, k) => vec![
                        i.to_string(),
                        k.map_or("", kind_symbol).to_string(),
                        print_with(t, Lambda::Greek, renderer.namer),
                    ],
                    TraceStep::State(..) => unreachable!("oracle traces hold terms"),
                })
                .collect();
            (vec!["Step", "Kind", "Term"], rows)
        }
        _ => {
            let rows = steps
                .iter()
                .map(|s| match s {
                    TraceStep::State(state, tr) => {
                        let row: TraceRow = render_row(state, *tr, &renderer);
                        vec![row.dump, row.code, row.stack, row.env, row.transition.unwrap_or_default()]
                    }
                    TraceStep::Term(..) => unreachable!("machine traces hold states"),
                })
                .collect();
            (vec!["Dump", "Code", "Stack", "Global Env", "Transition"], rows)
        }
    }
}

fn trace_table(header: &[&str], rows: &[Vec<String>]) -> String {
    if header[0] == "Dump" {
        let rows: Vec<TraceRow> = rows
            .iter()
            .map(|r| TraceRow {
                dump: r[0].clone(),
                code: r[1].clone(),
                stack: r[2].clone(),
                env: r[3].clone(),
                transition: (!r[4].is_empty()).then(|| r[4].clone()),
            })
            .collect();
        TraceRow::table(&rows)
    } else {
        table(header, rows)
    }
}

fn rows_json(header: &[&str], rows: &[Vec<String>]) -> Value {
    let keys: Vec<String> = header.iter().map(|h| h.to_lowercase().replace(' ', "_")).collect();
    rows.iter()
        .map(|r| {
            keys.iter()
                .zip(r)
                .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                .collect::<serde_json::Map<_, _>>()
        })
        .collect()
}

fn fuel_failure<'a>(mut records: impl Iterator<Item = &'a Record>) -> Option<Failure> {
    records
        .any(|r| r.fuel_exhausted)
        .then_some(Failure::FuelExhausted)
}

pub fn run(config: &Config, t: &Term, engines: &[Engine], trace: bool) -> Outcome {
    let namer = Namer::new(t, config.golden);
    let runs: Vec<(Record, Option<Vec<TraceStep>>)> =
        engines.iter().map(|&e| evaluate(config, t, e, trace)).collect();
    let text = match config.format {
        Format::Json => {
            let results: Vec<Value> = runs
                .iter()
                .map(|(r, steps)| {
                    let mut v = r.json(&namer);
                    if let Some(steps) = steps {
                        let (header, rows) = trace_rows(steps, &namer);
                        v["trace"] = rows_json(&header, &rows);
                    }
                    v
                })
                .collect();
            to_json(&json!({
                "schema_version": SCHEMA_VERSION,
                "command": "run",
                "term": t.to_string(),
                "results": results,
            }))
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = runs.iter().map(|(r, _)| r.cells(&namer)).collect();
            csv(&RECORD_HEADER, &rows)
        }
        Format::Table => {
            let mut out = String::new();
            for (i, (r, steps)) in runs.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                if runs.len() > 1 {
                    out.push_str(&format!("== {} ==\n", r.engine.name()));
                }
                if let Some(steps) = steps {
                    let (header, rows) = trace_rows(steps, &namer);
                    out.push_str(&trace_table(&header, &rows));
                    out.push('\n');
                }
                out.push_str(&match &r.normal_form {
                    Some(t) if r.fuel_exhausted => format!("(fuel exhausted) {}", show(t, &namer)),
                    Some(t) => show(t, &namer),
                    None => format!("(result larger than {} nodes)", config.budget),
                });
                out.push('\n');
                let mut pairs = vec![
                    ("engine", r.engine.name().to_string()),
                    ("transitions", r.transitions.to_string()),
                    ("beta", r.beta.to_string()),
                ];
                if let (Some(l), Some(i)) = (r.beta_lambda, r.beta_inert) {
                    pairs.push(("beta_lambda", l.to_string()));
                    pairs.push(("beta_inert", i.to_string()));
                }
                for (key, value) in [
                    ("subst", r.subst),
                    ("commutative", r.commutative),
                    ("ram_cost", r.ram_cost),
                    ("state_size", r.state_size),
                ] {
                    if let Some(v) = value {
                        pairs.push((key, v.to_string()));
                    }
                }
                if !r.per_kind.is_empty() {
                    let kinds: Vec<String> = r.per_kind.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    pairs.push(("per_kind", kinds.join(" ")));
                }
                pairs.push(("decoded_size", r.decoded_size.to_string()));
                pairs.push(("fuel_exhausted", r.fuel_exhausted.to_string()));
                let rows: Vec<Vec<String>> = pairs.into_iter().map(|(k, v)| vec![k.to_string(), v]).collect();
                // key/value lines without a header
                out.extend(table(&["", ""], &rows).lines().skip(1).map(|l| format!("{l}\n")));
            }
            out
        }
    };
    let failure = fuel_failure(runs.iter().map(|(r, _)| r));
    Outcome { text, failure }
}

pub fn trace(config: &Config, t: &Term, engines: &[Engine]) -> Outcome {
    let namer = Namer::new(t, config.golden);
    let runs: Vec<(Record, Vec<TraceStep>)> = engines
        .iter()
        .map(|&e| {
            let (r, steps) = evaluate(config, t, e, true);
            (r, steps.expect("traced runs keep their steps"))
        })
        .collect();
    let text = match config.format {
        Format::Json => {
            let traces: Vec<Value> = runs
                .iter()
                .map(|(r, steps)| {
                    let (header, rows) = trace_rows(steps, &namer);
                    json!({
                        "engine": r.engine.name(),
                        "rows": rows_json(&header, &rows),
                        "stats": r.json(&namer),
                    })
                })
                .collect();
            to_json(&json!({
                "schema_version": SCHEMA_VERSION,
                "command": "trace",
                "term": t.to_string(),
                "traces": traces,
            }))
        }
        Format::Csv => {
            let mut all = Vec::new();
            let mut header = Vec::new();
            for (r, steps) in &runs {
                let (h, rows) = trace_rows(steps, &namer);
                header = h;
                all.extend(rows.into_iter().map(|row| {
                    let mut v = vec![r.engine.name().to_string()];
                    v.extend(row);
                    v
                }));
            }
            let mut h = vec!["engine"];
            h.extend(header);
            csv(&h, &all)
        }
        Format::Table => {
            let mut out = String::new();
            for (i, (r, steps)) in runs.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                if runs.len() > 1 {
                    out.push_str(&format!("== {} ==\n", r.engine.name()));
                }
                let (header, rows) = trace_rows(steps, &namer);
                out.push_str(&trace_table(&header, &rows));
            }
            out
        }
    };
    let failure = fuel_failure(runs.iter().map(|(r, _)| r));
    Outcome { text, failure }
}

pub fn compare(config: &Config, t: &Term, engines: &[Engine]) -> Outcome {
    let namer = Namer::new(t, config.golden);
    let records: Vec<Record> = engines.iter().map(|&e| evaluate(config, t, e, false).0).collect();
    let reference = records
        .iter()
        .find(|r| r.engine == Engine::Oracle)
        .and_then(|r| r.normal_form.clone());
    let agree: Vec<Option<bool>> = records
        .iter()
        .map(|r| match (&reference, &r.normal_form) {
            (Some(a), Some(b)) if !r.fuel_exhausted => Some(alpha_eq(a, b)),
            _ => None,
        })
        .collect();
    let text = match config.format {
        Format::Json => {
            let results: Vec<Value> = records
                .iter()
                .zip(&agree)
                .map(|(r, a)| {
                    let mut v = r.json(&namer);
                    v["agrees_with_oracle"] = json!(a);
                    v
                })
                .collect();
            to_json(&json!({
                "schema_version": SCHEMA_VERSION,
                "command": "compare",
                "term": t.to_string(),
                "results": results,
            }))
        }
        Format::Csv | Format::Table => {
            let rows: Vec<Vec<String>> = records
                .iter()
                .zip(&agree)
                .map(|(r, a)| {
                    let mut cells = r.cells(&namer);
                    let nf = cells.pop().expect("normal form column");
                    cells.push(opt(*a));
                    cells.push(nf);
                    cells
                })
                .collect();
            let mut header = RECORD_HEADER[..RECORD_HEADER.len() - 1].to_vec();
            header.push("agrees_with_oracle");
            header.push("result");
            if config.format == Format::Csv {
                csv(&header, &rows)
            } else {
                format!("term: {}\n{}", t, table(&header, &rows))
            }
        }
    };
    Outcome { text, failure: None }
}

pub fn family(config: &Config, family: Family, n: u32) -> String {
    let mut names = Names::new();
    let t = family.build(&mut names, n);
    let namer = Namer::new(&t, config.golden);
    let text = show(&t, &namer);
    match config.format {
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "family",
            "family": family.name(),
            "n": n,
            "size": t.size(),
            "term": text,
        })),
        Format::Csv => csv(
            &["family", "n", "size", "term"],
            &[vec![family.name().to_string(), n.to_string(), t.size().to_string(), text]],
        ),
        Format::Table => text + "\n",
    }
}

fn verdict(r: &LockstepReport) -> &'static str {
    if r.passed() {
        "pass"
    } else {
        "FAIL"
    }
}

pub fn verify(config: &Config, terms: &[Term], machines: &[MachineKind]) -> Outcome {
    use rayon::prelude::*;
    let opts = LockstepOptions {
        fuel: config.fuel,
        budget: config.budget,
        check_invariants: true,
    };
    let jobs: Vec<(&Term, MachineKind)> = terms
        .iter()
        .flat_map(|t| machines.iter().map(move |&m| (t, m)))
        .collect();
    let reports: Vec<LockstepReport> = jobs.par_iter().map(|(t, m)| lockstep(t, *m, opts)).collect();
    let failed = reports.iter().filter(|r| !r.passed()).count();
    let single = terms.len() == 1;
    let text = match config.format {
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "verify",
            "runs": reports.len(),
            "failed": failed,
            "reports": reports,
        })),
        Format::Csv | Format::Table => {
            let header = [
                "verdict",
                "machine",
                "transitions",
                "beta",
                "beta_matched",
                "final_shape",
                "fuel_exhausted",
                "degraded",
                "problems",
                "term",
            ];
            let rows: Vec<Vec<String>> = reports
                .iter()
                .filter(|r| single || !r.passed() || config.format == Format::Csv)
                .map(|r| {
                    let problems: Vec<&String> = r
                        .decode_mismatches
                        .iter()
                        .chain(&r.invariant_violations)
                        .chain(&r.bound_violations)
                        .collect();
                    vec![
                        verdict(r).to_string(),
                        r.machine.name().to_string(),
                        r.transitions.to_string(),
                        r.beta.to_string(),
                        r.beta_matched.to_string(),
                        r.final_shape.map_or_else(String::new, |s| format!("{s:?}")),
                        r.fuel_exhausted.to_string(),
                        r.degraded.to_string(),
                        problems.len().to_string(),
                        r.term.clone(),
                    ]
                })
                .collect();
            if config.format == Format::Csv {
                csv(&header, &rows)
            } else {
                let mut out = String::new();
                if !rows.is_empty() {
                    out.push_str(&table(&header, &rows));
                }
                for r in reports.iter().filter(|r| !r.passed()) {
                    for p in r.decode_mismatches.iter().chain(&r.invariant_violations).chain(&r.bound_violations) {
                        out.push_str(&format!("{} on {}: {p}\n", r.machine, r.term));
                    }
                }
                out.push_str(&format!("{} runs, {} failed\n", reports.len(), failed));
                out
            }
        }
    };
    Outcome {
        text,
        failure: (failed > 0).then_some(Failure::Verification),
    }
}

pub fn bench(config: &Config, family: Family, n_max: u32, machines: &[MachineKind]) -> String {
    let rows = explosion_report(family, n_max, machines, config.fuel, config.budget);
    match config.format {
        Format::Csv => explosion_csv(&rows),
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "bench",
            "family": family.name(),
            "rows": rows,
        })),
        Format::Table => {
            let header: Vec<&str> = CSV_HEADER.split(',').collect();
            let cells: Vec<Vec<String>> = explosion_csv(&rows)
                .lines()
                .skip(1)
                .map(|l| l.split(',').map(str::to_string).collect())
                .collect();
            table(&header, &cells)
        }
    }
}
