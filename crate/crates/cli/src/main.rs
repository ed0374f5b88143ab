mod commands;
mod output;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fireball::calculus::Family;
use fireball::machine::MachineKind;
use fireball::terms::{parse, Names, Term};

/// Evaluates terms of the fireball calculus with the Easy GLAMOUr, the Fast
/// GLAMOUr, a naive machine, or the reference right-to-left evaluator.
#[derive(Parser, Debug)]
#[command(name = "fireball", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Which evaluator to use.
    #[arg(long, global = true, value_enum)]
    machine: Option<MachineArg>,

    /// Maximum number of transitions (β-steps for the oracle) per run
    /// [default: 1000000, or 100000 for `verify`].
    #[arg(long, global = true)]
    fuel: Option<u64>,

    /// Largest decoded term, in nodes, before decoding gives up
    /// [default: 4194304, or 65536 for `verify`].
    #[arg(long, global = true)]
    budget: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Seed for generated corpora; FIREBALL_SEED takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Renumber generated names canonically, for reproducible output.
    #[arg(long, global = true)]
    golden: bool,

    /// Read the term from this file (`-` for stdin).
    #[arg(short = 'f', long = "file", global = true)]
    file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a term and print its normal form with statistics.
    Run {
        term: Option<String>,
        /// Print the machine states too.
        #[arg(long)]
        trace: bool,
    },
    /// Print every state of a run.
    Trace { term: Option<String> },
    /// Run every machine and the oracle on a term, side by side.
    Compare { term: Option<String> },
    /// Print a member of a generated family (t, gamma, u, s_applied, r).
    Family { name: Family, n: u32 },
    /// Check machines against the oracle, transition by transition.
    Verify {
        /// Check this many seeded random terms (plus one closed term per five).
        #[arg(long, conflicts_with = "term")]
        corpus: Option<usize>,
        term: Option<String>,
    },
    /// Run machines on the first members of a family.
    Bench { family: Family, n_max: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MachineArg {
    Easy,
    Fast,
    Naive,
    Oracle,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// An abstract machine or the reference evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Machine(MachineKind),
    Oracle,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Machine(m) => m.name(),
            Engine::Oracle => "oracle",
        }
    }
}

/// Settings shared by every subcommand.
pub struct Config {
    pub fuel: u64,
    pub budget: u64,
    pub format: Format,
    pub seed: u64,
    pub golden: bool,
}

/// What a subcommand prints, and whether the process should then fail.
pub struct Outcome {
    pub text: String,
    pub failure: Option<Failure>,
}

impl Outcome {
    fn ok(text: String) -> Outcome {
        Outcome { text, failure: None }
    }
}

pub enum Failure {
    Input(String),
    Verification,
    FuelExhausted,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Verification => 2,
            Failure::FuelExhausted => 3,
        }
    }
}

const MACHINES: [Engine; 3] = [
    Engine::Machine(MachineKind::Easy),
    Engine::Machine(MachineKind::Fast),
    Engine::Machine(MachineKind::Naive),
];

fn engines(arg: Option<MachineArg>, default: &[Engine], all: &[Engine]) -> Vec<Engine> {
    match arg {
        None => default.to_vec(),
        Some(MachineArg::All) => all.to_vec(),
        Some(MachineArg::Easy) => vec![Engine::Machine(MachineKind::Easy)],
        Some(MachineArg::Fast) => vec![Engine::Machine(MachineKind::Fast)],
        Some(MachineArg::Naive) => vec![Engine::Machine(MachineKind::Naive)],
        Some(MachineArg::Oracle) => vec![Engine::Oracle],
    }
}

fn machines_only(engines: Vec<Engine>) -> Result<Vec<MachineKind>, Failure> {
    engines
        .into_iter()
        .map(|e| match e {
            Engine::Machine(m) => Ok(m),
            Engine::Oracle => Err(Failure::Input("the oracle cannot be used with this subcommand".into())),
        })
        .collect()
}

fn read_term(names: &mut Names, arg: Option<String>, file: Option<&PathBuf>) -> Result<Term, Failure> {
    let text = match (arg, file) {
        (Some(_), Some(_)) => return Err(Failure::Input("give the term either inline or with -f, not both".into())),
        (Some(t), None) => t,
        (None, Some(p)) if p.as_os_str() == "-" => read_stdin()?,
        (None, Some(p)) => std::fs::read_to_string(p)
            .map_err(|e| Failure::Input(format!("cannot read {}: {e}", p.display())))?,
        (None, None) => read_stdin()?,
    };
    parse(names, text.trim()).map_err(|e| Failure::Input(format!("parse error: {e}")))
}

fn read_stdin() -> Result<String, Failure> {
    let mut s = String::new();
    std::io::stdin()
        .read_to_string(&mut s)
        .map_err(|e| Failure::Input(format!("cannot read stdin: {e}")))?;
    Ok(s)
}

fn seed(flag: u64) -> Result<u64, Failure> {
    match std::env::var("FIREBALL_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("FIREBALL_SEED is not an unsigned integer: `{v}`"))),
        Err(_) => Ok(flag),
    }
}

fn execute(cli: Cli) -> Result<Outcome, Failure> {
    let verifying = matches!(cli.command, Command::Verify { .. });
    let config = Config {
        fuel: cli
            .fuel
            .unwrap_or(if verifying { 100_000 } else { fireball::DEFAULT_FUEL }),
        budget: cli
            .budget
            .unwrap_or(if verifying { 1 << 16 } else { fireball::DEFAULT_BUDGET }),
        format: cli.format,
        seed: seed(cli.seed)?,
        golden: cli.golden,
    };
    let mut names = Names::new();
    let fast = [Engine::Machine(MachineKind::Fast)];
    let every = [MACHINES.as_slice(), &[Engine::Oracle]].concat();
    match cli.command {
        Command::Run { term, trace } => {
            let t = read_term(&mut names, term, cli.file.as_ref())?;
            Ok(commands::run(&config, &t, &engines(cli.machine, &fast, &every), trace))
        }
        Command::Trace { term } => {
            let t = read_term(&mut names, term, cli.file.as_ref())?;
            Ok(commands::trace(&config, &t, &engines(cli.machine, &fast, &every)))
        }
        Command::Compare { term } => {
            let t = read_term(&mut names, term, cli.file.as_ref())?;
            Ok(commands::compare(&config, &t, &engines(cli.machine, &every, &every)))
        }
        Command::Family { name, n } => Ok(Outcome::ok(commands::family(&config, name, n))),
        Command::Verify { corpus, term } => {
            let machines = machines_only(engines(cli.machine, &MACHINES, &MACHINES))?;
            let terms = match corpus {
                Some(n) => fireball::corpus::seeded_corpus(&mut names, config.seed, n, 30, n / 5, 30),
                None => vec![read_term(&mut names, term, cli.file.as_ref())?],
            };
            Ok(commands::verify(&config, &terms, &machines))
        }
        Command::Bench { family, n_max } => {
            if n_max == 0 {
                return Err(Failure::Input("NMAX must be at least 1".into()));
            }
            let defaults = [Engine::Machine(MachineKind::Easy), Engine::Machine(MachineKind::Fast)];
            let machines = machines_only(engines(cli.machine, &defaults, &MACHINES))?;
            Ok(Outcome::ok(commands::bench(&config, family, n_max, &machines)))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage_error = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(usage_error as u8);
        }
    };
    match execute(cli) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            outcome.failure.map_or(ExitCode::SUCCESS, |f| ExitCode::from(f.code()))
        }
        Err(f) => {
            if let Failure::Input(m) = &f {
                eprintln!("error: {m}");
            }
            ExitCode::from(f.code())
        }
    }
}
