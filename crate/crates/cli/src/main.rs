//! `statecover` command line.
//!
//! Exit codes: 0 success, 1 I/O or parse failure, 2 semantic problem
//! (invalid model, inconsistent or empty suite), 3 suite cap exceeded.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use statecover::generator::{
    enumerate_sequences, generate_ftc_suite, generate_ktc_suite, guard_probe_suite,
};
use statecover::metrics::coverage_report;
use statecover::minimizer::{
    covering_table, minimize_suite, Grouping, Relation, SubsumptionStrategy,
};
use statecover::model::{Provenance, Statechart, TestSuite};
use statecover::parser::{
    export_dot, parse_statechart_unchecked, parse_suite, suite_to_json, ParseError,
};
use statecover::tgraph::build_transition_graph;
use statecover::{GenError, DEFAULT_CAP};

#[derive(Parser)]
#[command(
    name = "statecover",
    version,
    about = "Test generation and coverage for statecharts"
)]
struct Cli {
    /// Print a version banner to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a model parses and is well formed.
    Validate { model: PathBuf },
    /// Generate a test suite as JSON.
    Generate {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Ktc)]
        mode: Mode,
        /// Sequence order for `ktc`.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        /// Longest sequence for `enumerate`.
        #[arg(long, default_value_t = 7, value_parser = clap::value_parser!(u64).range(1..))]
        max_len: u64,
        /// With `ftc`, also emit one guard-false probe per guarded transition.
        #[arg(long)]
        guard_probes: bool,
        /// Upper bound on generated cases.
        #[arg(long, env = "STATECOVER_CAP", default_value_t = DEFAULT_CAP as u64, value_parser = clap::value_parser!(u64).range(1..))]
        cap: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Keep only the cases not covered by another case.
    Minimize {
        suite: PathBuf,
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Rule::Element)]
        rule: Rule,
        #[arg(long, value_enum, default_value_t = Group::Global)]
        group: Group,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Coverage of a suite against a model.
    Report {
        model: PathBuf,
        suite: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        path_bound: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Transition graph (or its order-k sequence graph) in DOT.
    Graph {
        model: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        /// Add the return edge from `tf` to `ti`.
        #[arg(long)]
        augment: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Enumerate,
    Ktc,
    Ftc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Node,
    Transition,
    Element,
}

#[derive(Clone, Copy, ValueEnum)]
enum Group {
    Global,
    ByStart,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(message: impl fmt::Display) -> Self {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }

    fn semantic(message: impl fmt::Display) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        match e {
            GenError::SuiteTooLarge { .. } => Failure {
                code: 3,
                message: e.to_string(),
            },
            other => Failure::semantic(other),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses, validates and flattens a model file.
fn load_model(path: &Path) -> Result<Statechart, Failure> {
    let text = read(path)?;
    let where_ = |e: ParseError| format!("{}:{e}", path.display());
    let sc = parse_statechart_unchecked(&text).map_err(|e| {
        if e.is_syntax() {
            Failure::io(where_(e))
        } else {
            Failure::semantic(where_(e))
        }
    })?;
    let violations = sc.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        return Err(Failure::semantic(format!(
            "{}: model is not well formed\n{}",
            path.display(),
            list.join("\n")
        )));
    }
    sc.flatten()
        .map_err(|e| Failure::semantic(format!("{}: {e}", path.display())))
}

/// Reads a suite and checks every case replays on the model.
fn load_suite(path: &Path, sc: &Statechart) -> Result<TestSuite, Failure> {
    let suite =
        parse_suite(&read(path)?).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    for c in suite.cases() {
        statecover::replay(sc, c)
            .map_err(|e| Failure::semantic(format!("{}: {e}", path.display())))?;
    }
    Ok(suite)
}

fn validate(model: &Path) -> Outcome {
    let sc = load_model(model)?;
    println!(
        "{}: ok ({} states, {} transitions)",
        sc.name(),
        sc.states().count(),
        sc.transition_count()
    );
    Ok(())
}

fn generate(
    model: &Path,
    mode: Mode,
    k: usize,
    max_len: usize,
    probes: bool,
    cap: usize,
    out: Option<&Path>,
) -> Outcome {
    let sc = load_model(model)?;
    let suite = match mode {
        Mode::Enumerate => enumerate_sequences(&sc, max_len, cap)?,
        Mode::Ktc => generate_ktc_suite(&sc, k)?,
        Mode::Ftc => {
            let ftc = generate_ftc_suite(&sc)?;
            if probes {
                let mut cases = ftc.into_cases();
                cases.extend(guard_probe_suite(&sc)?.into_cases());
                TestSuite::new(Provenance::Ftc, cases).map_err(Failure::semantic)?
            } else {
                ftc
            }
        }
    };
    if suite.len() > cap {
        return Err(GenError::SuiteTooLarge { cap }.into());
    }
    emit(out, &suite_to_json(&suite))
}

fn minimize(suite: &Path, model: &Path, rule: Rule, group: Group, out: Option<&Path>) -> Outcome {
    let sc = load_model(model)?;
    let suite = load_suite(suite, &sc)?;
    let relation = match rule {
        Rule::Node => Relation::NodeSubset,
        Rule::Transition => Relation::TransitionSubset,
        Rule::Element => Relation::ElementSubset,
    };
    let grouping = match group {
        Group::Global => Grouping::Global,
        Group::ByStart => Grouping::ByInitialState,
    };
    let strategy = SubsumptionStrategy::new(relation, grouping);
    let min = minimize_suite(&suite, strategy).map_err(Failure::semantic)?;
    for (id, nc) in covering_table(&suite, strategy) {
        if !nc.is_empty() {
            let by: Vec<&str> = nc.iter().map(|i| i.as_str()).collect();
            eprintln!("discarded {id}: NC = {{{}}}", by.join(", "));
        }
    }
    eprintln!("kept {} of {} cases", min.len(), suite.len());
    emit(out, &suite_to_json(&min))
}

fn report(model: &Path, suite: &Path, bound: Option<usize>, format: Format) -> Outcome {
    let sc = load_model(model)?;
    let suite = load_suite(suite, &sc)?;
    if suite.is_empty() {
        return Err(Failure::semantic("suite is empty"));
    }
    let r = coverage_report(&sc, &suite, bound).map_err(Failure::semantic)?;
    match format {
        Format::Text => print!("{r}"),
        Format::Json => print!("{}", r.to_json()),
    }
    Ok(())
}

fn graph(model: &Path, k: usize, augment: bool) -> Outcome {
    let sc = load_model(model)?;
    let base = build_transition_graph(&sc).map_err(Failure::semantic)?;
    let g = if k == 1 {
        base
    } else {
        base.k_fold_transform(k).map_err(Failure::semantic)?
    };
    let g = if augment { g.augment() } else { g };
    print!("{}", export_dot(&g));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.verbose {
        let mode = if statecover::is_parallel() {
            "parallel"
        } else {
            "sequential"
        };
        eprintln!("statecover {} ({mode})", env!("CARGO_PKG_VERSION"));
    }
    let result = match cli.command {
        Command::Validate { model } => validate(&model),
        Command::Generate {
            model,
            mode,
            k,
            max_len,
            guard_probes,
            cap,
            out,
        } => generate(
            &model,
            mode,
            k as usize,
            max_len as usize,
            guard_probes,
            cap as usize,
            out.as_deref(),
        ),
        Command::Minimize {
            suite,
            model,
            rule,
            group,
            out,
        } => minimize(&suite, &model, rule, group, out.as_deref()),
        Command::Report {
            model,
            suite,
            path_bound,
            format,
        } => report(&model, &suite, path_bound.map(|b| b as usize), format),
        Command::Graph { model, k, augment } => graph(&model, k as usize, augment),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
