use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mte::format::{parse_model, parse_network, write_model, write_network};
use mte::network::network_from_hypertree;
use mte::repro::{
    repro_all, repro_cano, repro_smets_cognitive, repro_smets_conditional, repro_zhu_lee,
    ReproReport,
};
use mte::{
    ci_mte, parse_event, propagate_marginal, Error, EventSet, Hypergraph, IndependenceStatement,
    MassFunction, Tolerance,
};

/// Belief-function engine: combination, decombination, hypertrees and
/// belief networks over model files.
#[derive(Parser)]
#[command(name = "mte", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dempster's rule on two models.
    Combine {
        first: PathBuf,
        second: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Projection onto the listed variables.
    Marginal {
        model: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        vars: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Conditioning on an event over the model frame.
    Condition {
        model: PathBuf,
        #[arg(long)]
        event: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Removes the second model from the first.
    Decombine {
        joint: PathBuf,
        part: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Removes the model's own marginal on the listed variables.
    Anticondition {
        model: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        vars: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Tests conditional independence of J and K given L.
    CheckCi {
        model: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        j: Vec<String>,
        #[arg(long, num_args = 1.., required = true)]
        k: Vec<String>,
        #[arg(long, num_args = 0..)]
        l: Vec<String>,
    },
    /// Prints a hypertree construction sequence, or fails.
    Hypertree { hypergraph: PathBuf },
    /// Builds a belief network from a hypertree and one model per hyperedge.
    ToNetwork {
        hypergraph: PathBuf,
        #[arg(num_args = 1.., required = true)]
        valuations: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Query marginal given evidence, by local propagation.
    Propagate {
        network: PathBuf,
        /// `<vars>=<event>`, e.g. `A,B={(a1,b2)}`.
        #[arg(long, num_args = 0..)]
        evidence: Vec<String>,
        #[arg(long)]
        query: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Reruns the numeric counterexamples.
    Repro {
        scenario: Scenario,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    ZhuLee,
    SmetsCog,
    SmetsCi,
    Cano,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    MachineReadable,
}

enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug)]
enum CliError {
    Io(PathBuf, std::io::Error),
    Engine(Option<PathBuf>, Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Engine(Some(p), e) => write!(f, "{}: {e}", p.display()),
            CliError::Engine(None, e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Engine(None, e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn load_model(path: &Path, tol: Tolerance) -> CliResult<MassFunction> {
    parse_model(&read(path)?, tol).map_err(|e| CliError::Engine(Some(path.to_path_buf()), e))
}

fn emit(text: &str, output: Option<&Path>) -> CliResult<()> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(p.to_path_buf(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_model(m: &MassFunction, output: Option<&Path>) -> CliResult<Outcome> {
    emit(&write_model(m), output)?;
    Ok(Outcome::Pass)
}

fn parse_evidence(spec: &str, net: &mte::BeliefNetwork) -> CliResult<EventSet> {
    let (vars, event) = spec.split_once('=').ok_or_else(|| {
        Error::InvalidArgument(format!("evidence `{spec}` is not of the form <vars>=<event>"))
    })?;
    let names: Vec<&str> = vars.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let frame = mte::Frame::new(
        names
            .iter()
            .map(|n| net.variable(n).cloned())
            .collect::<mte::Result<Vec<_>>>()?,
    )?;
    Ok(parse_event(event, &frame)?)
}

fn print_reports(reports: &[ReproReport], format: ReportFormat) -> Outcome {
    for r in reports {
        match format {
            ReportFormat::Text => print!("{}", r.to_text()),
            ReportFormat::MachineReadable => print!("{}", r.to_machine()),
        }
    }
    if reports.iter().all(ReproReport::passed) {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn run(cli: Cli) -> CliResult<Outcome> {
    let tol = Tolerance::from_env()?;
    match cli.command {
        Command::Combine { first, second, output } => {
            let m = load_model(&first, tol)?.combine(&load_model(&second, tol)?)?;
            emit_model(&m, output.as_deref())
        }
        Command::Marginal { model, vars, output } => {
            let m = load_model(&model, tol)?.marginalize(&vars)?;
            emit_model(&m, output.as_deref())
        }
        Command::Condition { model, event, output } => {
            let m = load_model(&model, tol)?;
            let e = parse_event(&event, m.frame())?;
            emit_model(&m.condition(&e)?, output.as_deref())
        }
        Command::Decombine { joint, part, output } => {
            let m = load_model(&joint, tol)?.decombine(&load_model(&part, tol)?)?;
            emit_model(&m, output.as_deref())
        }
        Command::Anticondition { model, vars, output } => {
            let m = load_model(&model, tol)?.anti_condition(&vars)?;
            emit_model(&m, output.as_deref())
        }
        Command::CheckCi { model, j, k, l } => {
            let m = load_model(&model, tol)?;
            let s = IndependenceStatement::new(&j, &k, &l)?;
            if ci_mte(&m, &s, tol)? {
                println!("independent");
                Ok(Outcome::Pass)
            } else {
                println!("dependent");
                Ok(Outcome::Fail)
            }
        }
        Command::Hypertree { hypergraph } => {
            let h = Hypergraph::parse(&read(&hypergraph)?)
                .map_err(|e| CliError::Engine(Some(hypergraph.clone()), e))?;
            match h.hypertree_sequence() {
                Some(seq) => {
                    for k in 0..seq.len() {
                        let names = seq.edge_vertices(k).join(",");
                        match seq.branch(k) {
                            Some(b) => println!("{} {names} branch {}", k + 1, b + 1),
                            None => println!("{} {names}", k + 1),
                        }
                    }
                    Ok(Outcome::Pass)
                }
                None => {
                    println!("not a hypertree");
                    Ok(Outcome::Fail)
                }
            }
        }
        Command::ToNetwork { hypergraph, valuations, output } => {
            let h = Hypergraph::parse(&read(&hypergraph)?)
                .map_err(|e| CliError::Engine(Some(hypergraph.clone()), e))?;
            let seq = h.hypertree_sequence().ok_or(Error::NotAHypertree)?;
            let mut models: Vec<(PathBuf, MassFunction)> = valuations
                .iter()
                .map(|p| Ok((p.clone(), load_model(p, tol)?)))
                .collect::<CliResult<_>>()?;
            let mut ordered = Vec::with_capacity(seq.len());
            for e in seq.edges() {
                let pos = models
                    .iter()
                    .position(|(_, m)| m.frame().arity() == e.len() && m.frame().names().all(|n| e.contains(n)))
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "no valuation over {}",
                            e.iter().cloned().collect::<Vec<_>>().join(",")
                        ))
                    })?;
                ordered.push(models.remove(pos).1);
            }
            if let Some((p, _)) = models.first() {
                return Err(CliError::Engine(
                    Some(p.clone()),
                    Error::InvalidArgument("valuation matches no remaining hyperedge".into()),
                ));
            }
            let net = network_from_hypertree(&seq, &ordered)?;
            emit(&write_network(&net), output.as_deref())?;
            Ok(Outcome::Pass)
        }
        Command::Propagate { network, evidence, query, output } => {
            let net = parse_network(&read(&network)?, tol)
                .map_err(|e| CliError::Engine(Some(network.clone()), e))?;
            let ev = evidence
                .iter()
                .map(|s| parse_evidence(s, &net))
                .collect::<CliResult<Vec<_>>>()?;
            emit_model(&propagate_marginal(&net, &ev, &query)?, output.as_deref())
        }
        Command::Repro { scenario, format, seed } => {
            let reports = match scenario {
                Scenario::ZhuLee => vec![repro_zhu_lee()?],
                Scenario::SmetsCog => vec![repro_smets_cognitive()?],
                Scenario::SmetsCi => vec![repro_smets_conditional(seed)?],
                Scenario::Cano => vec![repro_cano()?],
                Scenario::All => repro_all(seed)?,
            };
            Ok(print_reports(&reports, format))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
