use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use conjpair_cli::commands::{self, LimitArgs, SimulateArgs, SpectrumArgs, TraceBoundsArgs, WgArgs};
use conjpair_cli::config::{self, CACHE_ENV, DEFAULT_CACHE_DIR};
use conjpair_cli::output::{self, Format, Outcome, ResultRecord};
use conjpair_cli::acceptance;
use serde::Serialize;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "conjpair", version, about = "Random conjugate channel pairs: experiments and checks")]
struct Cli {
    /// JSON file with default parameters; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Allow caps in the config file to exceed their defaults.
    #[arg(long, global = true)]
    unsafe_caps: bool,
    /// Where acceptance reports go when --out is absent.
    #[arg(long, global = true, env = CACHE_ENV)]
    cache_dir: Option<PathBuf>,
    /// Output file, written atomically; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Weingarten function on S_p.
    Wg(WgArgs),
    /// Spectrum of the left-multiplication matrix of Q_∅.
    Spectrum(SpectrumArgs),
    /// Monte Carlo over random channels.
    Simulate(SimulateArgs),
    /// Limit output for given overlap limits.
    Limit(LimitArgs),
    /// Randomized audit of the generalized-trace bounds.
    TraceBounds(TraceBoundsArgs),
    /// Run an acceptance suite: weingarten, spectrum, channels, entropy, ghz, bounds or all.
    Acceptance { suite: String },
}

fn emit(cli: &Cli, bytes: &[u8]) -> Result<()> {
    match &cli.out {
        Some(path) => output::write_atomic(path, bytes),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

fn run_command<A, F>(cli: &Cli, file: Option<&Value>, name: &str, flags: &A, default: Format, f: F) -> Result<()>
where
    A: Serialize + DeserializeOwned,
    F: FnOnce(&A) -> Result<Outcome>,
{
    let args: A = config::merge(flags, file)?;
    let outcome = f(&args)?;
    let echo = json!({"subcommand": name, "parameters": args});
    emit(cli, &output::render(&outcome, echo, cli.format.unwrap_or(default))?)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let file = cli.config.as_deref().map(config::load).transpose()?;
    let file = file.as_ref();
    conjpair::caps::install(config::caps(file, cli.unsafe_caps)?);
    match &cli.command {
        Command::Wg(a) => run_command(cli, file, "wg", a, Format::Csv, commands::wg)?,
        Command::Spectrum(a) => run_command(cli, file, "spectrum", a, Format::Json, commands::spectrum_cmd)?,
        Command::Simulate(a) => run_command(cli, file, "simulate", a, Format::Csv, commands::simulate)?,
        Command::Limit(a) => run_command(cli, file, "limit", a, Format::Json, commands::limit_cmd)?,
        Command::TraceBounds(a) => run_command(cli, file, "trace-bounds", a, Format::Csv, commands::trace_bounds)?,
        Command::Acceptance { suite } => {
            let ids = acceptance::suite(suite)?;
            let mut outcomes = Vec::new();
            for &id in ids {
                let o = acceptance::run_criterion(id);
                println!("{o}");
                outcomes.push(o);
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} passed, {failed} failed", outcomes.len() - failed);
            let record = ResultRecord::new(json!({"subcommand": "acceptance", "suite": suite}), json!(outcomes));
            let bytes = serde_json::to_vec_pretty(&record)?;
            let path = match &cli.out {
                Some(p) => p.clone(),
                None => cli
                    .cache_dir
                    .clone()
                    .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
                    .join(format!("acceptance-{suite}.json")),
            };
            output::write_atomic(&path, &bytes)?;
            return Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
