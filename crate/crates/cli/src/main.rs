use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dnlslab::config::{self, Experiment};
use dnlslab::report::{emit_report, RunArtifact};
use dnlslab::{run_experiment, sweep, CliError};

/// Experiments for the damped nonlinear Schrödinger equation.
#[derive(Parser)]
#[command(name = "dnlslab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; the reference configuration when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted override such as `model.power=5` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory; falls back to `output_dir` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the gauged equation and record monitor norms.
    Simulate(Common),
    /// Extract the scattering state and fit the error decay rate.
    ScatterRate(Common),
    /// Picard iteration of the Duhamel map and its contraction factor.
    SdgeCheck(Common),
    /// Partial-sum family in H¹ versus M^{1,1}, and the product estimate.
    ModspaceDemo(Common),
    /// Dilated factorization of the free propagator against the multiplier.
    MdfmCheck(Common),
    /// Tail integral ratios against their 1/β limit.
    ElemlemCheck(Common),
    /// Cartesian product of overrides, each run in its own directory.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Experiment to run; otherwise taken from the configuration.
        #[arg(long, value_enum)]
        experiment: Option<Experiment>,
        /// `key=v1,v2,...` (repeatable); every combination is run.
        #[arg(long, value_name = "KEY=V1,V2")]
        vary: Vec<String>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn out_dir(flag: Option<&Path>, cfg: Option<&Path>) -> Result<PathBuf, CliError> {
    flag.or(cfg)
        .map(Path::to_path_buf)
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set output_dir".into()))
}

fn report(artifact: &RunArtifact) {
    let s = &artifact.summary;
    for (name, c) in &s.criteria {
        println!("[{}] {name}: {:e} ({})", if c.pass { "PASS" } else { "FAIL" }, c.value, c.bound);
    }
    if let Some(t) = s.results.get("last_good_time") {
        println!("blow-up after t = {t}");
    }
}

fn single(experiment: Experiment, common: &Common) -> Result<i32, CliError> {
    let mut cfg = config::load(common.config.as_deref(), &common.sets)?;
    cfg.experiment = Some(experiment);
    let dir = out_dir(common.out.as_deref(), cfg.output_dir.as_deref())?;
    cfg.output_dir = Some(dir.clone());
    let artifact = run_experiment(&cfg)?;
    emit_report(&artifact, &dir)?;
    report(&artifact);
    Ok(artifact.exit_code())
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (experiment, common) = match &cli.command {
        Command::Simulate(c) => (Experiment::Simulate, c),
        Command::ScatterRate(c) => (Experiment::ScatterRate, c),
        Command::SdgeCheck(c) => (Experiment::SdgeCheck, c),
        Command::ModspaceDemo(c) => (Experiment::ModspaceDemo, c),
        Command::MdfmCheck(c) => (Experiment::MdfmCheck, c),
        Command::ElemlemCheck(c) => (Experiment::ElemlemCheck, c),
        Command::Sweep {
            common,
            experiment,
            vary,
            jobs,
        } => {
            let base = config::load(common.config.as_deref(), &common.sets)?;
            let out = out_dir(common.out.as_deref(), base.output_dir.as_deref())?;
            let runs = sweep::plan(common.config.as_deref(), &common.sets, vary, *experiment, &out)?;
            let code = sweep::run_sweep(&runs, &out, *jobs)?;
            println!("{} runs, worst exit code {code}; index in {}", runs.len(), out.join(sweep::INDEX_FILE).display());
            return Ok(code);
        }
    };
    single(experiment, common)
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dnlslab: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
