use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qmix::config::{self, ClassicalConfig, EvolveConfig, ExponentConfig, FractalConfig, PdpConfig, RenderConfig};
use qmix::error::{CliError, Result, EXIT_CONFIG};
use qmix::{commands, repro};
use serde::de::DeserializeOwned;

#[derive(Parser)]
#[command(name = "qmix", version, about = "Mixing rates, quantum jump processes and fractal attractors of two-level open systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; fields may also be given with --set.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config field, e.g. `--set model.kappa=2` (repeatable).
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Shorthand for `--set seed=N`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(short, long, default_value = "qmix-out")]
    out: PathBuf,
}

impl RunArgs {
    fn load<T: DeserializeOwned>(&self) -> Result<T> {
        let mut overrides = self.overrides.clone();
        if let Some(s) = self.seed {
            overrides.push(format!("seed={s}"));
        }
        config::load(self.config.as_deref(), &overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the master equation; writes trajectory.csv.
    Evolve(RunArgs),
    /// Estimate the exponential mixing rate; writes exponent.json.
    Exponent(RunArgs),
    /// Sample the jump process; writes cloud.csv, cloud.json, path.jsonl and ensemble.json.
    Pdp(RunArgs),
    /// Box-counting dimension of a point cloud; writes boxcount.json.
    Fractal(RunArgs),
    /// Transfer-operator iterations of r-adic maps; writes classical.json.
    Classical(RunArgs),
    /// Render a point cloud as PGM or PPM.
    Render(RunArgs),
    /// Run the reproduction criteria; writes report.json.
    Repro {
        /// Criteria to run (all when omitted).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        #[arg(short, long, default_value = "qmix-out/repro")]
        out: PathBuf,
    },
    /// Print the JSON schema of a command's config.
    Schema { command: String },
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("QMIX_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::config(format!("QMIX_THREADS = `{v}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(e.to_string()))
}

fn report(files: Vec<PathBuf>) {
    for f in files {
        println!("{}", f.display());
    }
}

fn run_with<T: DeserializeOwned>(args: &RunArgs, f: fn(&T, &Path) -> Result<Vec<PathBuf>>) -> Result<()> {
    let cfg: T = args.load()?;
    report(f(&cfg, &args.out)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Evolve(a) => run_with::<EvolveConfig>(&a, commands::cmd_evolve),
        Command::Exponent(a) => run_with::<ExponentConfig>(&a, commands::cmd_exponent),
        Command::Pdp(a) => run_with::<PdpConfig>(&a, commands::cmd_pdp),
        Command::Fractal(a) => run_with::<FractalConfig>(&a, commands::cmd_fractal),
        Command::Classical(a) => run_with::<ClassicalConfig>(&a, commands::cmd_classical),
        Command::Render(a) => run_with::<RenderConfig>(&a, commands::cmd_render),
        Command::Repro { only, out } => {
            let reports = repro::run(&out, &only)?;
            let failed = reports.iter().filter(|r| !r.pass).count();
            if failed > 0 {
                return Err(CliError::ReproFailed {
                    failed,
                    total: reports.len(),
                });
            }
            Ok(())
        }
        Command::Schema { command } => {
            let s = config::schema(&command).ok_or_else(|| CliError::config(format!("no config schema for `{command}`")))?;
            println!("{}", serde_json::to_string_pretty(&s).expect("json"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
