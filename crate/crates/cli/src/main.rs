use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use radlab::scenario::{
    calibrate_potential, execute, output_dir, plan, write_outputs, CriterionResult, RunOutcome, ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "lab", version, about = "Radial Schrödinger scattering-channel lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Accept α, β and ε outside their windows (violations are logged).
    #[arg(long)]
    override_windows: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its CSV, snapshots and summary.
    Run {
        config: PathBuf,
        /// Print the resolved plan and write nothing.
        #[arg(long)]
        dry_run: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Check a config and print the derived quantities.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Tune a Gaussian well's depth so it binds exactly one state.
    CalibratePotential { config: PathBuf },
    /// Run every `*.toml` in a directory and report each criterion.
    Accept {
        suite: PathBuf,
        #[arg(long)]
        dry_run: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn print_criteria(name: &str, criteria: &[CriterionResult]) {
    for c in criteria {
        println!(
            "{} [{name}] criterion {}: {} = {:.6e} (bound {})",
            if c.pass { "PASS" } else { "FAIL" },
            c.criterion,
            c.check,
            c.value,
            c.bound
        );
    }
}

fn dry_run(cfg: &ScenarioConfig, override_windows: bool) -> Result<()> {
    let (plan, _) = plan(cfg, override_windows)?;
    println!("{}", serde_json::to_string_pretty(&plan)?);
    Ok(())
}

fn run_one(cfg: &ScenarioConfig, out: Option<&Path>, override_windows: bool) -> Result<RunOutcome> {
    let outcome = execute(cfg, override_windows).with_context(|| format!("running {}", cfg.name()))?;
    let dir = output_dir(cfg, out);
    write_outputs(&dir, cfg, &outcome)?;
    log::info!("wrote {}", dir.display());
    print_criteria(&outcome.summary.name, &outcome.summary.criteria);
    Ok(outcome)
}

fn suite_configs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no *.toml configs in {}", dir.display());
    }
    Ok(paths)
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            config,
            dry_run: dry,
            out,
            common,
        } => {
            let cfg = load(&config)?;
            if dry {
                dry_run(&cfg, common.override_windows)?;
                return Ok(true);
            }
            Ok(run_one(&cfg, out.as_deref(), common.override_windows)?.summary.pass)
        }
        Command::Validate { config, common } => {
            let cfg = load(&config)?;
            dry_run(&cfg, common.override_windows)?;
            Ok(true)
        }
        Command::CalibratePotential { config } => {
            let cfg = load(&config)?;
            let c = calibrate_potential(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&c)?);
            Ok(true)
        }
        Command::Accept {
            suite,
            dry_run: dry,
            out,
            common,
        } => {
            let mut all = true;
            for path in suite_configs(&suite)? {
                let cfg = load(&path)?;
                if dry {
                    dry_run(&cfg, common.override_windows)?;
                    continue;
                }
                let target = out.as_ref().map(|o| o.join(cfg.name()));
                match run_one(&cfg, target.as_deref(), common.override_windows) {
                    Ok(o) => all &= o.summary.pass,
                    Err(e) => {
                        println!("FAIL [{}] {e:#}", cfg.name());
                        all = false;
                    }
                }
            }
            println!("{}", if all { "suite PASS" } else { "suite FAIL" });
            Ok(all)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
