//! `blowup`: drives profile tabulation, residual verification, norm series
//! and the time-stepping oracle, writing plot-ready CSV and JSON reports.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use commands::{cmd_norms, cmd_oracle, cmd_profile, cmd_verify, Outcome, Session};
use config::{normalize_key, parse_ini, RunConfig, Settings};
use output::OutputDir;

const EXIT_FAILED_CHECKS: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "blowup",
    version,
    about = "Blow-up swirl solutions: tabulate, verify, measure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key = value file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_parser = ["1", "2"])]
    part: Option<String>,

    /// Blow-up time, in (0, 1/2].
    #[arg(long = "T", global = true)]
    final_time: Option<f64>,

    /// "bump" or the path of a two-column (r, k) CSV.
    #[arg(long, global = true)]
    k: Option<String>,

    #[arg(long = "grid-n", global = true)]
    grid_n: Option<usize>,

    /// uniform or geometric[:RATIO].
    #[arg(long, global = true)]
    grading: Option<String>,

    #[arg(long = "ladder-J", global = true)]
    ladder_j: Option<u32>,

    /// Output directory (OUT_DIR in the environment also sets it).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// csv, json, or both (comma separated or repeated).
    #[arg(long, global = true, value_delimiter = ',')]
    format: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq)]
enum Command {
    /// Tabulate the profile and check its ODE residual.
    Profile,
    /// Residual, boundary and bound checks for the selected part.
    Verify,
    /// Energy and L1 series, growth fits, and the L^q classification.
    Norms,
    /// Convergence study of the implicit time stepper.
    Oracle {
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long = "n-r")]
        n_r: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long = "oracle-levels")]
        levels: Option<usize>,
    },
    /// profile, verify, norms and oracle in turn.
    All,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Verify => "verify",
            Command::Norms => "norms",
            Command::Oracle { .. } => "oracle",
            Command::All => "all",
        }
    }
}

fn flag_settings(cli: &Cli) -> Settings {
    let mut s = Settings::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            s.insert(normalize_key(k), v);
        }
    };
    put("part", cli.part.clone());
    put("T", cli.final_time.map(|v| v.to_string()));
    put("k", cli.k.clone());
    put("grid_n", cli.grid_n.map(|v| v.to_string()));
    put("grading", cli.grading.clone());
    put("ladder_J", cli.ladder_j.map(|v| v.to_string()));
    put("out", cli.out.as_ref().map(|p| p.display().to_string()));
    if !cli.format.is_empty() {
        put("format", Some(cli.format.join(",")));
    }
    if let Command::Oracle {
        theta,
        n_r,
        dt,
        delta,
        levels,
    } = cli.command
    {
        put("theta", theta.map(|v| v.to_string()));
        put("n_r", n_r.map(|v| v.to_string()));
        put("dt", dt.map(|v| v.to_string()));
        put("delta", delta.map(|v| v.to_string()));
        put("oracle_levels", levels.map(|v| v.to_string()));
    }
    s
}

/// Defaults, then the config file, then OUT_DIR, then flags.
fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let settings = parse_ini(&text).with_context(|| format!("config {}", path.display()))?;
        let base = path.parent().map(PathBuf::from).unwrap_or_default();
        cfg.apply(&settings, &base)
            .with_context(|| format!("config {}", path.display()))?;
    }
    if let Some(dir) = std::env::var_os("OUT_DIR") {
        cfg.out = PathBuf::from(dir);
    }
    cfg.apply(&flag_settings(cli), &PathBuf::new())?;
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Vec<Outcome>> {
    let cfg = resolve_config(cli)?;
    let mut out = OutputDir::create(&cfg.out, cfg.formats)?;
    let session = Session::new(cfg)?;
    let outcomes = match cli.command {
        Command::Profile => vec![cmd_profile(&session, &mut out)?],
        Command::Verify => vec![cmd_verify(&session, &mut out)?],
        Command::Norms => vec![cmd_norms(&session, &mut out)?],
        Command::Oracle { .. } => vec![cmd_oracle(&session, &mut out)?],
        Command::All => vec![
            cmd_profile(&session, &mut out)?,
            cmd_verify(&session, &mut out)?,
            cmd_norms(&session, &mut out)?,
            cmd_oracle(&session, &mut out)?,
        ],
    };
    let manifest = json!({
        "command": cli.command.name(),
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": session.cfg,
        "seeds": null,
        "files": out.written(),
        "outcomes": outcomes,
    });
    out.json("manifest.json", &manifest)?;
    Ok(outcomes)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcomes) => {
            let passed = outcomes.iter().all(|o| o.passed);
            for o in &outcomes {
                for c in &o.checks {
                    eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                }
                for w in &o.warnings {
                    eprintln!("warning: {w}");
                }
            }
            let summary = json!({ "command": cli.command.name(), "passed": passed, "outcomes": outcomes });
            println!("{summary}");
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED_CHECKS)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let summary = json!({ "command": cli.command.name(), "passed": false, "error": format!("{e:#}") });
            println!("{summary}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
