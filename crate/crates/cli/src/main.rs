//! Batch driver for the ising-rc experiments. Each subcommand reads an
//! optional JSON config, applies flag overrides, runs, and writes CSV
//! artifacts with a JSON provenance header into the output directory.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use config::{CliError, Common};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ising-rc", version, about = "Continuum random-cluster experiments for the transverse-field Ising chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Percolation connectivity decay and the branching lower bound.
    DecayScan(config::DecayScanArgs),
    /// Slit-box estimate of a reduced state against the exact thermal state.
    Rdm(config::RdmArgs),
    /// ‖ρ̂_m − ρ̂_ref‖ over margins m.
    NormDecay(config::NormDecayArgs),
    /// Entanglement entropy against block length, with the entropy bound.
    EntropyScan(config::EntropyScanArgs),
    /// Ratio weak-mixing checks on the slit box.
    MixingCheck(config::MixingArgs),
    /// Branching-process tail exponents, exact and simulated.
    Branching(config::BranchingArgs),
    /// Random environments: localization radii and environment events.
    DisorderScan(config::DisorderArgs),
    /// Exact reduced state of a short chain.
    Oracle(config::OracleArgs),
}

fn dispatch(cmd: Command) -> Result<(String, Common, serde_json::Value, commands::Artifacts), CliError> {
    macro_rules! run {
        ($name:literal, $args:expr, $f:path) => {{
            let args = $args;
            let cfg = config::load(&args.common, &args)?;
            let echo = serde_json::to_value(&cfg).expect("configs serialize");
            let out = $f(&cfg)?;
            Ok(($name.to_string(), args.common, echo, out))
        }};
    }
    match cmd {
        Command::DecayScan(a) => run!("decay-scan", a, commands::decay_scan),
        Command::Rdm(a) => run!("rdm", a, commands::rdm),
        Command::NormDecay(a) => run!("norm-decay", a, commands::norm_decay),
        Command::EntropyScan(a) => run!("entropy-scan", a, commands::entropy_scan),
        Command::MixingCheck(a) => run!("mixing-check", a, commands::mixing_check),
        Command::Branching(a) => run!("branching", a, commands::branching),
        Command::DisorderScan(a) => run!("disorder-scan", a, commands::disorder_scan),
        Command::Oracle(a) => run!("oracle", a, commands::oracle),
    }
}

fn out_dir(common: &Common) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os("ISING_RC_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn main_inner() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::usage(e.to_string())),
    };
    let (name, common, echo, artifacts) = dispatch(cli.command)?;
    let dir = out_dir(&common);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))?;
    let git = option_env!("ISING_RC_GIT_DESCRIBE").filter(|s| !s.is_empty()).map(str::to_string);
    let prov = ising_rc::report::Provenance::new(&name, echo, git);
    let mut written = Vec::new();
    for (file, render) in artifacts {
        let text = render(&prov)?;
        let path = dir.join(&file);
        std::fs::write(&path, text).map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
        written.push(path.display().to_string());
    }
    println!("{}", serde_json::json!({ "command": name, "files": written }));
    Ok(())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code)
        }
    }
}
