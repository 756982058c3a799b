mod commands;
mod config;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Command, FileConfig, Overrides, RunConfig, UsageError};

#[derive(Parser)]
#[command(name = "capsym", version, about = "Symmetrization, variation and p-Laplace experiments on the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    subdivisions: Option<u32>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Multiplier applied to every check tolerance.
    #[arg(long, global = true)]
    tolerance_scale: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Write the icosphere vertex and edge tables.
    Mesh,
    /// Polar-cap symmetrization of a generated function.
    Symmetrize,
    /// Graph and piecewise-linear total variation with the coarea integral.
    Variation,
    /// Total variation along the implicit heat flow.
    Heat,
    /// Poisson or p-Laplace solve on the sphere with the decay report.
    SolveSphere,
    /// Dirac problems in the plane through the sphere, plus radial solves.
    Dirac,
    /// Run the full property suite and write a verification report.
    Verify,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Mesh => Command::Mesh,
            Cmd::Symmetrize => Command::Symmetrize,
            Cmd::Variation => Command::Variation,
            Cmd::Heat => Command::Heat,
            Cmd::SolveSphere => Command::SolveSphere,
            Cmd::Dirac => Command::Dirac,
            Cmd::Verify => Command::Verify,
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, UsageError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let flags = Overrides {
        seed: cli.seed,
        subdivisions: cli.subdivisions,
        out: cli.out.clone(),
        tolerance_scale: cli.tolerance_scale,
    };
    RunConfig::resolve(cli.command.into(), file, flags)
}

fn write_artifacts(dir: &Path, files: &[(String, Vec<u8>)]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in files {
        std::fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let artifacts = match commands::run(&cfg) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = write_artifacts(&cfg.output_dir, &artifacts.files) {
        eprintln!("error: writing {}: {e}", cfg.output_dir.display());
        return ExitCode::from(1);
    }
    for (name, _) in &artifacts.files {
        println!("{}", cfg.output_dir.join(name).display());
    }
    if let Some((_, report)) = artifacts.files.iter().find(|(n, _)| n == "report.json") {
        if let Ok(v) = serde_json::from_slice::<serde_json::Value>(report) {
            println!("checks: {}", v["summary"]);
        }
    }
    if artifacts.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
