use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semiphi::cli_io::{self, InstanceFile, RunOptions, TOL_ENV};
use semiphi::generate::{generate_scaled, Dims, InstanceKind};
use semiphi::semiphi::SolverOptions;
use semiphi::{Error, Result};

/// Certification, dilation and Radon-Nikodym tools for completely semi-phi maps.
#[derive(Parser)]
#[command(name = "semiphi", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Solver stopping tolerance.
    #[arg(long, global = true, env = TOL_ENV, default_value_t = 1e-9)]
    tol: f64,
    /// Solver iteration budget.
    #[arg(long, global = true, default_value_t = 50_000)]
    max_iter: usize,
    /// Seed for randomized steps and for `gen`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON output here instead of stdout.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether Phi is completely semi-phi.
    Check { instance: PathBuf },
    /// Dilation pair of a certified instance.
    Dilate { instance: PathBuf },
    /// Minimal dilation pair.
    Minimize { instance: PathBuf },
    /// Unitary equivalence of two independently built minimal pairs.
    Equiv { instance: PathBuf },
    /// Commutant of the minimal dilation's Psi.
    Commutant { instance: PathBuf },
    /// Whether SUB << DOM.
    Order {
        sub: PathBuf,
        dom: PathBuf,
        /// Use the order with free (1,1) corners.
        #[arg(long)]
        relaxed: bool,
    },
    /// Radon-Nikodym derivative of SUB with respect to DOM.
    Rn {
        sub: PathBuf,
        dom: PathBuf,
        /// Skip the literal order check.
        #[arg(long)]
        relaxed: bool,
    },
    /// Purity of the instance's (unital) phi.
    Purity { instance: PathBuf },
    /// Generate a seeded instance.
    Gen {
        /// phi_map, subordinate or adversarial.
        #[arg(long)]
        kind: InstanceKind,
        /// p,n,d1,d2
        #[arg(long, value_parser = parse_dims)]
        dims: Dims,
        /// Factor applied to Phi for adversarial instances.
        #[arg(long, default_value_t = 2.0)]
        scale: f64,
        /// Also write the dominating instance of a subordinate one.
        #[arg(long)]
        parent_out: Option<PathBuf>,
    },
}

fn parse_dims(s: &str) -> std::result::Result<Dims, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("'{t}': {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [p, n, d1, d2] => Ok(Dims::new(p, n, d1, d2)),
        _ => Err(format!("expected p,n,d1,d2, got '{s}'")),
    }
}

fn load(path: &Path) -> Result<semiphi::generate::Instance> {
    InstanceFile::read(path)?.to_instance()
}

fn emit(text: String, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    if !(c.tol.is_finite() && c.tol > 0.0) {
        return Err(Error::Parse(format!("--tol must be positive, got {}", c.tol)));
    }
    let opts = RunOptions { solver: SolverOptions { tol: c.tol, max_iter: c.max_iter }, seed: c.seed };
    let out = c.json_out.as_deref();
    let text = match &cli.command {
        Command::Check { instance } => cli_io::to_json(&cli_io::check(&load(instance)?, &opts)?),
        Command::Dilate { instance } => cli_io::to_json(&cli_io::dilate(&load(instance)?, &opts, false)?),
        Command::Minimize { instance } => cli_io::to_json(&cli_io::dilate(&load(instance)?, &opts, true)?),
        Command::Equiv { instance } => cli_io::to_json(&cli_io::equiv(&load(instance)?, &opts)?),
        Command::Commutant { instance } => cli_io::to_json(&cli_io::commutant(&load(instance)?, &opts)?),
        Command::Order { sub, dom, relaxed } => {
            cli_io::to_json(&cli_io::order(&load(sub)?, &load(dom)?, &opts, *relaxed)?)
        }
        Command::Rn { sub, dom, relaxed } => cli_io::to_json(&cli_io::rn(&load(sub)?, &load(dom)?, &opts, *relaxed)?),
        Command::Purity { instance } => cli_io::to_json(&cli_io::purity(&load(instance)?.phi, &opts)?),
        Command::Gen { kind, dims, scale, parent_out } => {
            let g = generate_scaled(*kind, *dims, c.seed, *scale)?;
            if let Some(path) = parent_out {
                if g.parent.is_none() {
                    return Err(Error::UnsupportedDims(format!("--parent-out needs a subordinate instance, got {kind}")));
                }
                // the parent is the phi-map drawn from the same seed
                let parent = generate_scaled(InstanceKind::PhiMap, *dims, c.seed, *scale)?;
                debug_assert_eq!(Some(&parent.instance), g.parent.as_ref());
                InstanceFile::from_generated(&parent).write(path)?;
            }
            InstanceFile::from_generated(&g).to_json()
        }
    };
    emit(text, out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
