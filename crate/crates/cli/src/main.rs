//! `starframe` — verify, analyze, construct, and generate operator-frame
//! instances over finite-dimensional C*-algebras.
//!
//! Exit codes: 0 the check passed (or the command has no verdict and
//! succeeded), 1 the verdict is invalid, 2 the input was malformed or
//! ineligible for the requested operation, 3 a numeric routine failed.
//! Reports are written in canonical form (sorted keys, fixed float
//! formatting), so identical inputs produce byte-identical output; wall-clock
//! timing goes to stderr only.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use starframe::Error;

mod commands;
use commands::{Outcome, TolOverride};

#[derive(Parser)]
#[command(name = "starframe", version, about = "Operator frames over direct sums of matrix algebras")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct TolArgs {
    /// Relative tolerance override (default from the instance, else 1e-9).
    #[arg(long)]
    tol_rel: Option<f64>,
    /// Absolute tolerance override (default from the instance, else 1e-12).
    #[arg(long)]
    tol_abs: Option<f64>,
}

impl TolArgs {
    fn overrides(&self) -> TolOverride {
        TolOverride { rel: self.tol_rel, abs: self.tol_abs }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Directive {
    Parseval,
    Dual,
    ComposeLeft,
    ComposeRight,
    Tensor,
    Transport,
    QTensor,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum GenKind {
    Random,
    NearParseval,
    VectorFrame,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check candidate frame bounds, with a randomized cross-check.
    Verify {
        /// Instance file with algebra, family, and candidate bounds.
        #[arg(long)]
        instance: PathBuf,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
        /// Seed for the randomized cross-check (overrides the instance seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Number of randomized cross-check samples.
        #[arg(long, default_value_t = 2000)]
        trials: usize,
    },
    /// Report the frame operator, its spectra, norms, and optimal bounds.
    Analyze {
        #[arg(long)]
        instance: PathBuf,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Derive a new family (Parseval, dual, compositions, tensors, transport).
    Construct {
        /// Which construction to perform.
        #[arg(long)]
        directive: Directive,
        #[arg(long)]
        instance: PathBuf,
        /// Where to write the constructed instance.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Emit a seeded instance file with a frame family and valid bounds.
    Generate {
        /// Family construction to use.
        #[arg(long)]
        kind: GenKind,
        /// Comma-separated factor dimensions of the algebra, e.g. 2,3.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        shape: Vec<usize>,
        /// Module rank of the common domain.
        #[arg(long, default_value_t = 1)]
        rank: usize,
        /// Number of members in the family.
        #[arg(long, default_value_t = 4)]
        members: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the generated instance.
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Numeric(_) => 3,
        _ => 2,
    }
}

fn read_instance(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::Pattern(format!("cannot read {}: {e}", path.display())))
}

fn run(cmd: &Cmd) -> Result<Outcome, Error> {
    match cmd {
        Cmd::Verify { instance, tol, seed, trials, .. } => {
            let text = read_instance(instance)?;
            commands::cmd_verify(&instance.display().to_string(), &text, tol.overrides(), *seed, *trials)
        }
        Cmd::Analyze { instance, tol, .. } => {
            let text = read_instance(instance)?;
            commands::cmd_analyze(&instance.display().to_string(), &text, tol.overrides())
        }
        Cmd::Construct { directive, instance, out, tol } => {
            let text = read_instance(instance)?;
            let d = match directive {
                Directive::Parseval => commands::ConstructKind::Parseval,
                Directive::Dual => commands::ConstructKind::Dual,
                Directive::ComposeLeft => commands::ConstructKind::ComposeLeft,
                Directive::ComposeRight => commands::ConstructKind::ComposeRight,
                Directive::Tensor => commands::ConstructKind::Tensor,
                Directive::Transport => commands::ConstructKind::Transport,
                Directive::QTensor => commands::ConstructKind::QTensor,
            };
            commands::cmd_construct(
                &instance.display().to_string(),
                &text,
                d,
                &out.display().to_string(),
                tol.overrides(),
            )
        }
        Cmd::Generate { kind, shape, rank, members, seed, out } => {
            let k = match kind {
                GenKind::Random => commands::GenerateKind::Random,
                GenKind::NearParseval => commands::GenerateKind::NearParseval,
                GenKind::VectorFrame => commands::GenerateKind::VectorFrame,
            };
            commands::cmd_generate(k, shape, *rank, *members, *seed, &out.display().to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();

    let label = match &cli.command {
        Cmd::Verify { .. } => "verify",
        Cmd::Analyze { .. } => "analyze",
        Cmd::Construct { .. } => "construct",
        Cmd::Generate { .. } => "generate",
    };

    let code = match run(&cli.command) {
        Ok(outcome) => {
            let mut code = outcome.exit;
            if let Some((path, text)) = &outcome.artifact {
                if let Err(e) = fs::write(path, text) {
                    eprintln!("error: cannot write {path}: {e}");
                    code = 3;
                }
            }
            let report_out = match &cli.command {
                Cmd::Verify { out, .. } | Cmd::Analyze { out, .. } => out.clone(),
                _ => None,
            };
            let rendered = starframe::serial::canonical_json(&outcome.report);
            if let Some(path) = report_out {
                if let Err(e) = fs::write(&path, &rendered) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    code = 3;
                }
            }
            print!("{rendered}");
            code
        }
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    };

    eprintln!("{label}: {:.1} ms", started.elapsed().as_secs_f64() * 1e3);
    ExitCode::from(code)
}
