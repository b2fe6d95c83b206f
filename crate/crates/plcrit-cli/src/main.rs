//! Batch front end: reads experiment configs, dispatches the constants /
//! sweep / threshold / dominance / fem blocks, and writes tables plus a
//! summary with one PASS / FAIL / SKIPPED line per checked claim.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use plcrit::config::ExperimentConfig;
use plcrit::constants::{ConstantsBundle, ProblemParams, RadialQuadConfig};
use plcrit::fit::FitModel;
use plcrit::runner::{self, BlockFilter, ClaimStatus, RunSummary};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "plcrit",
    version,
    about = "Constants, bubble-energy expansions and FEM quotient estimates for critical \
             quasilinear mixed-boundary problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for tables and the summary.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Deterministic outputs (omit timestamps; identical configs give
    /// byte-identical artifacts).
    #[arg(long)]
    reproducible: bool,
    /// Worker cap for block-level parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Override the relative quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the universal constants for (n, p) pairs.
    Constants {
        /// Experiment config with constants blocks.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory when running from a config.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        reproducible: bool,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Dimension (with --p, bypasses the config).
        #[arg(short, long)]
        n: Option<usize>,
        /// Exponent 1 < p < n.
        #[arg(short, long)]
        p: Option<f64>,
    },
    /// Run the expansion sweep blocks of a config.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Fit a sweep table column against a decay model.
    Fit {
        /// Sweep CSV produced by the sweep command.
        #[arg(long)]
        input: PathBuf,
        /// Column to fit (e.g. grad_term, mass, beta_term).
        #[arg(long)]
        column: String,
        /// Decay exponent of the model.
        #[arg(long)]
        exponent: f64,
        /// Model shape: power | power-log.
        #[arg(long, default_value = "power")]
        model: String,
    },
    /// Compare the test-function quotient against the concentration
    /// threshold for the threshold blocks of a config.
    Threshold {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Fit the two deviation channels and report which dominates.
    Dominance {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Finite-element quotient estimation for the fem blocks of a config.
    Fem {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run every block of a config and write the full summary.
    Report {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

fn load(args: &ConfigArgs) -> Result<(ExperimentConfig, String)> {
    let (mut cfg, raw) = ExperimentConfig::from_path(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;
    if args.reproducible {
        cfg.reproducible = true;
    }
    if let Some(w) = args.workers {
        cfg.workers = Some(w);
    }
    if let Some(t) = args.tol {
        cfg.tolerances.quad_rel = t;
    }
    if cfg.is_empty() {
        bail!(
            "config {} contains no experiment blocks; see `plcrit --help` for the block kinds",
            args.config.display()
        );
    }
    Ok((cfg, raw))
}

fn print_summary(summary: &RunSummary) {
    for block in &summary.blocks {
        for claim in &block.claims {
            let tag = match claim.status {
                ClaimStatus::Pass => "PASS   ",
                ClaimStatus::Fail => "FAIL   ",
                ClaimStatus::Skipped => "SKIPPED",
            };
            println!("{tag} {}::{} - {}", block.name, claim.name, claim.detail);
        }
    }
    let (mut pass, mut fail, mut skip) = (0, 0, 0);
    for b in &summary.blocks {
        for c in &b.claims {
            match c.status {
                ClaimStatus::Pass => pass += 1,
                ClaimStatus::Fail => fail += 1,
                ClaimStatus::Skipped => skip += 1,
            }
        }
    }
    println!("claims: {pass} passed, {fail} failed, {skip} skipped");
}

fn run_filtered(args: &ConfigArgs, filter: BlockFilter) -> Result<i32> {
    let (cfg, raw) = load(args)?;
    let summary = runner::run(&cfg, &raw, &args.out, filter)?;
    print_summary(&summary);
    println!("artifacts written to {}", args.out.display());
    Ok(if summary.any_failed() { 1 } else { 0 })
}

fn main() {
    let cli = Cli::parse();
    let code = match run_command(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run_command(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Constants {
            config,
            out,
            reproducible,
            workers,
            tol,
            n,
            p,
        } => match (config, n, p) {
            (_, Some(n), Some(p)) => {
                let params = ProblemParams::new(n, p)?;
                let bundle = ConstantsBundle::compute(&params, &RadialQuadConfig::default())?;
                let opt = |v: Option<f64>| {
                    v.map(|x| format!("{x:.12e}")).unwrap_or_else(|| "divergent".into())
                };
                println!("n = {n}, p = {p}, p* = {:.12e}", params.p_star);
                println!("sigma      = {:.12e}", bundle.sigma);
                println!("c1         = {}", opt(bundle.c1));
                println!("c2         = {:.12e}", bundle.c2);
                println!("c_tilde    = {}", opt(bundle.c_tilde));
                println!("S          = {:.12e}", bundle.sobolev);
                println!("S/2^(p/n)  = {:.12e}", bundle.threshold);
                println!("identity residual = {:.3e}", bundle.identity_residual);
                Ok(0)
            }
            (Some(config), _, _) => run_filtered(
                &ConfigArgs {
                    config,
                    out,
                    reproducible,
                    workers,
                    tol,
                },
                BlockFilter::Constants,
            ),
            _ => bail!("constants needs either --config or both -n and -p"),
        },
        Command::Sweep { cfg } => run_filtered(&cfg, BlockFilter::Sweep),
        Command::Threshold { cfg } => run_filtered(&cfg, BlockFilter::Threshold),
        Command::Dominance { cfg } => run_filtered(&cfg, BlockFilter::Dominance),
        Command::Fem { cfg } => run_filtered(&cfg, BlockFilter::Fem),
        Command::Report { cfg } => run_filtered(&cfg, BlockFilter::All),
        Command::Fit {
            input,
            column,
            exponent,
            model,
        } => {
            let model = match model.as_str() {
                "power" => FitModel::Power,
                "power-log" | "power_log" => FitModel::PowerLog,
                other => bail!("unknown model '{other}' (use power or power-log)"),
            };
            let fit = runner::fit_csv_column(&input, &column, exponent, model)?;
            println!("model     = {:?}", fit.model);
            println!("A (limit) = {:.12e}", fit.a);
            println!("K (coeff) = {:.12e}", fit.k);
            println!("e         = {:.12e}", fit.e);
            println!("residual rms = {:.3e}", fit.residual_rms());
            Ok(0)
        }
    }
}

#[cfg(test)]
mod tests {
    // end-to-end binary behaviour is covered in tests/cli.rs
}
