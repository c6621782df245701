//! `smcalc`: run the stochastic-measure experiments from the command line.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage or domain error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::Ctx;

#[derive(Parser, Debug)]
#[command(name = "smcalc", version, about = "Symmetric integration experiments for random Fourier-series stochastic measures")]
struct Cli {
    /// Output directory (default: current directory).
    #[arg(long, global = true, env = "SMCALC_OUT")]
    out: Option<PathBuf>,

    /// JSON config whose keys mirror the subcommand flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Omit the timestamp so identical runs give byte-identical files.
    #[arg(long, global = true)]
    deterministic: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample μ_t on a uniform grid.
    SamplePath(commands::SamplePathArgs),
    /// Symmetric integral sums over a dyadic refinement.
    SymIntegral(commands::SymIntegralArgs),
    /// Check the chain rule for ∫ f(μ, V)∘dμ.
    ChainRule(commands::ChainRuleArgs),
    /// Check the substitution rule for ∫ f(μ, V)∘dg(μ, V).
    SubstitutionRule(commands::SubstitutionArgs),
    /// Strong n-variation estimates of one path for several ε.
    Nvar(commands::NvarArgs),
    /// Solve ∘dX = σ(X)∘dμ + b(X, t)dt.
    SdeSolve(commands::SdeArgs),
    /// Solve and check the defining integral identity.
    SdeVerify(commands::SdeVerifyArgs),
    /// Compare the quadratic-variation series with its closed form.
    Parseval(commands::ParsevalArgs),
    /// Build (or re-check) the oscillating f(ε) certificate.
    Counterexample1(commands::Oscillator1Args),
    /// Build (or re-check) the oscillating S_n certificate.
    Counterexample2(commands::Oscillator2Args),
    /// Monte Carlo quantiles over seeds.
    Quantile(commands::QuantileArgs),
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        anyhow::ensure!(n > 0, "--threads must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let file = cli.config.as_deref().map(config::load).transpose()?;
    let ctx = Ctx {
        out: cli.out.unwrap_or_else(|| PathBuf::from(".")),
        threads: cli.threads,
        deterministic: cli.deterministic,
        file,
    };
    match cli.command {
        Command::SamplePath(a) => commands::sample_path(&ctx, a),
        Command::SymIntegral(a) => commands::sym_integral(&ctx, a),
        Command::ChainRule(a) => commands::chain_rule(&ctx, a),
        Command::SubstitutionRule(a) => commands::substitution_rule(&ctx, a),
        Command::Nvar(a) => commands::nvar(&ctx, a),
        Command::SdeSolve(a) => commands::sde_solve(&ctx, a),
        Command::SdeVerify(a) => commands::sde_verify(&ctx, a),
        Command::Parseval(a) => commands::parseval(&ctx, a),
        Command::Counterexample1(a) => commands::counterexample1(&ctx, a),
        Command::Counterexample2(a) => commands::counterexample2(&ctx, a),
        Command::Quantile(a) => commands::quantile(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            // One diagnostic line; clap's usage hints would follow it.
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("smcalc: error: {first}");
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("smcalc: error: {e:#}");
            ExitCode::from(2)
        }
    }
}
