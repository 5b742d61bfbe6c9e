use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use incentive_fdr::harness::{self, fda, staircase, sweep, Config, FdaConfig, TauGrid};
use incentive_fdr::mathkit::Interval;
use incentive_fdr::maximin::{self, PrincipalWeights};
use incentive_fdr::model;
use incentive_fdr::Error;

/// Incentive-aware FDR bounds, sweeps and simulations.
#[derive(Parser)]
#[command(name = "incentive-fdr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the modelling assumptions of a scenario.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Bounds and exact mixture FDR over a threshold grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo simulation of the game at one threshold.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Staircase mixture gaps. Uses the ratio construction unless
    /// --thresholds is given.
    Staircase {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        k: usize,
        #[arg(long, default_value_t = 0.02)]
        prior_min: f64,
        #[arg(long, default_value_t = 0.97)]
        prior_max: f64,
        #[arg(long, default_value_t = 0.99)]
        ratio: f64,
        /// Comma-separated increasing thresholds for the ε construction.
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = staircase::DEFAULT_GRID_POINTS)]
        tau_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximin-optimal threshold region for the principal.
    Maximin {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        omega0: f64,
        #[arg(long, default_value_t = 1.0)]
        omega1: f64,
        #[arg(long, default_value_t = maximin::DEFAULT_GRID_POINTS)]
        grid_points: usize,
    },
    /// Conservative FDR bounds for drug-approval protocols.
    FdaTable {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    tau_min: f64,
    #[arg(long, default_value_t = 1.0)]
    tau_max: f64,
    #[arg(long, default_value_t = 1001)]
    tau_steps: usize,
}

enum Failure {
    /// Assumption or validation failure.
    Check(String),
    /// Bad input.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = Config::load(config)?;
            let report = model::validate(&cfg.scenario);
            for c in &report.checks {
                println!("{}\t{}\t{}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
            }
            if !report.passed() {
                return Err(Failure::Check("scenario violates modelling assumptions".into()));
            }
        }
        Command::Sweep { config, grid, out } => {
            let cfg = Config::load(config)?;
            let taus = TauGrid::new(grid.tau_min, grid.tau_max, grid.tau_steps)?.points();
            let rows = harness::sweep(&cfg.scenario, cfg.mixture()?, &taus)?;
            sweep::write_csv(&rows, output(&out)?)?;
        }
        Command::Simulate { config, tau, n, seed, out } => {
            let cfg = Config::load(config)?;
            let r = harness::simulate(&cfg.scenario, cfg.mixture()?, tau, n, seed)?;
            let mut w = output(&out)?;
            writeln!(w, "tau,n_rounds,n_optin,n_approved,n_false_approved,empirical_fdr,seed")?;
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                harness::csv_out::fmt_sig(tau),
                r.n_rounds,
                r.n_optin,
                r.n_approved,
                r.n_false_approved,
                harness::csv_out::fmt_sig(r.empirical_fdr),
                r.seed
            )?;
        }
        Command::Staircase { config, k, prior_min, prior_max, ratio, thresholds, epsilon, tau_steps, out } => {
            let cfg = Config::load(config)?;
            if let Some(th) = thresholds {
                let c = harness::staircase_check(&cfg.scenario, &th, epsilon)?;
                let mut w = output(&out)?;
                writeln!(w, "tau,prior_null,weight,gap")?;
                for ((t, g), ty) in c.thresholds.iter().zip(&c.gaps).zip(c.mixture.types()) {
                    use harness::csv_out::fmt_sig;
                    writeln!(w, "{},{},{},{}", fmt_sig(*t), fmt_sig(ty.prior_null), fmt_sig(ty.weight), fmt_sig(*g))?;
                }
                return Ok(());
            }
            let mut grid = staircase::default_grid(&cfg.scenario)?;
            grid = TauGrid::new(grid.lo, grid.hi, tau_steps)?;
            let range = Interval::new(prior_min, prior_max)?;
            let r = harness::staircase_report(&cfg.scenario, k, range, ratio, Some(grid))?;
            staircase::write_csv(&r, output(&out)?)?;
            eprintln!("max_gap_grid={} max_gap_exact={}", r.max_gap_grid, r.max_gap_exact);
        }
        Command::Maximin { config, omega0, omega1, grid_points } => {
            let cfg = Config::load(config)?;
            let w = PrincipalWeights::new(omega0, omega1)?;
            let r = maximin::maximin_region(&cfg.scenario, &w, grid_points)?;
            println!("target={}", r.target);
            println!("tau_max={}", r.tau_max);
            println!("grid_points_optimal={}/{}", r.region.len(), r.grid_points);
        }
        Command::FdaTable { out } => {
            let c = FdaConfig::default();
            let rows = harness::fda_table(&c)?;
            fda::write_csv(&c, &rows, output(&out)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
