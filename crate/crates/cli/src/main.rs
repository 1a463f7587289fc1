//! Command line front end: simulate ARFIMA sample paths, bias-correct
//! persistence statistics on a series, and run full Monte Carlo
//! experiments.

use clap::{Args, Parser, Subcommand};
use longmem::arfima::ArfimaSpec;
use longmem::arfit::FitMethod;
use longmem::error::Error;
use longmem::estimators::{self, OrderRule, StatKind, StatRequest};
use longmem::harness::{self, ExperimentConfig};
use longmem::sieve::{self, SieveConfig, SieveMethod, Transform};
use longmem::simulate::{simulate_gaussian, SimConfig};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "longmem",
    about = "ARFIMA simulation and sieve-bootstrap bias correction of persistence measures",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a zero-mean Gaussian ARFIMA(1,d,0) sample path to CSV.
    Simulate(SimulateArgs),
    /// Bias-correct sample ACF/IRF values on a series via the sieve bootstrap.
    #[command(name = "bias-correct")]
    BiasCorrect(BiasCorrectArgs),
    /// Run a Monte Carlo experiment from a config file.
    Mc(McArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Fractional integration parameter, |d| < 0.5.
    #[arg(long)]
    d: f64,
    /// AR(1) coefficient (0 for pure fractional noise).
    #[arg(long)]
    phi: f64,
    /// Innovation variance.
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Sample size.
    #[arg(long = "T")]
    t: usize,
    /// RNG seed.
    #[arg(long)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BiasCorrectArgs {
    /// Input CSV: one observation per line; '#' lines and a leading
    /// non-numeric header are skipped.
    #[arg(long)]
    input: PathBuf,
    /// Statistic to adjust: acf | irf.
    #[arg(long)]
    stat: String,
    /// raw | prefiltered-splw | prefiltered-d=<f> | kilian
    #[arg(long)]
    method: String,
    /// Bootstrap resamples.
    #[arg(long = "B")]
    b: usize,
    /// Order rule for the sieve (and the IRF statistic): aic | logsq.
    #[arg(long)]
    order: String,
    /// Comma-separated lag list, e.g. 1,3,6,9,12.
    #[arg(long, value_delimiter = ',')]
    lags: Vec<usize>,
    /// RNG seed.
    #[arg(long)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// SPLW bandwidth override (default floor(T^0.65)).
    #[arg(long = "splw-n")]
    splw_n: Option<usize>,
}

#[derive(Args)]
struct McArgs {
    /// Experiment config file (flat key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => run_simulate(&args),
        Command::BiasCorrect(args) => run_bias_correct(&args),
        Command::Mc(args) => run_mc(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run_simulate(args: &SimulateArgs) -> longmem::Result<()> {
    let ar = if args.phi == 0.0 { vec![] } else { vec![args.phi] };
    let spec = ArfimaSpec::new(args.d, ar, args.sigma2)?;
    let config = SimConfig::new(spec, args.t, args.seed)?;
    let y = simulate_gaussian(&config)?;
    let mut out = format!(
        "# d={},phi={},sigma2={},T={},seed={},rng={}\ny\n",
        args.d,
        args.phi,
        args.sigma2,
        args.t,
        args.seed,
        longmem::rng::RNG_ID
    );
    for v in &y {
        let _ = writeln!(out, "{v}");
    }
    std::fs::write(&args.out, out)?;
    println!("wrote {} observations to {}", y.len(), args.out.display());
    Ok(())
}

fn read_series(path: &Path) -> longmem::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if values.is_empty() => continue, // column header
            Err(_) => {
                return Err(Error::Config(format!("non-numeric data line: '{line}'")));
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Config("input contains no observations".into()));
    }
    Ok(values)
}

enum MethodArg {
    Sieve(SieveMethod, Option<f64>),
    Kilian,
}

fn parse_method(s: &str) -> longmem::Result<MethodArg> {
    if s == "raw" {
        return Ok(MethodArg::Sieve(SieveMethod::Raw, None));
    }
    if s == "prefiltered-splw" {
        return Ok(MethodArg::Sieve(SieveMethod::PrefilteredSplw, None));
    }
    if s == "kilian" {
        return Ok(MethodArg::Kilian);
    }
    if let Some(value) = s.strip_prefix("prefiltered-d=") {
        let d: f64 = value
            .parse()
            .map_err(|_| Error::Config(format!("bad pre-filter value in '{s}'")))?;
        return Ok(MethodArg::Sieve(SieveMethod::PrefilteredTrueD, Some(d)));
    }
    Err(Error::Config(format!(
        "unknown method '{s}' (expected raw | prefiltered-splw | prefiltered-d=<f> | kilian)"
    )))
}

fn run_bias_correct(args: &BiasCorrectArgs) -> longmem::Result<()> {
    let y = read_series(&args.input)?;
    let stat = match args.stat.as_str() {
        "acf" => StatKind::Acf,
        "irf" => StatKind::Irf,
        other => return Err(Error::Config(format!("unknown stat '{other}'"))),
    };
    let order_rule = match args.order.as_str() {
        "aic" => OrderRule::Aic,
        "logsq" => OrderRule::FixedLogSq,
        other => return Err(Error::Config(format!("unknown order rule '{other}'"))),
    };
    if args.lags.is_empty() {
        return Err(Error::Config("at least one lag is required".into()));
    }
    let transform = match stat {
        StatKind::Acf => Transform::FisherZ,
        StatKind::Irf => Transform::Identity,
    };

    let mut out = String::new();
    match parse_method(&args.method)? {
        MethodArg::Kilian => {
            if stat != StatKind::Irf {
                return Err(Error::Config("kilian applies to the irf only".into()));
            }
            let cfg = SieveConfig {
                method: SieveMethod::Raw,
                b: args.b,
                order_rule,
                fit_method: FitMethod::Burg,
                true_d: None,
                seed: args.seed,
            };
            let observed = estimators::sample_irf(&y, order_rule, &args.lags)?;
            let adjusted = sieve::kilian_adjust(&y, &cfg, &args.lags)?;
            let _ = writeln!(
                out,
                "# method={},B={},order={},seed={},rng={}",
                args.method,
                args.b,
                args.order,
                args.seed,
                longmem::rng::RNG_ID
            );
            out.push_str("stat,k,observed,boot_mean,s_ref,bias_hat,adjusted\n");
            for (i, &k) in args.lags.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "irf,{k},{},,,{},{}",
                    observed[i],
                    observed[i] - adjusted[i],
                    adjusted[i]
                );
            }
        }
        MethodArg::Sieve(method, true_d) => {
            let d_hat = match method {
                SieveMethod::PrefilteredSplw => {
                    let n = args
                        .splw_n
                        .unwrap_or_else(|| estimators::default_splw_bandwidth(y.len()));
                    Some(estimators::splw(&y, n)?.d_hat)
                }
                _ => None,
            };
            let cfg = SieveConfig {
                method,
                b: args.b,
                order_rule,
                fit_method: FitMethod::Burg,
                true_d,
                seed: args.seed,
            };
            let request = StatRequest {
                kind: stat,
                lags: args.lags.clone(),
                order_rule,
            };
            let run = sieve::run_sieve_bootstrap(&y, &cfg, &[request], d_hat)?;
            let _ = writeln!(
                out,
                "# method={},B={},order={},seed={},h={},d_hat={},rng={}",
                args.method,
                args.b,
                args.order,
                args.seed,
                run.h,
                run.d_hat.map(|d| d.to_string()).unwrap_or_default(),
                longmem::rng::RNG_ID
            );
            out.push_str("stat,k,observed,boot_mean,s_ref,bias_hat,adjusted\n");
            for dist in &run.distributions {
                let boot_mean = dist.draws.iter().sum::<f64>() / dist.draws.len() as f64;
                let adjusted = sieve::bias_adjust(dist, transform)?;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    stat.as_str(),
                    dist.lag,
                    dist.s_obs,
                    boot_mean,
                    dist.s_ref,
                    boot_mean - dist.s_ref,
                    adjusted
                );
            }
        }
    }
    std::fs::write(&args.out, out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn run_mc(args: &McArgs) -> longmem::Result<()> {
    let config = ExperimentConfig::from_file(&args.config)?;
    let result = harness::run_experiment_with_threads(&config, args.threads)?;
    let written = harness::emit_outputs(&result, &args.out)?;
    let mut failed_reps = 0usize;
    for cell in &result.cells {
        failed_reps += cell.n_failed;
        if cell.n_failed > 0 {
            eprintln!(
                "warning: cell d={} phi={} T={}: {} failed replications",
                cell.d, cell.phi, cell.t, cell.n_failed
            );
        }
    }
    println!(
        "completed {} cell(s), {} file(s) written to {} ({} failed replications)",
        result.cells.len(),
        written.len(),
        args.out.display(),
        failed_reps
    );
    Ok(())
}
