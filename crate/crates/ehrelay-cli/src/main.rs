//! Batch front-end: parameter sweeps over the analytic and Monte Carlo
//! evaluators, optimal splitting-ratio solving, and the validation suite.
//!
//! All powers cross this boundary in dB and are converted once
//! (`linear = 10^(dB/10)`); the library underneath is linear-only.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage error,
//! 3 degenerate parameters (equal effective branch gains without `--nudge`).

mod config;
mod sweep;
mod validate;

use clap::{Args, Parser, Subcommand};
use config::FileConfig;
use ehrelay::model::SystemParams;
use ehrelay::optimum;
use ehrelay::schemes::Scheme;
use std::io::Write;
use std::path::PathBuf;
use sweep::{Quantity, SweepParam, SweepSpec};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Degenerate(String),
    ValidationFailed,
}

impl CliError {
    fn usage<E: std::fmt::Display>(e: E) -> Self {
        CliError::Usage(e.to_string())
    }

    fn io(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }

    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::ValidationFailed => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ehrelay",
    version,
    about = "Outage and capacity laboratory for wireless-powered multi-antenna AF relaying"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Outage sweep: Monte Carlo estimate, lower bound, high-SNR
    /// approximation and (noise-limited) exact value.
    Outage(SweepArgs),
    /// Ergodic-capacity sweep: Monte Carlo estimate and upper bound.
    Capacity(SweepArgs),
    /// Outage-optimal power-splitting ratio.
    Theta(ThetaArgs),
    /// Run the cross-check suite; exits 1 on any failed tolerance.
    Validate(ValidateArgs),
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Number of relay antennas.
    #[arg(long)]
    n: Option<usize>,
    /// RF-to-DC conversion efficiency.
    #[arg(long)]
    eta: Option<f64>,
    /// Power-splitting ratio (fraction routed to harvesting).
    #[arg(long)]
    theta: Option<f64>,
    /// Source SNR in dB.
    #[arg(long = "rho1-db")]
    rho1_db: Option<f64>,
    /// Interferer SNR in dB.
    #[arg(long = "rho-i-db")]
    rho_i_db: Option<f64>,
    /// Source-relay distance.
    #[arg(long)]
    d1: Option<f64>,
    /// Relay-destination distance.
    #[arg(long)]
    d2: Option<f64>,
    /// Interferer-relay distance.
    #[arg(long = "d-i")]
    d_i: Option<f64>,
    /// Path-loss exponent.
    #[arg(long)]
    tau: Option<f64>,
    /// Outage SINR threshold in dB.
    #[arg(long = "gamma-th-db")]
    gamma_th_db: Option<f64>,
    /// Perturb rho_i by 1e-6 relative when the effective branch gains
    /// coincide instead of failing.
    #[arg(long)]
    nudge: bool,
    /// Flat key = value config file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Schemes to evaluate (comma separated: nl, mrc, zf, mmse).
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<String>,
    /// Swept parameter and its range, e.g. `--sweep rho1_db 0:5:40` or a
    /// comma list `--sweep theta 0.1,0.5,0.9`.
    #[arg(long, num_args = 2, value_names = ["PARAM", "RANGE"])]
    sweep: Option<Vec<String>>,
    /// Quantities to emit (default: all applicable to the subcommand).
    #[arg(long, value_delimiter = ',')]
    outputs: Option<Vec<String>>,
    /// Monte Carlo draws per point.
    #[arg(long = "mc-samples")]
    mc_samples: Option<usize>,
    /// Base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThetaArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Scheme to optimize for.
    #[arg(long, default_value = "mrc")]
    scheme: String,
    /// Also print a Monte Carlo outage-vs-theta table with shared draws.
    #[arg(long)]
    scan: bool,
    /// Grid points for --scan.
    #[arg(long = "grid-points", default_value_t = 49)]
    grid_points: usize,
    /// Draws per grid point for --scan.
    #[arg(long = "mc-samples")]
    mc_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Reduced grid and sample counts.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Merge defaults <- config file <- command line flags.
fn build_params(args: &ParamArgs, cfg: &FileConfig) -> Result<SystemParams, CliError> {
    fn pick<T: std::str::FromStr>(
        flag: Option<T>,
        cfg: &FileConfig,
        key: &str,
        default: T,
    ) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => Ok(cfg.parse::<T>(key).map_err(CliError::Usage)?.unwrap_or(default)),
        }
    }

    let p = SystemParams {
        n_antennas: pick(args.n, cfg, "n", 2)?,
        eta: pick(args.eta, cfg, "eta", 0.8)?,
        theta: pick(args.theta, cfg, "theta", 0.5)?,
        rho1: db_to_linear(pick(args.rho1_db, cfg, "rho1_db", 20.0)?),
        rho_i: db_to_linear(pick(args.rho_i_db, cfg, "rho_i_db", 9.5)?),
        d1: pick(args.d1, cfg, "d1", 1.0)?,
        d2: pick(args.d2, cfg, "d2", 1.0)?,
        d_i: pick(args.d_i, cfg, "d_i", 1.0)?,
        tau: pick(args.tau, cfg, "tau", 2.0)?,
        gamma_th: db_to_linear(pick(args.gamma_th_db, cfg, "gamma_th_db", 0.0)?),
    };
    p.validate().map_err(CliError::usage)?;
    Ok(p)
}

fn load_config(args: &ParamArgs) -> Result<FileConfig, CliError> {
    match &args.config {
        Some(path) => FileConfig::load(path).map_err(CliError::Usage),
        None => Ok(FileConfig::default()),
    }
}

fn parse_schemes(flag: &[String], cfg: &FileConfig) -> Result<Vec<Scheme>, CliError> {
    let raw: Vec<String> = if !flag.is_empty() {
        flag.to_vec()
    } else if let Some(line) = cfg.get("scheme") {
        line.split(',').map(|s| s.trim().to_string()).collect()
    } else {
        return Ok(Scheme::ALL.to_vec());
    };
    raw.iter()
        .map(|s| s.parse::<Scheme>().map_err(CliError::usage))
        .collect()
}

fn build_sweep(
    args: &SweepArgs,
    defaults: &[Quantity],
    base: SystemParams,
    cfg: &FileConfig,
) -> Result<SweepSpec, CliError> {
    let sweep_decl: Option<(String, String)> = match &args.sweep {
        Some(pair) => Some((pair[0].clone(), pair[1].clone())),
        None => cfg.get("sweep").map(|line| {
            let mut it = line.split_whitespace();
            (
                it.next().unwrap_or_default().to_string(),
                it.next().unwrap_or_default().to_string(),
            )
        }),
    };
    let (param, values) = match sweep_decl {
        Some((name, range)) => (
            name.parse::<SweepParam>().map_err(CliError::Usage)?,
            config::parse_range(&range).map_err(CliError::Usage)?,
        ),
        None => (
            SweepParam::Rho1Db,
            vec![10.0 * base.rho1.log10()],
        ),
    };
    let outputs = match &args.outputs {
        Some(names) => names
            .iter()
            .map(|s| s.parse::<Quantity>().map_err(CliError::Usage))
            .collect::<Result<Vec<_>, _>>()?,
        None => defaults.to_vec(),
    };
    Ok(SweepSpec {
        param,
        values,
        base,
        schemes: parse_schemes(&args.scheme, cfg)?,
        outputs,
        mc_samples: match args.mc_samples {
            Some(v) => v,
            None => cfg
                .parse::<usize>("mc_samples")
                .map_err(CliError::Usage)?
                .unwrap_or(1_000_000),
        },
        seed: match args.seed {
            Some(v) => v,
            None => cfg.parse::<u64>("seed").map_err(CliError::Usage)?.unwrap_or(1),
        },
        nudge: args.params.nudge || cfg.get("nudge").is_some_and(|v| v == "true" || v == "1"),
    })
}

fn with_output<F>(out: &Option<PathBuf>, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    match out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(CliError::io)?;
            let mut w = std::io::BufWriter::new(file);
            body(&mut w)?;
            w.flush().map_err(CliError::io)
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            body(&mut w)
        }
    }
}

fn run_theta(args: &ThetaArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.params)?;
    let base = build_params(&args.params, &cfg)?;
    let scheme: Scheme = args.scheme.parse().map_err(CliError::usage)?;
    let mut point = base;
    if point.rho_i > 0.0 && point.s1() == point.si() {
        if args.params.nudge {
            point.rho_i *= 1.0 + 1e-6;
        } else if scheme.uses_cci() {
            return Err(CliError::Degenerate(
                "rho1/d1^tau equals rho_i/d_i^tau; pass --nudge to perturb rho_i".into(),
            ));
        }
    }
    let sol = optimum::optimal_theta(scheme, &point).map_err(|e| match e {
        ehrelay::Error::DegenerateParams(m) => CliError::Degenerate(m),
        other => CliError::Usage(other.to_string()),
    })?;
    let samples = args.mc_samples.unwrap_or(1_000_000);
    let seed = args.seed.unwrap_or(1);
    with_output(&args.out, |w| {
        writeln!(w, "scheme,theta_star,residual,bracket").map_err(CliError::io)?;
        writeln!(
            w,
            "{scheme},{:.11e},{:.3e},{:.3e}",
            sol.theta_star, sol.residual, sol.bracket
        )
        .map_err(CliError::io)?;
        if args.scan {
            let scan = optimum::mc_theta_scan(scheme, &point, args.grid_points, samples, seed)
                .map_err(CliError::usage)?;
            writeln!(w, "{}", sweep::CSV_HEADER).map_err(CliError::io)?;
            for (theta, outage) in scan.thetas.iter().zip(&scan.outage) {
                let se = (outage * (1.0 - outage) / samples as f64).sqrt();
                writeln!(w, "{theta},{scheme},outage_mc,{outage:.11e},{se:.11e}")
                    .map_err(CliError::io)?;
            }
            writeln!(
                w,
                "{},{scheme},theta_mc_argmin,{:.11e},",
                scan.argmin_theta, scan.argmin_theta
            )
            .map_err(CliError::io)?;
        }
        Ok(())
    })
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Outage(args) => {
            let cfg = load_config(&args.params)?;
            let base = build_params(&args.params, &cfg)?;
            let spec = build_sweep(
                args,
                &[
                    Quantity::OutageMc,
                    Quantity::OutageLb,
                    Quantity::OutageHsnr,
                    Quantity::OutageExact,
                ],
                base,
                &cfg,
            )?;
            with_output(&args.out, |mut w| sweep::run_sweep(&spec, &mut w))
        }
        Cmd::Capacity(args) => {
            let cfg = load_config(&args.params)?;
            let base = build_params(&args.params, &cfg)?;
            let spec = build_sweep(
                args,
                &[Quantity::CapacityMc, Quantity::CapacityUb],
                base,
                &cfg,
            )?;
            with_output(&args.out, |mut w| sweep::run_sweep(&spec, &mut w))
        }
        Cmd::Theta(args) => run_theta(args),
        Cmd::Validate(args) => {
            let seed = args.seed.unwrap_or(1);
            let mut all_pass = true;
            with_output(&args.out, |mut w| {
                all_pass = validate::run_validate(args.quick, seed, &mut w)?;
                Ok(())
            })?;
            if all_pass {
                Ok(())
            } else {
                Err(CliError::ValidationFailed)
            }
        }
    }
}

fn main() {
    match run() {
        Ok(()) => {}
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Degenerate(msg) => eprintln!("error: degenerate parameters: {msg}"),
                CliError::ValidationFailed => eprintln!("validation failed"),
            }
            std::process::exit(e.exit_code());
        }
    }
}
