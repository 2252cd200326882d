//! Parameter sweeps combining analytic and Monte Carlo evaluations into one
//! CSV table: one row per (swept value, scheme, quantity).

use ehrelay::analysis;
use ehrelay::mc;
use ehrelay::model::SystemParams;
use ehrelay::quad::QuadratureSpec;
use ehrelay::schemes::Scheme;
use ehrelay::Error;
use std::io::Write;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Rho1Db,
    RhoIDb,
    Theta,
    NAntennas,
    D1,
    DI,
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().replace('-', "_").to_ascii_lowercase().as_str() {
            "rho1_db" => Ok(SweepParam::Rho1Db),
            "rho_i_db" => Ok(SweepParam::RhoIDb),
            "theta" => Ok(SweepParam::Theta),
            "n_antennas" | "n" => Ok(SweepParam::NAntennas),
            "d1" => Ok(SweepParam::D1),
            "d_i" => Ok(SweepParam::DI),
            other => Err(format!(
                "unknown sweep parameter `{other}` (expected rho1_db, rho_i_db, theta, n_antennas, d1 or d_i)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    OutageMc,
    OutageLb,
    OutageHsnr,
    OutageExact,
    CapacityMc,
    CapacityUb,
    ThetaOpt,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::OutageMc => "outage_mc",
            Quantity::OutageLb => "outage_lb",
            Quantity::OutageHsnr => "outage_hsnr",
            Quantity::OutageExact => "outage_exact",
            Quantity::CapacityMc => "capacity_mc",
            Quantity::CapacityUb => "capacity_ub",
            Quantity::ThetaOpt => "theta_opt",
        }
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "outage_mc" => Ok(Quantity::OutageMc),
            "outage_lb" => Ok(Quantity::OutageLb),
            "outage_hsnr" => Ok(Quantity::OutageHsnr),
            "outage_exact" => Ok(Quantity::OutageExact),
            "capacity_mc" => Ok(Quantity::CapacityMc),
            "capacity_ub" => Ok(Quantity::CapacityUb),
            "theta_opt" => Ok(Quantity::ThetaOpt),
            other => Err(format!("unknown output quantity `{other}`")),
        }
    }
}

/// One full sweep description.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub base: SystemParams,
    pub schemes: Vec<Scheme>,
    pub outputs: Vec<Quantity>,
    pub mc_samples: usize,
    pub seed: u64,
    pub nudge: bool,
}

pub const CSV_HEADER: &str = "param,scheme,quantity,value,stderr";

fn fmt(v: f64) -> String {
    format!("{v:.11e}")
}

/// Apply one swept value to the base parameters.
fn apply(base: &SystemParams, param: SweepParam, value: f64) -> Result<SystemParams, CliError> {
    let mut p = *base;
    match param {
        SweepParam::Rho1Db => p.rho1 = 10f64.powf(value / 10.0),
        SweepParam::RhoIDb => p.rho_i = 10f64.powf(value / 10.0),
        SweepParam::Theta => p.theta = value,
        SweepParam::NAntennas => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(CliError::Usage(format!(
                    "n_antennas sweep value {value} is not a positive integer"
                )));
            }
            p.n_antennas = value as usize;
        }
        SweepParam::D1 => p.d1 = value,
        SweepParam::DI => p.d_i = value,
    }
    Ok(p)
}

/// Degenerate-scale handling: with `--nudge` the interferer power is
/// perturbed by 1e-6 relative; otherwise the point is a hard error.
fn resolve(p: SystemParams, nudge: bool) -> Result<SystemParams, CliError> {
    let mut p = p;
    if p.rho_i > 0.0 && p.s1() == p.si() {
        if nudge {
            p.rho_i *= 1.0 + 1e-6;
        } else {
            return Err(CliError::Degenerate(format!(
                "rho1/d1^tau equals rho_i/d_i^tau at rho1 = {}, rho_i = {}; \
                 pass --nudge to perturb rho_i by 1e-6 relative",
                p.rho1, p.rho_i
            )));
        }
    }
    Ok(p)
}

fn map_err(e: Error) -> CliError {
    match e {
        Error::DegenerateParams(msg) => CliError::Degenerate(msg),
        other => CliError::Usage(other.to_string()),
    }
}

pub fn run_sweep<W: Write>(spec: &SweepSpec, out: &mut W) -> Result<(), CliError> {
    spec.base.validate().map_err(map_err)?;
    if spec.values.is_empty() {
        return Err(CliError::Usage("empty sweep value list".into()));
    }
    if spec.schemes.is_empty() {
        return Err(CliError::Usage("no schemes selected".into()));
    }
    let quad = QuadratureSpec::default();
    writeln!(out, "{CSV_HEADER}").map_err(CliError::io)?;
    for &value in &spec.values {
        let point = resolve(apply(&spec.base, spec.param, value)?, spec.nudge)?;
        for &scheme in &spec.schemes {
            // An antenna-count sweep may pass through N = 1 where zero
            // forcing is undefined; skip that cell rather than abort the
            // table. A directly requested infeasible base still errors.
            if scheme == Scheme::ZfMrt
                && point.n_antennas < 2
                && spec.param == SweepParam::NAntennas
            {
                continue;
            }
            for &qty in &spec.outputs {
                let (val, err) = match qty {
                    Quantity::OutageMc => {
                        let e = mc::estimate_outage(scheme, &point, spec.mc_samples, spec.seed)
                            .map_err(map_err)?;
                        (e.mean, Some(e.std_error))
                    }
                    Quantity::OutageLb => {
                        let (_, b) = analysis::outage_lower_bound(scheme, &point).map_err(map_err)?;
                        (b, None)
                    }
                    Quantity::OutageHsnr => {
                        (analysis::outage_high_snr(scheme, &point).map_err(map_err)?, None)
                    }
                    Quantity::OutageExact => {
                        if scheme != Scheme::NoiseLimited {
                            continue; // only the noise-limited link has an exact form
                        }
                        (analysis::outage_exact_nl(&point, &quad).map_err(map_err)?, None)
                    }
                    Quantity::CapacityMc => {
                        let e = mc::estimate_capacity(scheme, &point, spec.mc_samples, spec.seed)
                            .map_err(map_err)?;
                        (e.mean, Some(e.std_error))
                    }
                    Quantity::CapacityUb => (
                        analysis::capacity_upper_bound(scheme, &point, &quad).map_err(map_err)?,
                        None,
                    ),
                    Quantity::ThetaOpt => (
                        ehrelay::optimum::optimal_theta(scheme, &point)
                            .map_err(map_err)?
                            .theta_star,
                        None,
                    ),
                };
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    value,
                    scheme,
                    qty.name(),
                    fmt(val),
                    err.map(fmt).unwrap_or_default()
                )
                .map_err(CliError::io)?;
            }
        }
    }
    Ok(())
}
