//! Outage-optimal power-splitting ratio.
//!
//! Each scheme's high-SNR outage approximation is convex-like in `theta`
//! with a unique interior stationary point; the optimizers here solve the
//! corresponding first-order conditions by sign-change bracketing plus
//! bisection with a final secant polish (the conditions contain
//! `ln(1-theta)` and high negative powers of `theta`, so derivative-based
//! iterations are fragile at the interval ends). The optimum is therefore
//! surrogate-optimal: it minimizes the high-SNR approximation, and is
//! validated against a common-random-numbers Monte Carlo grid scan at high
//! source SNR.

use crate::analysis::interference_gain_sum;
use crate::model::{RngStream, SystemParams};
use crate::schemes::{self, Scheme};
use crate::specfun::factorial;
use crate::{Error, Result};
use rayon::prelude::*;

const THETA_LO: f64 = 1e-6;
const THETA_HI: f64 = 1.0 - 1e-6;

/// First-order optimality condition in `theta` for one scheme.
#[derive(Debug, Clone)]
pub struct ThetaPolynomial {
    pub scheme: Scheme,
    n: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    NoiseLimited { a1: f64, b1: f64, c1: f64, d1: f64 },
    Mrc { a: Vec<f64>, b: f64 },
    Zf { a1: f64, b1: f64 },
    Mmse { b: f64, si: f64 },
}

impl ThetaPolynomial {
    pub fn new(scheme: Scheme, p: &SystemParams) -> Result<Self> {
        p.validate()?;
        let n = p.n_antennas;
        let nf = n as f64;
        let gamma_n = factorial(n - 1);
        let kind = match scheme {
            Scheme::NoiseLimited => {
                let c1 = (p.d2_tau() / p.eta).powi(n as i32) / gamma_n;
                Kind::NoiseLimited {
                    a1: nf,
                    b1: nf * c1
                        * (p.rho1.ln()
                            - (p.d1_tau() * p.gamma_th).ln()
                            - crate::specfun::EULER_GAMMA),
                    c1,
                    d1: nf * c1,
                }
            }
            Scheme::MrcMrt | Scheme::MmseMrt => {
                Self::require_cci(p)?;
                let b = Self::shared_b(p)?;
                if scheme == Scheme::MrcMrt {
                    let a = (0..n)
                        .map(|k| p.si().powi(k as i32) / factorial(n - k - 1))
                        .collect();
                    Kind::Mrc { a, b }
                } else {
                    Kind::Mmse { b, si: p.si() }
                }
            }
            Scheme::ZfMrt => {
                if n < 2 {
                    return Err(Error::SchemeUnsupported(
                        "zf-mrt needs more antennas than interferers (N > 1)".into(),
                    ));
                }
                Self::require_cci(p)?;
                Kind::Zf {
                    a1: 1.0 / factorial(n - 2),
                    b1: Self::shared_b(p)? * p.gamma_th / p.s1(),
                }
            }
        };
        Ok(ThetaPolynomial { scheme, n, kind })
    }

    fn require_cci(p: &SystemParams) -> Result<()> {
        if p.rho_i <= 0.0 {
            return Err(Error::DegenerateParams(
                "interference-scheme optimality conditions need rho_i > 0".into(),
            ));
        }
        if p.s1() == p.si() {
            return Err(Error::DegenerateParams(
                "equal effective branch gains rho1/d1^tau == rho_i/d_i^tau".into(),
            ));
        }
        Ok(())
    }

    /// `B = (d2^tau/eta)^N sum_i [...] / Gamma(N)^2`, the second-hop
    /// coefficient shared by the MRC and MMSE conditions.
    fn shared_b(p: &SystemParams) -> Result<f64> {
        let n = p.n_antennas;
        let s = interference_gain_sum(n, p.si() / p.s1())?;
        Ok((p.d2_tau() / p.eta).powi(n as i32) * s / (factorial(n - 1) * factorial(n - 1)))
    }

    /// Condition value and a magnitude scale for residual normalization.
    pub fn eval_scaled(&self, theta: f64) -> (f64, f64) {
        let n = self.n as i32;
        let omth = 1.0 - theta;
        match &self.kind {
            Kind::NoiseLimited { a1, b1, c1, d1 } => {
                let t = [
                    a1 * theta.powi(n + 1),
                    -b1 * omth.powi(n + 1),
                    -c1 * theta * omth.powi(n),
                    -d1 * omth.powi(n + 1) * omth.ln(),
                ];
                (t.iter().sum(), t.iter().map(|x| x.abs()).sum())
            }
            Kind::Mrc { a, b } => {
                let mut first = 0.0;
                for (k, ak) in a.iter().enumerate() {
                    first += ak * omth.powi(k as i32 - n - 1);
                }
                let second = b / theta.powi(n + 1);
                (first - second, first.abs() + second.abs())
            }
            Kind::Zf { a1, b1 } => {
                let first = a1 / omth.powi(n);
                let second = b1 / theta.powi(n + 1);
                (first - second, first + second)
            }
            Kind::Mmse { b, si } => {
                let gamma_n = factorial(self.n - 1);
                let first = 1.0 / (omth.powi(n + 1) * gamma_n);
                let mid = (self.n as f64 - 1.0) * si / (omth.powi(n) * gamma_n);
                let second = b / theta.powi(n + 1);
                (first + mid - second, first + mid + second)
            }
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.eval_scaled(theta).0
    }
}

/// Result of the first-order-condition solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSolution {
    pub theta_star: f64,
    /// |condition| at the root.
    pub residual: f64,
    /// Width of the final bisection bracket.
    pub bracket: f64,
}

fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<(f64, f64)> {
    const SCAN: usize = 2000;
    let step = (hi - lo) / SCAN as f64;
    let mut a = lo;
    let mut fa = f(a);
    let mut bracket = None;
    for i in 1..=SCAN {
        let b = lo + step * i as f64;
        let fb = f(b);
        if fa == 0.0 {
            bracket = Some((a, a));
            break;
        }
        if fa * fb < 0.0 {
            bracket = Some((a, b));
            break;
        }
        a = b;
        fa = fb;
    }
    let (mut a, mut b) = bracket.ok_or_else(|| {
        Error::BracketFailure(format!(
            "no sign change of the optimality condition on ({lo:.1e}, {hi:.6})"
        ))
    })?;
    if a == b {
        return Ok((a, 0.0));
    }
    let mut fa = f(a);
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok((mid, 0.0));
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    // Secant polish inside the bracket.
    let (mut x0, mut x1) = (a, b);
    let (mut f0, mut f1) = (f(x0), f(x1));
    for _ in 0..4 {
        if f1 == f0 {
            break;
        }
        let x2 = (x1 - f1 * (x1 - x0) / (f1 - f0)).clamp(a, b);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f(x2);
    }
    let best = if f1.abs() <= f0.abs() { x1 } else { x0 };
    Ok((best, b - a))
}

/// Solve the first-order condition for the outage-optimal splitting ratio.
pub fn optimal_theta(scheme: Scheme, p: &SystemParams) -> Result<ThetaSolution> {
    let poly = ThetaPolynomial::new(scheme, p)?;
    let (theta_star, bracket) = find_root(|t| poly.eval(t), THETA_LO, THETA_HI)?;
    let (value, _scale) = poly.eval_scaled(theta_star);
    Ok(ThetaSolution {
        theta_star,
        residual: value.abs(),
        bracket,
    })
}

/// Closed-form optimal ratio for single-antenna MRC/MRT,
/// `theta* = sqrt(X) / (1 + sqrt(X))` with
/// `X = d2^tau ln(q) / (eta (q - 1))`, `q = (rho_i/d_i^tau)/(rho1/d1^tau)`.
pub fn optimal_theta_mrc_n1(p: &SystemParams) -> Result<f64> {
    p.validate()?;
    if p.rho_i <= 0.0 {
        return Err(Error::DegenerateParams("needs rho_i > 0".into()));
    }
    let q = p.si() / p.s1();
    if q == 1.0 {
        return Err(Error::DegenerateParams(
            "equal effective branch gains rho1/d1^tau == rho_i/d_i^tau".into(),
        ));
    }
    let x = p.d2_tau() * q.ln() / (p.eta * (q - 1.0));
    let r = x.sqrt();
    Ok(r / (1.0 + r))
}

/// Monte Carlo outage curve over a theta grid with common random numbers.
#[derive(Debug, Clone)]
pub struct ThetaScan {
    pub thetas: Vec<f64>,
    pub outage: Vec<f64>,
    pub argmin_theta: f64,
}

/// Estimate outage on a uniform theta grid over [0.02, 0.98], reusing one
/// shared set of channel draws across all grid points.
pub fn mc_theta_scan(
    scheme: Scheme,
    p: &SystemParams,
    grid_points: usize,
    samples_per_point: usize,
    seed: u64,
) -> Result<ThetaScan> {
    p.validate()?;
    if grid_points < 11 {
        return Err(Error::InvalidParams(format!(
            "grid_points = {grid_points} (requires >= 11)"
        )));
    }
    if scheme == Scheme::ZfMrt && p.n_antennas < 2 {
        return Err(Error::SchemeUnsupported(
            "zf-mrt needs more antennas than interferers (N > 1)".into(),
        ));
    }
    let n_ant = p.n_antennas;
    const BLOCK: usize = 1 << 14;
    let blocks: Vec<(u64, usize)> = (0..samples_per_point.div_ceil(BLOCK))
        .map(|b| (b as u64, BLOCK.min(samples_per_point - b * BLOCK)))
        .collect();
    let stats: Vec<schemes::DrawStats> = blocks
        .par_iter()
        .flat_map_iter(|&(b, len)| {
            let mut rng = RngStream::new(seed, b).rng();
            (0..len)
                .map(|_| schemes::sample_stats(n_ant, &mut rng))
                .collect::<Vec<_>>()
        })
        .collect();

    let thetas: Vec<f64> = (0..grid_points)
        .map(|j| 0.02 + 0.96 * j as f64 / (grid_points - 1) as f64)
        .collect();
    let outage: Vec<f64> = thetas
        .par_iter()
        .map(|&theta| {
            let mut pt = *p;
            pt.theta = theta;
            let hits = stats
                .iter()
                .filter(|st| {
                    schemes::sinr(scheme, st, &pt).expect("scheme checked").gamma_e2e < pt.gamma_th
                })
                .count();
            hits as f64 / stats.len() as f64
        })
        .collect();

    let argmin = outage
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    Ok(ThetaScan {
        argmin_theta: thetas[argmin],
        thetas,
        outage,
    })
}
