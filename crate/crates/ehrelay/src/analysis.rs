//! Closed-form and single-integral performance expressions: exact outage of
//! the noise-limited link, outage lower bounds and high-SNR approximations
//! for all four schemes, ergodic-capacity upper bounds, and the cdf/pdf
//! building blocks they stand on.
//!
//! Conventions used throughout (all linear, noise-normalized):
//!
//! * `s1 = rho1 / d1^tau`, `si = rho_i / d_i^tau` — received path gains;
//! * `b1 = 1/s1`, `bi = 1/si` — the two exponential decay scales of the
//!   harvested-power variable `Z = s1 |h1|^2 + si |h_i|^2`;
//! * `kappa = 1 / ((1-theta) s1)` — first-hop cdf argument scale;
//! * `lambda = 1 / ((1-theta) si)` — first-hop interference scale.
//!
//! The two-branch expansions of `Z` (its pdf, the shared second-hop factor,
//! `E ln Z`) alternate in sign and their coefficients contain
//! `(bi - b1)^{1-N-s}`, which explodes as the two scales approach each
//! other; those sums are accumulated in log space with explicit sign
//! tracking, and the exactly-degenerate case `s1 == si` is rejected as
//! [`Error::DegenerateParams`] rather than silently perturbed. Splitting
//! ratios of exactly 0 or 1 make outage certain and capacity zero; the
//! analysis routines return those limits directly.
//!
//! Terms that in closed form would be Meijer-G functions are evaluated by
//! adaptive quadrature of the defining integrals they abbreviate (the
//! keyhole capacity integral, the log-moment integrals, the first-hop
//! capacity integrals), never by a symbolic G engine.

use crate::model::{gamma_cdf, SystemParams};
use crate::quad::{self, QuadratureSpec};
use crate::schemes::Scheme;
use crate::specfun::{
    bessel_k_int, binomial, digamma, exp_integral_ei, factorial, gauss_2f1, kummer_u, ln_factorial,
    ln_gamma, upper_inc_gamma, EULER_GAMMA,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Shared scales and guards
// ---------------------------------------------------------------------------

/// First-hop cdf scale `d1^tau / ((1-theta) rho1)`.
fn kappa1(p: &SystemParams) -> f64 {
    1.0 / ((1.0 - p.theta) * p.s1())
}

/// Interference scale `d_i^tau / ((1-theta) rho_i)`.
fn lambda_i(p: &SystemParams) -> f64 {
    1.0 / ((1.0 - p.theta) * p.si())
}

fn theta_degenerate(p: &SystemParams) -> bool {
    p.theta <= 0.0 || p.theta >= 1.0
}

fn require_interferer(p: &SystemParams) -> Result<()> {
    if p.rho_i <= 0.0 {
        return Err(Error::DegenerateParams(
            "interference-scheme expressions need rho_i > 0".into(),
        ));
    }
    Ok(())
}

fn require_distinct_scales(p: &SystemParams) -> Result<()> {
    require_interferer(p)?;
    if p.s1() == p.si() {
        return Err(Error::DegenerateParams(
            "equal effective branch gains rho1/d1^tau == rho_i/d_i^tau make the \
             two-branch closed forms singular"
                .into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Signed log-space accumulation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct SignedLog {
    sign: f64,
    ln: f64,
}

fn signed_log_sum(terms: &[SignedLog]) -> f64 {
    let m = terms
        .iter()
        .filter(|t| t.ln.is_finite())
        .map(|t| t.ln)
        .fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return 0.0;
    }
    let acc: f64 = terms
        .iter()
        .map(|t| {
            if t.ln.is_finite() {
                t.sign * (t.ln - m).exp()
            } else {
                0.0
            }
        })
        .sum();
    if acc == 0.0 {
        return 0.0;
    }
    acc.signum() * (m + acc.abs().ln()).exp()
}

/// `ln K_n(x)`, falling back to leading asymptotics when the value itself
/// overflows (tiny argument, high order) or underflows (huge argument) f64.
fn ln_bessel_k(n: i32, x: f64) -> Result<f64> {
    let v = bessel_k_int(n, x)?;
    if v.is_finite() && v > 0.0 {
        return Ok(v.ln());
    }
    let n = n.unsigned_abs();
    if v == 0.0 {
        // Underflow: K_n(x) ~ sqrt(pi/(2x)) e^{-x} (1 + (4n^2-1)/(8x)).
        let mu = 4.0 * (n * n) as f64;
        return Ok(0.5 * (std::f64::consts::PI / (2.0 * x)).ln() - x
            + ((mu - 1.0) / (8.0 * x)).ln_1p());
    }
    // Overflow: K_n(x) ~ (n-1)!/2 (2/x)^n, K_0(x) ~ -ln(x/2) - gamma.
    if n == 0 {
        Ok((-(0.5 * x).ln() - EULER_GAMMA).ln())
    } else {
        Ok(-std::f64::consts::LN_2 + ln_factorial(n as usize - 1)
            + n as f64 * (std::f64::consts::LN_2 - x.ln()))
    }
}

// ---------------------------------------------------------------------------
// The harvested-power variable Z and its derived quantities
// ---------------------------------------------------------------------------

/// Partial-fraction weights of the two-branch expansion of `Z`:
/// `f_Z(x) = sum_s w1[s] x^{N-s} e^{-b1 x} + sum_s w2[s] x^{N-s} e^{-bi x}`.
struct ZWeights {
    w1: Vec<SignedLog>,
    w2: Vec<SignedLog>,
    b1: f64,
    bi: f64,
}

fn z_weights(p: &SystemParams) -> Result<ZWeights> {
    require_distinct_scales(p)?;
    let n = p.n_antennas;
    let b1 = 1.0 / p.s1();
    let bi = 1.0 / p.si();
    let delta = bi - b1;
    let ln_delta = delta.abs().ln();
    let ln_pref = n as f64 * (b1.ln() + bi.ln());
    let mut w1 = Vec::with_capacity(n);
    let mut w2 = Vec::with_capacity(n);
    for s in 1..=n {
        // prod_{j=1}^{s-1} (1 - N - j) = (-1)^{s-1} Gamma(N+s-1)/Gamma(N)
        let ln_mag = ln_pref + ln_gamma((n + s - 1) as f64)? - ln_gamma(n as f64)?
            - ln_factorial(n - s)
            - ln_factorial(s - 1)
            + (1 - (n + s) as i64) as f64 * ln_delta;
        let base_sign = if (s - 1) % 2 == 0 { 1.0 } else { -1.0 };
        // sign((bi-b1)^{1-N-s}) and sign((b1-bi)^{1-N-s})
        let parity = (n + s - 1) % 2 == 1; // exponent 1-N-s odd?
        let s1_sign = if delta > 0.0 || !parity { 1.0 } else { -1.0 };
        let s2_sign = if -delta > 0.0 || !parity { 1.0 } else { -1.0 };
        w1.push(SignedLog {
            sign: base_sign * s1_sign,
            ln: ln_mag,
        });
        w2.push(SignedLog {
            sign: base_sign * s2_sign,
            ln: ln_mag,
        });
    }
    Ok(ZWeights { w1, w2, b1, bi })
}

/// Density of `Z = rho1 |h1|^2 / d1^tau + rho_i |h_i|^2 / d_i^tau` at `x > 0`.
pub fn pdf_z(x: f64, p: &SystemParams) -> Result<f64> {
    p.validate()?;
    if !(x > 0.0) {
        return Err(Error::Domain {
            func: "pdf_z",
            detail: format!("x = {x}, requires x > 0"),
        });
    }
    let zw = z_weights(p)?;
    let n = p.n_antennas;
    let mut terms = Vec::with_capacity(2 * n);
    for (s, w) in zw.w1.iter().enumerate() {
        terms.push(SignedLog {
            sign: w.sign,
            ln: w.ln + (n - 1 - s) as f64 * x.ln() - zw.b1 * x,
        });
    }
    for (s, w) in zw.w2.iter().enumerate() {
        terms.push(SignedLog {
            sign: w.sign,
            ln: w.ln + (n - 1 - s) as f64 * x.ln() - zw.bi * x,
        });
    }
    Ok(signed_log_sum(&terms).max(0.0))
}

/// Complement factor of the shared second hop: `Prob(gamma_I2 > x)`,
/// the double Bessel-K sum over both branches of `Z`.
fn second_hop_factor(x: f64, p: &SystemParams) -> Result<f64> {
    let zw = z_weights(p)?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    let n = p.n_antennas;
    let w = p.d2_tau() * x / (p.eta * p.theta);
    let mut terms = Vec::with_capacity(2 * n * n);
    for (weights, b) in [(&zw.w1, zw.b1), (&zw.w2, zw.bi)] {
        let arg = 2.0 * (w * b).sqrt();
        let ln_wb = (w * b).ln();
        // K orders m+s-N-1 range over [-N, N-2].
        let ln_k: Vec<f64> = (0..=n)
            .map(|order| ln_bessel_k(order as i32, arg))
            .collect::<Result<_>>()?;
        for (s_idx, ws) in weights.iter().enumerate() {
            let s = s_idx + 1;
            for m in 0..n {
                let nu = m as i64 + s as i64 - n as i64 - 1;
                let ln_term = ws.ln + std::f64::consts::LN_2 - ln_factorial(m)
                    + (n + 1 - s) as f64 * w.ln()
                    + 0.5 * nu as f64 * ln_wb
                    + ln_k[nu.unsigned_abs() as usize];
                terms.push(SignedLog {
                    sign: ws.sign,
                    ln: ln_term,
                });
            }
        }
    }
    Ok(signed_log_sum(&terms).clamp(0.0, 1.0))
}

/// CDF of the shared second-hop SNR `gamma_I2` at `x >= 0`.
pub fn cdf_gamma_i2(x: f64, p: &SystemParams) -> Result<f64> {
    p.validate()?;
    if x < 0.0 {
        return Err(Error::Domain {
            func: "cdf_gamma_i2",
            detail: format!("x = {x}, requires x >= 0"),
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if theta_degenerate(p) {
        // gamma_I2 is identically zero without a harvesting or forwarding phase.
        return Ok(1.0);
    }
    Ok((1.0 - second_hop_factor(x, p)?).clamp(0.0, 1.0))
}

/// Average of `Z` (used by tests; the mean of a sum of two Erlangs).
pub fn mean_z(p: &SystemParams) -> f64 {
    p.n_antennas as f64 * (p.s1() + p.si())
}

// ---------------------------------------------------------------------------
// First-hop cdfs
// ---------------------------------------------------------------------------

/// MRC first-hop complement `Prob(gamma_I1 > x)`.
fn mrc_first_hop_factor(x: f64, p: &SystemParams) -> f64 {
    let kappa_x = kappa1(p) * x;
    let lambda = lambda_i(p);
    let inv_s = 1.0 / (kappa_x + lambda);
    let mut total = 0.0;
    let mut pow_kx = 1.0; // kappa_x^m
    for m in 0..p.n_antennas {
        if m > 0 {
            pow_kx *= kappa_x;
        }
        let mut inner = 0.0;
        let mut pow_inv = inv_s; // inv_s^{n+1}
        for nn in 0..=m {
            inner += pow_inv / factorial(m - nn);
            pow_inv *= inv_s;
        }
        total += pow_kx * inner;
    }
    lambda * (-kappa_x).exp() * total
}

/// MMSE first-hop complement `Prob(gamma_I1 > x)`.
fn mmse_first_hop_factor(x: f64, p: &SystemParams) -> Result<f64> {
    let n = p.n_antennas;
    let kappa_x = kappa1(p) * x;
    let mu = (1.0 - p.theta) * p.si();
    let q = 1.0 - gamma_cdf(n, kappa_x);
    let hyp = gauss_2f1(2.0, 1.0, 2.0, -p.si() / p.s1() * x)?;
    let corr = (-kappa_x + n as f64 * kappa_x.ln() - ln_gamma(n as f64)?).exp() * mu * hyp;
    Ok((q - corr).clamp(0.0, 1.0))
}

/// CDF of the first-hop SINR under the given scheme.
pub fn cdf_gamma_i1(scheme: Scheme, x: f64, p: &SystemParams) -> Result<f64> {
    p.validate()?;
    if x < 0.0 {
        return Err(Error::Domain {
            func: "cdf_gamma_i1",
            detail: format!("x = {x}, requires x >= 0"),
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if p.theta >= 1.0 {
        return Ok(1.0); // no information branch
    }
    match scheme {
        Scheme::NoiseLimited => Ok(gamma_cdf(p.n_antennas, kappa1(p) * x)),
        Scheme::MrcMrt => {
            require_interferer(p)?;
            Ok((1.0 - mrc_first_hop_factor(x, p)).clamp(0.0, 1.0))
        }
        Scheme::ZfMrt => {
            if p.n_antennas < 2 {
                return Err(Error::SchemeUnsupported(
                    "zf-mrt needs more antennas than interferers (N > 1)".into(),
                ));
            }
            Ok(gamma_cdf(p.n_antennas - 1, kappa1(p) * x))
        }
        Scheme::MmseMrt => {
            require_interferer(p)?;
            Ok((1.0 - mmse_first_hop_factor(x, p)?).clamp(0.0, 1.0))
        }
    }
}

// ---------------------------------------------------------------------------
// Exact outage (noise-limited)
// ---------------------------------------------------------------------------

/// Integrand coefficients of the exact outage integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl OutageCoeffs {
    pub fn from_params(p: &SystemParams) -> Self {
        let s1 = p.s1();
        let omth = 1.0 - p.theta;
        OutageCoeffs {
            a: omth * s1 * p.gamma_th,
            b: p.gamma_th,
            c: p.eta * p.theta * omth * s1 * s1 / p.d2_tau(),
            d: p.eta * p.theta * s1 * p.gamma_th / p.d2_tau(),
        }
    }
}

/// Exact outage probability of the noise-limited system, by adaptive
/// quadrature of the single-integral expression.
///
/// Evaluated in the algebraically equivalent all-positive form
/// `P(X < d/c) + int_{d/c}^inf F(..) f_X(x) dx` so that deep-tail outages
/// (well below the quadrature tolerance of the complement form) keep full
/// relative accuracy.
pub fn outage_exact_nl(p: &SystemParams, spec: &QuadratureSpec) -> Result<f64> {
    p.validate()?;
    if theta_degenerate(p) {
        return Ok(1.0);
    }
    let n = p.n_antennas;
    let co = OutageCoeffs::from_params(p);
    let ln_gamma_n = ln_gamma(n as f64)?;
    let lower = co.d / co.c;
    let integrand = move |x: f64| {
        let denom = co.c * x * x - co.d * x;
        if denom <= 0.0 {
            return 0.0;
        }
        let f = gamma_cdf(n, (co.a * x + co.b) / denom);
        if f == 0.0 {
            return 0.0;
        }
        f * ((n - 1) as f64 * x.ln() - x - ln_gamma_n).exp()
    };
    // The head term is a strict lower bound on the result; tie the absolute
    // floor to it so deep-tail outages stay relatively accurate.
    let head = gamma_cdf(n, lower);
    let eff = QuadratureSpec {
        abs_tol: spec.abs_tol.min(1e-3 * head.max(1e-250)),
        ..*spec
    };
    let integral = quad::semi_infinite(integrand, lower, &eff)?;
    Ok((head + integral.value).clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// Outage lower bounds
// ---------------------------------------------------------------------------

/// The two complement factors whose product forms an outage lower bound
/// `1 - f1 f2`. The noise-limited bound is a single closed sum; it is
/// reported as `f1` with `f2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageBoundFactors {
    pub f1: f64,
    pub f2: f64,
}

impl OutageBoundFactors {
    pub fn bound(&self) -> f64 {
        (1.0 - self.f1 * self.f2).clamp(0.0, 1.0)
    }
}

/// Closed-form survival sum of the noise-limited bound: the double
/// Bessel-K expansion of the min-of-hops outage complement.
fn nl_bound_factor(p: &SystemParams) -> Result<f64> {
    let n = p.n_antennas;
    let co = OutageCoeffs::from_params(p);
    let d_over_c = co.d / co.c;
    let a_over_c = co.a / co.c;
    let arg = 2.0 * a_over_c.sqrt();
    let mut terms = Vec::with_capacity(n * n);
    let pref = std::f64::consts::LN_2 - d_over_c - ln_gamma(n as f64)?;
    for i in 0..n {
        for j in 0..n {
            let order = i as i32 - j as i32 - 1;
            let ln_term = pref - ln_factorial(i) + binomial(n - 1, j).ln()
                + (n - 1 - j) as f64 * d_over_c.ln()
                + 0.5 * (i + j + 1) as f64 * a_over_c.ln()
                + ln_bessel_k(order, arg)?;
            terms.push(SignedLog {
                sign: 1.0,
                ln: ln_term,
            });
        }
    }
    Ok(signed_log_sum(&terms).clamp(0.0, 1.0))
}

/// Outage lower bound for the given scheme, with its factor decomposition.
pub fn outage_lower_bound(scheme: Scheme, p: &SystemParams) -> Result<(OutageBoundFactors, f64)> {
    p.validate()?;
    if theta_degenerate(p) {
        let f = OutageBoundFactors { f1: 0.0, f2: 1.0 };
        return Ok((f, 1.0));
    }
    let factors = match scheme {
        Scheme::NoiseLimited => OutageBoundFactors {
            f1: nl_bound_factor(p)?,
            f2: 1.0,
        },
        Scheme::MrcMrt => {
            require_distinct_scales(p)?;
            OutageBoundFactors {
                f1: mrc_first_hop_factor(p.gamma_th, p),
                f2: second_hop_factor(p.gamma_th, p)?,
            }
        }
        Scheme::ZfMrt => {
            if p.n_antennas < 2 {
                return Err(Error::SchemeUnsupported(
                    "zf-mrt needs more antennas than interferers (N > 1)".into(),
                ));
            }
            require_distinct_scales(p)?;
            OutageBoundFactors {
                f1: 1.0 - gamma_cdf(p.n_antennas - 1, kappa1(p) * p.gamma_th),
                f2: second_hop_factor(p.gamma_th, p)?,
            }
        }
        Scheme::MmseMrt => {
            require_distinct_scales(p)?;
            OutageBoundFactors {
                f1: mmse_first_hop_factor(p.gamma_th, p)?,
                f2: second_hop_factor(p.gamma_th, p)?,
            }
        }
    };
    let bound = factors.bound();
    Ok((factors, bound))
}

// ---------------------------------------------------------------------------
// High-SNR approximations
// ---------------------------------------------------------------------------

/// `sum_i binom(N-1, i) (-1)^{N-i-1} 2F1(N, 2N-i-1; 2N-i; 1 - q) / (2N-i-1)`,
/// the common interference-averaged second-hop factor of the high-SNR forms,
/// with `q = si/s1`.
pub(crate) fn interference_gain_sum(n: usize, q: f64) -> Result<f64> {
    let w = 1.0 - q;
    let mut total = 0.0;
    for i in 0..n {
        let sign = if (n - i - 1) % 2 == 0 { 1.0 } else { -1.0 };
        let b = (2 * n - i - 1) as f64;
        let c = (2 * n - i) as f64;
        total += sign * binomial(n - 1, i) * gauss_2f1(n as f64, b, c, w)? / b;
    }
    Ok(total)
}

fn hsnr_second_term(p: &SystemParams) -> Result<f64> {
    let n = p.n_antennas;
    let s = interference_gain_sum(n, p.si() / p.s1())?;
    let scale = (p.d2_tau() / (p.eta * p.theta)).powi(n as i32);
    Ok(scale * s / (factorial(n) * factorial(n - 1)))
}

/// MRC/MRT high-SNR approximation for any N (first-hop expansion plus the
/// interference-averaged second hop).
fn outage_high_snr_mrc_general(p: &SystemParams) -> Result<f64> {
    let n = p.n_antennas;
    let mu = (1.0 - p.theta) * p.si();
    let mut first = 0.0;
    let mut pow_mu = 1.0;
    for k in 0..=n {
        first += pow_mu / factorial(n - k);
        pow_mu *= mu;
    }
    first /= (1.0 - p.theta).powi(n as i32);
    let lead = (p.gamma_th / p.s1()).powi(n as i32);
    Ok(lead * (first + hsnr_second_term(p)?))
}

/// The single-antenna MRC/MRT closed form (the log-ratio simplification of
/// the general expression as `rho1` grows).
fn outage_high_snr_mrc_n1(p: &SystemParams) -> f64 {
    let bracket = 1.0 / (1.0 - p.theta)
        + p.si()
        + p.d2_tau() * (p.s1().ln() - p.si().ln()) / (p.eta * p.theta);
    bracket * p.gamma_th / p.s1()
}

/// Two-term ZF/MRT high-SNR form (dominant diversity-(N-1) term plus the
/// order-N second-hop correction).
pub fn outage_high_snr_zf_two_term(p: &SystemParams) -> Result<f64> {
    p.validate()?;
    if theta_degenerate(p) {
        return Ok(1.0);
    }
    if p.n_antennas < 2 {
        return Err(Error::SchemeUnsupported(
            "zf-mrt needs more antennas than interferers (N > 1)".into(),
        ));
    }
    require_interferer(p)?;
    let n = p.n_antennas;
    let one = (kappa1(p) * p.gamma_th).powi(n as i32 - 1) / factorial(n - 1);
    let two = (p.gamma_th / p.s1()).powi(n as i32) * hsnr_second_term(p)?;
    Ok(one + two)
}

/// High-SNR outage approximation for the given scheme.
pub fn outage_high_snr(scheme: Scheme, p: &SystemParams) -> Result<f64> {
    p.validate()?;
    if theta_degenerate(p) {
        return Ok(1.0);
    }
    match scheme {
        Scheme::NoiseLimited => {
            let n = p.n_antennas;
            let lead = (p.gamma_th / p.s1()).powi(n as i32) / factorial(n);
            let log_term = ((1.0 - p.theta) * p.s1() / p.gamma_th).ln() - EULER_GAMMA;
            let bracket = (1.0 - p.theta).powi(-(n as i32))
                + log_term * (p.d2_tau() / (p.eta * p.theta)).powi(n as i32) / factorial(n - 1);
            Ok(lead * bracket)
        }
        Scheme::MrcMrt => {
            require_interferer(p)?;
            if p.n_antennas == 1 {
                Ok(outage_high_snr_mrc_n1(p))
            } else {
                outage_high_snr_mrc_general(p)
            }
        }
        Scheme::ZfMrt => {
            if p.n_antennas < 2 {
                return Err(Error::SchemeUnsupported(
                    "zf-mrt needs more antennas than interferers (N > 1)".into(),
                ));
            }
            require_interferer(p)?;
            Ok((kappa1(p) * p.gamma_th).powi(p.n_antennas as i32 - 1)
                / factorial(p.n_antennas - 1))
        }
        Scheme::MmseMrt => {
            require_interferer(p)?;
            let n = p.n_antennas;
            let mu = (1.0 - p.theta) * p.si();
            let first = (1.0 / factorial(n) + mu / factorial(n - 1))
                / (1.0 - p.theta).powi(n as i32);
            Ok((p.gamma_th / p.s1()).powi(n as i32) * (first + hsnr_second_term(p)?))
        }
    }
}

/// Noise-limited high-SNR form before the small-argument log expansion:
/// incomplete-gamma survival plus the exponential-integral keyhole term.
pub fn outage_high_snr_nl_ei_form(p: &SystemParams) -> Result<f64> {
    p.validate()?;
    if theta_degenerate(p) {
        return Ok(1.0);
    }
    let n = p.n_antennas;
    let w = kappa1(p) * p.gamma_th;
    let keyhole = (p.gamma_th * p.d2_tau() / (p.eta * p.theta * p.s1())).powi(n as i32);
    Ok(gamma_cdf(n, w)
        - exp_integral_ei(-w)? * keyhole / (factorial(n) * factorial(n - 1)))
}

/// First-term (array-gain) coefficients of the three high-SNR expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGains {
    pub mrc: f64,
    pub zf: f64,
    pub mmse: f64,
}

/// Array-gain comparison terms of the three schemes. MMSE keeps only the
/// first two terms of the MRC series, hence is strictly smaller whenever
/// the interferer is active.
pub fn array_gain_terms(p: &SystemParams) -> Result<ArrayGains> {
    p.validate()?;
    let n = p.n_antennas;
    let mu = (1.0 - p.theta) * p.si();
    let mut mrc = 0.0;
    let mut pow_mu = 1.0;
    for k in 0..=n {
        mrc += pow_mu / factorial(n - k);
        pow_mu *= mu;
    }
    Ok(ArrayGains {
        mrc,
        zf: 1.0 / factorial(n - 1),
        mmse: 1.0 / factorial(n) + mu / factorial(n - 1),
    })
}

/// Sign of the single-antenna MRC/MRT interference penalty at high SNR: the
/// difference between the interfered and interference-free high-SNR outage
/// brackets. Positive means the interferer hurts, negative that its
/// harvested energy wins.
pub fn mrc_n1_cci_penalty(p: &SystemParams) -> Result<f64> {
    p.validate()?;
    require_interferer(p)?;
    if theta_degenerate(p) {
        return Err(Error::DegenerateParams("theta in (0,1) required".into()));
    }
    let with_cci = 1.0 / (1.0 - p.theta)
        + p.si()
        + p.d2_tau() * (p.s1().ln() - p.si().ln()) / (p.eta * p.theta);
    let log_term = ((1.0 - p.theta) * p.s1() / p.gamma_th).ln() - EULER_GAMMA;
    let without = 1.0 / (1.0 - p.theta)
        + log_term * p.d2_tau() / (p.eta * p.theta);
    Ok(with_cci - without)
}

// ---------------------------------------------------------------------------
// Ergodic-capacity upper bounds
// ---------------------------------------------------------------------------

/// `e^x Gamma(a, x)` without overflow: the shifted integral
/// `int_0^inf (x+u)^{a-1} e^{-u} du` once `e^x` would saturate.
fn exp_scaled_upper_gamma(a: f64, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    if x <= 30.0 {
        Ok(x.exp() * upper_inc_gamma(a, x)?)
    } else {
        Ok(quad::semi_infinite(|u| (x + u).powf(a - 1.0) * (-u).exp(), 0.0, spec)?.value)
    }
}

/// Half-rate capacity of a gamma-distributed SNR with integer shape `n_sum`
/// terms and scale argument `kappa`:
/// `(1/(2 ln 2)) sum_{k=0}^{n_sum-1} kappa^k e^kappa Gamma(-k, kappa)`.
fn simo_capacity_sum(n_sum: usize, kappa: f64, spec: &QuadratureSpec) -> Result<f64> {
    let mut total = 0.0;
    let mut pow_k = 1.0;
    for k in 0..n_sum {
        total += pow_k * exp_scaled_upper_gamma(-(k as f64), kappa, spec)?;
        pow_k *= kappa;
    }
    Ok(total / (2.0 * std::f64::consts::LN_2))
}

/// Half-rate capacity of the product channel: `0.5 E[log2(1 + scale W)]`
/// where `W` is the product of two unit-scale Erlang(N) variables, through
/// its Bessel-kernel density.
fn keyhole_capacity(n: usize, scale: f64, spec: &QuadratureSpec) -> Result<f64> {
    let ln_norm = 2.0 * ln_gamma(n as f64)?;
    let integrand = move |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let k0 = bessel_k_int(0, 2.0 * u).unwrap_or(0.0);
        ((2 * n - 1) as f64 * u.ln() - ln_norm).exp() * (1.0 + scale * u * u).ln() * k0
    };
    let integral = quad::adaptive(integrand, 0.0, 45.0, spec)?;
    Ok(4.0 * integral.value / (2.0 * std::f64::consts::LN_2))
}

/// MRC first-hop capacity: the nested sum of smooth exponential-kernel
/// integrals obtained from its survival function.
fn mrc_first_hop_capacity(p: &SystemParams, spec: &QuadratureSpec) -> Result<f64> {
    let n = p.n_antennas;
    let kappa = kappa1(p);
    let mu = (1.0 - p.theta) * p.si();
    let beta = p.si() / p.s1();
    let mut total = 0.0;
    let mut pow_kappa = 1.0;
    for m in 0..n {
        if m > 0 {
            pow_kappa *= kappa;
        }
        let mut pow_mu = 1.0;
        for nn in 0..=m {
            let i2 = quad::semi_infinite(
                move |x| {
                    (-kappa * x + m as f64 * x.ln()).exp()
                        / (1.0 + x)
                        / (1.0 + beta * x).powi(nn as i32 + 1)
                },
                0.0,
                spec,
            )?
            .value;
            total += pow_kappa * pow_mu / factorial(m - nn) * i2;
            pow_mu *= mu;
        }
    }
    Ok(total / (2.0 * std::f64::consts::LN_2))
}

/// `E[ln gamma_I1]` for MRC: digamma and log terms, one shifted-log
/// integral for the incomplete-gamma derivative, and the Tricomi-U sum.
fn mrc_e_ln_gamma_i1(p: &SystemParams, spec: &QuadratureSpec) -> Result<f64> {
    let n = p.n_antennas;
    let lambda = lambda_i(p);
    // e^lambda * dGamma(a, lambda)/da at a = 1, computed shifted:
    // int_0^inf ln(lambda + u) e^{-u} du.
    let shifted = quad::semi_infinite(|u| (lambda + u).ln() * (-u).exp(), 0.0, spec)?.value;
    let g_term = shifted - lambda.ln();
    let mut u_sum = 0.0;
    for m in 1..n {
        for nn in 0..=m {
            u_sum += lambda.powi((m - nn) as i32) / factorial(m - nn)
                * factorial(m - 1)
                * kummer_u(m as f64, (m - nn) as f64, lambda)?;
        }
    }
    Ok(((1.0 - p.theta) * p.s1()).ln() - EULER_GAMMA - g_term + u_sum)
}

/// Shared second-hop capacity of the interference schemes, via the
/// Bessel-kernel integrals over both branches of `Z`.
fn cci_second_hop_capacity(p: &SystemParams, spec: &QuadratureSpec) -> Result<f64> {
    let zw = z_weights(p)?;
    let n = p.n_antennas;
    let d2_etap = p.d2_tau() / (p.eta * p.theta);
    let mut terms = Vec::with_capacity(2 * n * n);
    for (weights, b) in [(&zw.w1, zw.b1), (&zw.w2, zw.bi)] {
        let phi = d2_etap * b;
        for (s_idx, ws) in weights.iter().enumerate() {
            let s = s_idx + 1;
            for m in 0..n {
                let nu = (m + s) as i32 - n as i32 - 1;
                // int_0^inf x^{N+1-s}/(1+x) (phi x)^{nu/2} K_nu(2 sqrt(phi x)) dx
                // with x = u^2/phi.
                let expo = (2 * (n + 1 - s)) as f64 + nu as f64 + 1.0;
                let integral = quad::adaptive(
                    move |u| {
                        if u <= 0.0 {
                            return 0.0;
                        }
                        let k = bessel_k_int(nu, 2.0 * u).unwrap_or(0.0);
                        u.powf(expo) * k / (1.0 + u * u / phi)
                    },
                    0.0,
                    45.0,
                    spec,
                )?
                .value;
                if integral <= 0.0 {
                    continue;
                }
                let ln_term = ws.ln + std::f64::consts::LN_2
                    - (n as f64 + 2.0 - s as f64) * phi.ln()
                    + (n + 1 - s) as f64 * d2_etap.ln()
                    - ln_factorial(m)
                    + integral.ln();
                terms.push(SignedLog {
                    sign: ws.sign,
                    ln: ln_term,
                });
            }
        }
    }
    Ok(signed_log_sum(&terms) / std::f64::consts::LN_2)
}

/// `E[ln Z]` over the two-branch expansion.
fn e_ln_z(p: &SystemParams) -> Result<f64> {
    let zw = z_weights(p)?;
    let n = p.n_antennas;
    let mut terms = Vec::with_capacity(2 * n);
    for (weights, b) in [(&zw.w1, zw.b1), (&zw.w2, zw.bi)] {
        for (s_idx, ws) in weights.iter().enumerate() {
            let s = s_idx + 1;
            let moment = factorial(n - s) * b.powi(s as i32 - n as i32 - 1)
                * (digamma((n - s + 1) as f64)? - b.ln());
            if moment == 0.0 {
                continue;
            }
            terms.push(SignedLog {
                sign: ws.sign * moment.signum(),
                ln: ws.ln + moment.abs().ln(),
            });
        }
    }
    Ok(signed_log_sum(&terms))
}

fn cci_e_ln_gamma_i2(p: &SystemParams) -> Result<f64> {
    Ok((p.eta * p.theta / p.d2_tau()).ln() + digamma(p.n_antennas as f64)? + e_ln_z(p)?)
}

/// MMSE first-hop capacity by quadrature over its survival function.
fn mmse_first_hop_capacity(p: &SystemParams, spec: &QuadratureSpec) -> Result<f64> {
    let integral = quad::semi_infinite(
        |x| {
            if x <= 0.0 {
                return 0.0;
            }
            mmse_first_hop_factor(x, p).unwrap_or(0.0) / (1.0 + x)
        },
        0.0,
        spec,
    )?;
    Ok(integral.value / (2.0 * std::f64::consts::LN_2))
}

/// `E[ln gamma_I1]` for MMSE by parts over its cdf.
fn mmse_e_ln_gamma_i1(p: &SystemParams, spec: &QuadratureSpec) -> Result<f64> {
    let upper = quad::semi_infinite(
        |x| {
            if x <= 0.0 {
                return 0.0;
            }
            mmse_first_hop_factor(x, p).unwrap_or(0.0) / x
        },
        1.0,
        spec,
    )?
    .value;
    let lower = quad::adaptive(
        |x| {
            if x <= 0.0 {
                return 0.0;
            }
            (1.0 - mmse_first_hop_factor(x, p).unwrap_or(1.0)) / x
        },
        0.0,
        1.0,
        spec,
    )?
    .value;
    Ok(upper - lower)
}

/// The four ingredients of a capacity upper bound: the per-hop half-rate
/// capacities and the per-hop log-SINR means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityParts {
    /// `0.5 E[log2(1 + gamma_1)]`
    pub hop1_capacity: f64,
    /// `0.5 E[log2(1 + gamma_2)]`
    pub hop2_capacity: f64,
    /// `E[ln gamma_1]`
    pub hop1_log_mean: f64,
    /// `E[ln gamma_2]`
    pub hop2_log_mean: f64,
}

impl CapacityParts {
    /// Combine into the bound: `C1 + C2 - 0.5 log2(1 + e^{E ln g1} + e^{E ln g2})`.
    pub fn bound(&self) -> f64 {
        (self.hop1_capacity + self.hop2_capacity
            - 0.5 * (1.0 + self.hop1_log_mean.exp() + self.hop2_log_mean.exp()).log2())
        .max(0.0)
    }
}

/// Per-hop capacity terms and log-moments for the given scheme. Each one is
/// exact for its hop (the bounding happens only in the combination).
pub fn capacity_components(
    scheme: Scheme,
    p: &SystemParams,
    spec: &QuadratureSpec,
) -> Result<CapacityParts> {
    p.validate()?;
    if theta_degenerate(p) {
        return Err(Error::DegenerateParams(
            "capacity components need theta strictly inside (0, 1)".into(),
        ));
    }
    let n = p.n_antennas;
    match scheme {
        Scheme::NoiseLimited => {
            let psi_n = digamma(n as f64)?;
            Ok(CapacityParts {
                hop1_capacity: simo_capacity_sum(n, kappa1(p), spec)?,
                hop2_capacity: keyhole_capacity(n, p.eta * p.theta * p.s1() / p.d2_tau(), spec)?,
                hop1_log_mean: ((1.0 - p.theta) * p.s1()).ln() + psi_n,
                hop2_log_mean: (p.eta * p.theta * p.s1() / p.d2_tau()).ln() + 2.0 * psi_n,
            })
        }
        Scheme::MrcMrt => {
            require_distinct_scales(p)?;
            Ok(CapacityParts {
                hop1_capacity: mrc_first_hop_capacity(p, spec)?,
                hop2_capacity: cci_second_hop_capacity(p, spec)?,
                hop1_log_mean: mrc_e_ln_gamma_i1(p, spec)?,
                hop2_log_mean: cci_e_ln_gamma_i2(p)?,
            })
        }
        Scheme::ZfMrt => {
            if n < 2 {
                return Err(Error::SchemeUnsupported(
                    "zf-mrt needs more antennas than interferers (N > 1)".into(),
                ));
            }
            require_distinct_scales(p)?;
            Ok(CapacityParts {
                hop1_capacity: simo_capacity_sum(n - 1, kappa1(p), spec)?,
                hop2_capacity: cci_second_hop_capacity(p, spec)?,
                hop1_log_mean: ((1.0 - p.theta) * p.s1()).ln() + digamma((n - 1) as f64)?,
                hop2_log_mean: cci_e_ln_gamma_i2(p)?,
            })
        }
        Scheme::MmseMrt => {
            require_distinct_scales(p)?;
            Ok(CapacityParts {
                hop1_capacity: mmse_first_hop_capacity(p, spec)?,
                hop2_capacity: cci_second_hop_capacity(p, spec)?,
                hop1_log_mean: mmse_e_ln_gamma_i1(p, spec)?,
                hop2_log_mean: cci_e_ln_gamma_i2(p)?,
            })
        }
    }
}

/// Upper bound on the ergodic capacity (bits per channel use) for the given
/// scheme: the two per-hop capacities minus the convexity correction built
/// from the per-hop log-moments.
pub fn capacity_upper_bound(scheme: Scheme, p: &SystemParams, spec: &QuadratureSpec) -> Result<f64> {
    p.validate()?;
    if theta_degenerate(p) {
        return Ok(0.0);
    }
    Ok(capacity_components(scheme, p, spec)?.bound())
}

#[cfg(test)]
mod tests;
