//! System parameterization and reproducible Rayleigh channel generation.
//!
//! All quantities are linear and noise-normalized: `rho1` and `rho_i` are
//! transmit SNRs relative to unit noise power, distances are dimensionless,
//! and harvested energies are expressed as average powers over the relaying
//! half-block. dB conversion belongs to the CLI, not here.

use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Full parameter tuple of one system configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Number of relay antennas, N >= 1.
    pub n_antennas: usize,
    /// RF-to-DC conversion efficiency, in (0, 1].
    pub eta: f64,
    /// Power-splitting ratio: fraction of received power routed to the
    /// energy harvester, in [0, 1].
    pub theta: f64,
    /// Source transmit SNR (linear).
    pub rho1: f64,
    /// Interferer transmit SNR (linear, 0 disables the interferer).
    pub rho_i: f64,
    /// Source-relay distance.
    pub d1: f64,
    /// Relay-destination distance.
    pub d2: f64,
    /// Interferer-relay distance.
    pub d_i: f64,
    /// Path-loss exponent.
    pub tau: f64,
    /// Outage SINR threshold (linear).
    pub gamma_th: f64,
}

impl SystemParams {
    /// Baseline configuration used throughout the experiments:
    /// `gamma_th` = 0 dB, `eta` = 0.8, `theta` = 0.5, `rho_i` = 9.5 dB,
    /// `tau` = 2, unit distances. `rho1` is supplied by the caller.
    pub fn baseline(n_antennas: usize, rho1: f64) -> Self {
        SystemParams {
            n_antennas,
            eta: 0.8,
            theta: 0.5,
            rho1,
            rho_i: 10f64.powf(0.95),
            d1: 1.0,
            d2: 1.0,
            d_i: 1.0,
            tau: 2.0,
            gamma_th: 1.0,
        }
    }

    /// Range-check every field.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.n_antennas < 1 {
            return bad(format!("n_antennas = {} (requires >= 1)", self.n_antennas));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad(format!("eta = {} (requires 0 < eta <= 1)", self.eta));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return bad(format!("theta = {} (requires 0 <= theta <= 1)", self.theta));
        }
        if !(self.rho1 > 0.0 && self.rho1.is_finite()) {
            return bad(format!("rho1 = {} (requires > 0)", self.rho1));
        }
        if !(self.rho_i >= 0.0 && self.rho_i.is_finite()) {
            return bad(format!("rho_i = {} (requires >= 0)", self.rho_i));
        }
        for (name, d) in [("d1", self.d1), ("d2", self.d2), ("d_i", self.d_i)] {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("{name} = {d} (requires > 0)"));
            }
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return bad(format!("tau = {} (requires >= 0)", self.tau));
        }
        if !(self.gamma_th > 0.0 && self.gamma_th.is_finite()) {
            return bad(format!("gamma_th = {} (requires > 0)", self.gamma_th));
        }
        Ok(())
    }

    /// Source-relay path gain `rho1 / d1^tau`.
    pub fn s1(&self) -> f64 {
        self.rho1 / self.d1.powf(self.tau)
    }

    /// Interferer-relay path gain `rho_i / d_i^tau`.
    pub fn si(&self) -> f64 {
        self.rho_i / self.d_i.powf(self.tau)
    }

    pub fn d1_tau(&self) -> f64 {
        self.d1.powf(self.tau)
    }

    pub fn d2_tau(&self) -> f64 {
        self.d2.powf(self.tau)
    }

    pub fn d_i_tau(&self) -> f64 {
        self.d_i.powf(self.tau)
    }
}

/// One joint realization of the three channel vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    /// Source to relay, length N.
    pub h1: Vec<Complex64>,
    /// Relay to destination, length N (stored as a column).
    pub h2: Vec<Complex64>,
    /// Interferer to relay, length N.
    pub h_i: Vec<Complex64>,
}

impl ChannelDraw {
    pub fn n(&self) -> usize {
        self.h1.len()
    }
}

/// Seed plus substream index; identical pairs reproduce identical sequences
/// regardless of how work is distributed over threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// Instantiate the generator for this substream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// One circularly-symmetric complex Gaussian with unit variance
/// (1/2 per real component).
#[inline]
fn cn01(rng: &mut ChaCha12Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draw the three i.i.d. CN(0,1) channel vectors for one block.
///
/// Consumption order is fixed (h1, then h2, then h_i, real before imaginary
/// per entry) so that any consumer of the same stream sees the same draw.
pub fn draw_channels(params: &SystemParams, rng: &mut ChaCha12Rng) -> ChannelDraw {
    let n = params.n_antennas;
    let mut draw = ChannelDraw {
        h1: Vec::with_capacity(n),
        h2: Vec::with_capacity(n),
        h_i: Vec::with_capacity(n),
    };
    for _ in 0..n {
        draw.h1.push(cn01(rng));
    }
    for _ in 0..n {
        draw.h2.push(cn01(rng));
    }
    for _ in 0..n {
        draw.h_i.push(cn01(rng));
    }
    draw
}

/// Erlang CDF: probability that the squared Frobenius norm of an n-vector of
/// CN(0,1) entries falls below `x`, i.e. `1 - Gamma(n, x)/Gamma(n)`.
///
/// Accumulated through the Poisson-weight recursion, whose terms never
/// exceed one.
pub fn gamma_cdf(n: usize, x: f64) -> f64 {
    assert!(n >= 1, "gamma_cdf requires shape n >= 1");
    assert!(x >= 0.0, "gamma_cdf requires x >= 0");
    let mut term = (-x).exp();
    let mut tail = term;
    for k in 1..n {
        term *= x / k as f64;
        tail += term;
    }
    (1.0 - tail).clamp(0.0, 1.0)
}
