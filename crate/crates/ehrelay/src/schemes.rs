//! Per-draw harvested relay power and end-to-end SINR for the noise-limited
//! system and the three interference-processing schemes.
//!
//! Every end-to-end SINR has the two-hop form `g1 g2 / (g1 + g2 + 1)`. All
//! four schemes depend on a channel draw only through four real statistics
//! (the three squared norms and `|h1' h_i|^2`), which is what the Monte
//! Carlo engine exploits; the closed per-draw formulas are used instead of
//! assembling the relay matrix. The matrix/power-factor assembly in
//! [`relay_weights`] exists as a validation path for the power-constraint
//! identity and is not on any runtime path.

use crate::model::{ChannelDraw, SystemParams};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::str::FromStr;

/// Relay processing scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// No interferer; MRC combining and MRT forwarding.
    NoiseLimited,
    /// Maximum ratio combining / maximum ratio transmission.
    MrcMrt,
    /// Zero-forcing combining (interferer nulled) / MRT. Requires N > 1.
    ZfMrt,
    /// MMSE combining (max first-hop SINR) / MRT.
    MmseMrt,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::NoiseLimited,
        Scheme::MrcMrt,
        Scheme::ZfMrt,
        Scheme::MmseMrt,
    ];

    /// Whether the scheme models the co-channel interferer.
    pub fn uses_cci(&self) -> bool {
        !matches!(self, Scheme::NoiseLimited)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::NoiseLimited => "nl",
            Scheme::MrcMrt => "mrc",
            Scheme::ZfMrt => "zf",
            Scheme::MmseMrt => "mmse",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nl" | "noise-limited" | "noiselimited" => Ok(Scheme::NoiseLimited),
            "mrc" | "mrc-mrt" | "mrcmrt" => Ok(Scheme::MrcMrt),
            "zf" | "zf-mrt" | "zfmrt" => Ok(Scheme::ZfMrt),
            "mmse" | "mmse-mrt" | "mmsemrt" => Ok(Scheme::MmseMrt),
            other => Err(Error::InvalidParams(format!(
                "unknown scheme '{other}' (expected nl, mrc, zf or mmse)"
            ))),
        }
    }
}

/// First-hop SINR, second-hop SNR and their end-to-end combination for one
/// draw under one scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrDecomposition {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma_e2e: f64,
}

/// Two-hop AF combination `g1 g2 / (g1 + g2 + 1)`.
#[inline]
pub fn combine(g1: f64, g2: f64) -> f64 {
    if g1 == 0.0 || g2 == 0.0 {
        return 0.0;
    }
    g1 * g2 / (g1 + g2 + 1.0)
}

impl SinrDecomposition {
    fn new(gamma1: f64, gamma2: f64) -> Self {
        SinrDecomposition {
            gamma1,
            gamma2,
            gamma_e2e: combine(gamma1, gamma2),
        }
    }
}

/// The four real statistics of a draw that every scheme consumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawStats {
    /// |h1|_F^2
    pub norm1_sq: f64,
    /// |h2|_F^2
    pub norm2_sq: f64,
    /// |h_i|_F^2
    pub norm_i_sq: f64,
    /// |h1' h_i|^2
    pub cross_sq: f64,
}

impl DrawStats {
    pub fn from_draw(draw: &ChannelDraw) -> Self {
        let norm1_sq = draw.h1.iter().map(|z| z.norm_sqr()).sum();
        let norm2_sq = draw.h2.iter().map(|z| z.norm_sqr()).sum();
        let norm_i_sq = draw.h_i.iter().map(|z| z.norm_sqr()).sum();
        let dot: Complex64 = draw
            .h1
            .iter()
            .zip(&draw.h_i)
            .map(|(a, b)| a.conj() * b)
            .sum();
        DrawStats {
            norm1_sq,
            norm2_sq,
            norm_i_sq,
            cross_sq: dot.norm_sqr(),
        }
    }
}

/// Sample the statistics directly from the stream, consuming normals in the
/// same order as [`crate::model::draw_channels`] so that a shared
/// `(seed, stream)` yields the same draw either way.
pub fn sample_stats(n: usize, rng: &mut ChaCha12Rng) -> DrawStats {
    const HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;
    let mut h1 = [Complex64::new(0.0, 0.0); 16];
    debug_assert!(n <= 16, "antenna count beyond the stack buffer");
    let mut norm1_sq = 0.0;
    for slot in h1.iter_mut().take(n) {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let z = Complex64::new(re * HALF, im * HALF);
        norm1_sq += z.norm_sqr();
        *slot = z;
    }
    let mut norm2_sq = 0.0;
    for _ in 0..n {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        norm2_sq += Complex64::new(re * HALF, im * HALF).norm_sqr();
    }
    let mut norm_i_sq = 0.0;
    let mut dot = Complex64::new(0.0, 0.0);
    for h1k in h1.iter().take(n) {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let z = Complex64::new(re * HALF, im * HALF);
        norm_i_sq += z.norm_sqr();
        dot += h1k.conj() * z;
    }
    DrawStats {
        norm1_sq,
        norm2_sq,
        norm_i_sq,
        cross_sq: dot.norm_sqr(),
    }
}

/// Relay transmit power (noise-normalized) harvested from one draw:
/// `eta theta (rho1 |h1|^2 / d1^tau + [cci] rho_i |h_i|^2 / d_i^tau)`.
pub fn harvested_relay_power(draw: &ChannelDraw, params: &SystemParams, with_cci: bool) -> f64 {
    harvested_relay_power_stats(&DrawStats::from_draw(draw), params, with_cci)
}

pub fn harvested_relay_power_stats(stats: &DrawStats, params: &SystemParams, with_cci: bool) -> f64 {
    let mut z = params.s1() * stats.norm1_sq;
    if with_cci {
        z += params.si() * stats.norm_i_sq;
    }
    params.eta * params.theta * z
}

/// End-to-end SNR of the interference-free system.
pub fn sinr_noise_limited(draw: &ChannelDraw, params: &SystemParams) -> SinrDecomposition {
    sinr_noise_limited_stats(&DrawStats::from_draw(draw), params)
}

pub fn sinr_noise_limited_stats(stats: &DrawStats, params: &SystemParams) -> SinrDecomposition {
    let g1 = (1.0 - params.theta) * params.s1() * stats.norm1_sq;
    let g2 = params.eta * params.theta * params.s1() * stats.norm1_sq * stats.norm2_sq
        / params.d2_tau();
    SinrDecomposition::new(g1, g2)
}

/// Shared second hop of all three interference schemes: the relay forwards
/// with the full harvested power (source plus interferer energy).
#[inline]
fn gamma2_cci(stats: &DrawStats, params: &SystemParams) -> f64 {
    params.eta * params.theta / params.d2_tau()
        * (params.s1() * stats.norm1_sq + params.si() * stats.norm_i_sq)
        * stats.norm2_sq
}

/// MRC/MRT: combine along h1, ignore the interferer spatially.
pub fn sinr_mrc_mrt(draw: &ChannelDraw, params: &SystemParams) -> SinrDecomposition {
    sinr_mrc_mrt_stats(&DrawStats::from_draw(draw), params)
}

pub fn sinr_mrc_mrt_stats(stats: &DrawStats, params: &SystemParams) -> SinrDecomposition {
    let omth = 1.0 - params.theta;
    let g1 = if stats.norm1_sq > 0.0 {
        omth * params.s1() * stats.norm1_sq
            / (omth * params.si() * stats.cross_sq / stats.norm1_sq + 1.0)
    } else {
        0.0
    };
    SinrDecomposition::new(g1, gamma2_cci(stats, params))
}

/// ZF/MRT: combine within the orthogonal complement of h_i. Needs N > 1.
///
/// With the interferer disabled (`rho_i == 0`) there is nothing to null and
/// the scheme degenerates to MRC/MRT; that limit is returned.
pub fn sinr_zf_mrt(draw: &ChannelDraw, params: &SystemParams) -> Result<SinrDecomposition> {
    sinr_zf_mrt_stats(&DrawStats::from_draw(draw), params)
}

pub fn sinr_zf_mrt_stats(stats: &DrawStats, params: &SystemParams) -> Result<SinrDecomposition> {
    if params.n_antennas < 2 {
        return Err(Error::SchemeUnsupported(
            "zf-mrt needs more antennas than interferers (N > 1)".into(),
        ));
    }
    if params.rho_i == 0.0 {
        return Ok(sinr_mrc_mrt_stats(stats, params));
    }
    let projected = if stats.norm_i_sq > 0.0 {
        (stats.norm1_sq - stats.cross_sq / stats.norm_i_sq).max(0.0)
    } else {
        stats.norm1_sq
    };
    let g1 = (1.0 - params.theta) * params.s1() * projected;
    Ok(SinrDecomposition::new(g1, gamma2_cci(stats, params)))
}

/// MMSE/MRT: the combiner maximizing the first-hop SINR.
///
/// The quadratic form `h1' R^{-1} h1` with the rank-one
/// `R = h_i h_i' + sigma I` is evaluated through the Sherman–Morrison
/// identity; no matrix is formed. At `rho_i == 0` the noise-limited limit is
/// returned.
pub fn sinr_mmse_mrt(draw: &ChannelDraw, params: &SystemParams) -> SinrDecomposition {
    sinr_mmse_mrt_stats(&DrawStats::from_draw(draw), params)
}

pub fn sinr_mmse_mrt_stats(stats: &DrawStats, params: &SystemParams) -> SinrDecomposition {
    let omth = 1.0 - params.theta;
    if params.rho_i == 0.0 || omth == 0.0 {
        let g1 = omth * params.s1() * stats.norm1_sq;
        return SinrDecomposition::new(g1, gamma2_cci(stats, params));
    }
    let sigma = params.d_i_tau() / (omth * params.rho_i);
    let quad = (stats.norm1_sq - stats.cross_sq / (sigma + stats.norm_i_sq)) / sigma;
    let g1 = params.s1() / params.si() * quad;
    SinrDecomposition::new(g1, gamma2_cci(stats, params))
}

/// Per-draw SINR under the given scheme.
pub fn sinr(scheme: Scheme, stats: &DrawStats, params: &SystemParams) -> Result<SinrDecomposition> {
    match scheme {
        Scheme::NoiseLimited => Ok(sinr_noise_limited_stats(stats, params)),
        Scheme::MrcMrt => Ok(sinr_mrc_mrt_stats(stats, params)),
        Scheme::ZfMrt => sinr_zf_mrt_stats(stats, params),
        Scheme::MmseMrt => Ok(sinr_mmse_mrt_stats(stats, params)),
    }
}

// ---------------------------------------------------------------------------
// Explicit relay-weight assembly (validation path)
// ---------------------------------------------------------------------------

/// Combining vector and power-constraint factor of the rank-one relay
/// transformation `W = omega (h2' / |h2|) w1`.
#[derive(Debug, Clone)]
pub struct RelayWeights {
    /// Combining row vector w1.
    pub w1: Vec<Complex64>,
    /// Power constraint factor omega^2.
    pub omega_sq: f64,
}

/// Solve `A x = b` for a small complex system by Gaussian elimination with
/// partial pivoting. Only used when assembling MMSE weights.
fn solve_complex(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].norm_sqr().total_cmp(&a[j][col].norm_sqr()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let diag = a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / diag;
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= factor * v;
            }
            let bv = b[col];
            b[row] -= factor * bv;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    x
}

/// Assemble the combining vector and omega^2 for one draw.
pub fn relay_weights(
    scheme: Scheme,
    draw: &ChannelDraw,
    params: &SystemParams,
) -> Result<RelayWeights> {
    let n = draw.n();
    let stats = DrawStats::from_draw(draw);
    let omth = 1.0 - params.theta;

    let w1: Vec<Complex64> = match scheme {
        Scheme::NoiseLimited | Scheme::MrcMrt => {
            let norm = stats.norm1_sq.sqrt();
            draw.h1.iter().map(|z| z.conj() / norm).collect()
        }
        Scheme::ZfMrt => {
            if n < 2 {
                return Err(Error::SchemeUnsupported(
                    "zf-mrt needs more antennas than interferers (N > 1)".into(),
                ));
            }
            // h1' P with P = I - h_i h_i' / |h_i|^2, normalized.
            let dot: Complex64 = draw
                .h1
                .iter()
                .zip(&draw.h_i)
                .map(|(a, b)| a.conj() * b)
                .sum();
            let proj: Vec<Complex64> = draw
                .h1
                .iter()
                .zip(&draw.h_i)
                .map(|(h1k, hik)| h1k.conj() - dot / stats.norm_i_sq * hik.conj())
                .collect();
            let quad = (stats.norm1_sq - stats.cross_sq / stats.norm_i_sq).max(1e-300);
            proj.iter().map(|z| z / quad.sqrt()).collect()
        }
        Scheme::MmseMrt => {
            if params.rho_i <= 0.0 {
                return Err(Error::DegenerateParams(
                    "mmse weight assembly needs rho_i > 0".into(),
                ));
            }
            let sigma = params.d_i_tau() / (omth * params.rho_i);
            // A = h1 h1' + h_i h_i' + sigma I; w1 = h1' A^{-1} (a row), i.e.
            // solve A x = h1 and conjugate.
            let mut a = vec![vec![Complex64::new(0.0, 0.0); n]; n];
            for r in 0..n {
                for c in 0..n {
                    a[r][c] = draw.h1[r] * draw.h1[c].conj() + draw.h_i[r] * draw.h_i[c].conj();
                }
                a[r][r] += sigma;
            }
            solve_complex(a, draw.h1.clone())
                .into_iter()
                .map(|z| z.conj())
                .collect()
        }
    };

    let dot = |v: &[Complex64], h: &[Complex64]| -> f64 {
        v.iter()
            .zip(h)
            .map(|(a, b)| a * b)
            .sum::<Complex64>()
            .norm_sqr()
    };
    let w1_norm_sq: f64 = w1.iter().map(|z| z.norm_sqr()).sum();
    let p_r = harvested_relay_power_stats(&stats, params, scheme.uses_cci());
    let mut denom = omth * params.s1() * dot(&w1, &draw.h1) + w1_norm_sq;
    if scheme.uses_cci() {
        denom += omth * params.si() * dot(&w1, &draw.h_i);
    }
    Ok(RelayWeights {
        w1,
        omega_sq: p_r / denom,
    })
}
