//! Seeded, parallel Monte Carlo estimation of outage probability and ergodic
//! capacity.
//!
//! Draws are partitioned into fixed-size blocks; block `b` always consumes
//! substream `b` of the seed, so the sample set depends only on
//! `(seed, n_samples)`, never on the worker count. Outage is counted in
//! integers and capacity in per-block compensated sums that are reduced in
//! block order, which keeps estimates bit-identical across thread pools
//! (capacity means are reproducible to well below 1e-12 relative; outage
//! counts exactly).
//!
//! Because the channel statistics do not depend on the scheme or on theta,
//! two runs with the same `(seed, n_samples)` share their channel draws —
//! common random numbers for scheme and splitting-ratio comparisons come for
//! free.

use crate::model::{RngStream, SystemParams};
use crate::schemes::{self, Scheme};
use crate::{Error, Result};
use rayon::prelude::*;

const BLOCK: usize = 1 << 14;

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

fn check(params: &SystemParams, scheme: Scheme, n_samples: usize) -> Result<()> {
    params.validate()?;
    if n_samples < 1000 {
        return Err(Error::InvalidParams(format!(
            "n_samples = {n_samples} (requires >= 1000)"
        )));
    }
    if scheme == Scheme::ZfMrt && params.n_antennas < 2 {
        return Err(Error::SchemeUnsupported(
            "zf-mrt needs more antennas than interferers (N > 1)".into(),
        ));
    }
    Ok(())
}

fn block_bounds(n_samples: usize) -> Vec<(u64, usize)> {
    (0..n_samples.div_ceil(BLOCK))
        .map(|b| (b as u64, BLOCK.min(n_samples - b * BLOCK)))
        .collect()
}

/// Fraction of draws whose end-to-end SINR falls below the threshold.
pub fn estimate_outage(
    scheme: Scheme,
    params: &SystemParams,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check(params, scheme, n_samples)?;
    let n_ant = params.n_antennas;
    let hits: u64 = block_bounds(n_samples)
        .par_iter()
        .map(|&(b, len)| {
            let mut rng = RngStream::new(seed, b).rng();
            let mut c = 0u64;
            for _ in 0..len {
                let stats = schemes::sample_stats(n_ant, &mut rng);
                let s = schemes::sinr(scheme, &stats, params).expect("scheme checked");
                if s.gamma_e2e < params.gamma_th {
                    c += 1;
                }
            }
            c
        })
        .sum();
    let p = hits as f64 / n_samples as f64;
    Ok(McEstimate {
        mean: p,
        std_error: (p * (1.0 - p) / n_samples as f64).sqrt(),
        n_samples,
        seed,
        scheme,
    })
}

/// Outage for several schemes over one shared set of draws.
pub fn estimate_outage_multi(
    schemes_list: &[Scheme],
    params: &SystemParams,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    for &s in schemes_list {
        check(params, s, n_samples)?;
    }
    let n_ant = params.n_antennas;
    let counts: Vec<u64> = block_bounds(n_samples)
        .par_iter()
        .map(|&(b, len)| {
            let mut rng = RngStream::new(seed, b).rng();
            let mut c = vec![0u64; schemes_list.len()];
            for _ in 0..len {
                let stats = schemes::sample_stats(n_ant, &mut rng);
                for (k, &scheme) in schemes_list.iter().enumerate() {
                    let s = schemes::sinr(scheme, &stats, params).expect("scheme checked");
                    if s.gamma_e2e < params.gamma_th {
                        c[k] += 1;
                    }
                }
            }
            c
        })
        .reduce(
            || vec![0u64; schemes_list.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(schemes_list
        .iter()
        .zip(counts)
        .map(|(&scheme, hits)| {
            let p = hits as f64 / n_samples as f64;
            McEstimate {
                mean: p,
                std_error: (p * (1.0 - p) / n_samples as f64).sqrt(),
                n_samples,
                seed,
                scheme,
            }
        })
        .collect())
}

#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Sample mean of the per-draw rate `0.5 log2(1 + sinr)`.
pub fn estimate_capacity(
    scheme: Scheme,
    params: &SystemParams,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check(params, scheme, n_samples)?;
    let n_ant = params.n_antennas;
    let partials: Vec<(f64, f64)> = block_bounds(n_samples)
        .par_iter()
        .map(|&(b, len)| {
            let mut rng = RngStream::new(seed, b).rng();
            let mut s = Kahan::default();
            let mut s2 = Kahan::default();
            for _ in 0..len {
                let stats = schemes::sample_stats(n_ant, &mut rng);
                let g = schemes::sinr(scheme, &stats, params).expect("scheme checked");
                let rate = 0.5 * (1.0 + g.gamma_e2e).log2();
                s.add(rate);
                s2.add(rate * rate);
            }
            (s.sum, s2.sum)
        })
        .collect();
    // Sequential reduction in block order keeps the result thread-count free.
    let mut total = Kahan::default();
    let mut total_sq = Kahan::default();
    for (s, s2) in partials {
        total.add(s);
        total_sq.add(s2);
    }
    let n = n_samples as f64;
    let mean = total.sum / n;
    let var = ((total_sq.sum - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (var / n).sqrt(),
        n_samples,
        seed,
        scheme,
    })
}
