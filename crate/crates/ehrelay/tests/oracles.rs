//! Monte Carlo oracle checks of the analytical layer: every cdf, bound and
//! capacity term is compared against a direct simulation of the quantity it
//! claims to describe, at a three-sigma consistency level.

use ehrelay::analysis;
use ehrelay::mc;
use ehrelay::model::{RngStream, SystemParams};
use ehrelay::quad::QuadratureSpec;
use ehrelay::schemes::{self, Scheme};

/// Spec params used by most distribution checks.
fn dist_point() -> SystemParams {
    let mut p = SystemParams::baseline(2, 10.0);
    p.rho_i = 2.0;
    p
}

/// High-SNR comparison point: N = 2, 20 dB source, 9.5 dB interferer.
fn perf_point() -> SystemParams {
    SystemParams::baseline(2, 100.0)
}

struct Sampler {
    n: usize,
    rng: rand_chacha::ChaCha12Rng,
}

impl Sampler {
    fn new(n: usize, seed: u64) -> Self {
        Sampler {
            n,
            rng: RngStream::new(seed, 0).rng(),
        }
    }

    fn stats(&mut self) -> schemes::DrawStats {
        schemes::sample_stats(self.n, &mut self.rng)
    }
}

fn binom_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn first_hop_cdfs_match_simulation() {
    let p = dist_point();
    let n = 10_000_000usize;
    let x = 1.0;
    let mut s = Sampler::new(p.n_antennas, 0xA11CE);
    let mut hits = [0u64; 3];
    for _ in 0..n {
        let st = s.stats();
        if schemes::sinr_mrc_mrt_stats(&st, &p).gamma1 < x {
            hits[0] += 1;
        }
        if schemes::sinr_zf_mrt_stats(&st, &p).unwrap().gamma1 < x {
            hits[1] += 1;
        }
        if schemes::sinr_mmse_mrt_stats(&st, &p).gamma1 < x {
            hits[2] += 1;
        }
    }
    for (k, scheme) in [Scheme::MrcMrt, Scheme::ZfMrt, Scheme::MmseMrt]
        .into_iter()
        .enumerate()
    {
        let analytic = analysis::cdf_gamma_i1(scheme, x, &p).unwrap();
        let emp = hits[k] as f64 / n as f64;
        let sigma = binom_sigma(analytic, n);
        assert!(
            (emp - analytic).abs() <= 3.0 * sigma,
            "{scheme}: empirical {emp} vs analytic {analytic} (sigma {sigma:.2e})"
        );
    }
}

#[test]
fn second_hop_cdf_matches_simulation() {
    let p = dist_point();
    let n = 10_000_000usize;
    let x = 1.0;
    let mut s = Sampler::new(p.n_antennas, 0xB0B);
    let mut hits = 0u64;
    for _ in 0..n {
        if schemes::sinr_mrc_mrt_stats(&s.stats(), &p).gamma2 < x {
            hits += 1;
        }
    }
    let analytic = analysis::cdf_gamma_i2(x, &p).unwrap();
    let emp = hits as f64 / n as f64;
    let sigma = binom_sigma(analytic, n);
    assert!(
        (emp - analytic).abs() <= 3.0 * sigma,
        "empirical {emp} vs analytic {analytic}"
    );
}

/// The product-form bound equals the outage of `min(gamma1, gamma2)` with the
/// two hops resampled independently; simulate exactly that construction.
#[test]
fn outage_bound_matches_independent_resampling() {
    let p = perf_point();
    let n = 10_000_000usize;
    for scheme in [Scheme::MrcMrt, Scheme::ZfMrt, Scheme::MmseMrt] {
        let mut a = Sampler::new(p.n_antennas, 0xC0FFEE);
        let mut b = Sampler::new(p.n_antennas, 0xDECAF);
        let mut hits = 0u64;
        for _ in 0..n {
            let g1 = schemes::sinr(scheme, &a.stats(), &p).unwrap().gamma1;
            let g2 = schemes::sinr(scheme, &b.stats(), &p).unwrap().gamma2;
            if g1.min(g2) < p.gamma_th {
                hits += 1;
            }
        }
        let (_, bound) = analysis::outage_lower_bound(scheme, &p).unwrap();
        let emp = hits as f64 / n as f64;
        let sigma = binom_sigma(bound, n);
        assert!(
            (emp - bound).abs() <= 3.0 * sigma,
            "{scheme}: resampled {emp} vs bound {bound} (sigma {sigma:.2e})"
        );
    }
}

#[test]
fn exact_outage_matches_simulation() {
    let p = perf_point();
    let exact = analysis::outage_exact_nl(&p, &QuadratureSpec::default()).unwrap();
    let est = mc::estimate_outage(Scheme::NoiseLimited, &p, 10_000_000, 0xE0).unwrap();
    let sigma = binom_sigma(exact, est.n_samples);
    assert!(
        (est.mean - exact).abs() <= 3.0 * sigma,
        "mc {} vs exact {exact}",
        est.mean
    );
}

/// Per-hop capacity terms and log-moments are exact expectations; compare
/// each against its sample mean.
#[test]
fn capacity_components_match_simulation() {
    let p = perf_point();
    let spec = QuadratureSpec::default();
    let n = 1_000_000usize;
    for scheme in Scheme::ALL {
        let parts = analysis::capacity_components(scheme, &p, &spec).unwrap();
        let mut s = Sampler::new(p.n_antennas, 0xFEED + scheme as u64);
        let mut acc = [0.0f64; 4];
        let mut acc_sq = [0.0f64; 4];
        for _ in 0..n {
            let g = schemes::sinr(scheme, &s.stats(), &p).unwrap();
            let vals = [
                0.5 * (1.0 + g.gamma1).log2(),
                0.5 * (1.0 + g.gamma2).log2(),
                g.gamma1.ln(),
                g.gamma2.ln(),
            ];
            for (k, v) in vals.into_iter().enumerate() {
                acc[k] += v;
                acc_sq[k] += v * v;
            }
        }
        let analytic = [
            parts.hop1_capacity,
            parts.hop2_capacity,
            parts.hop1_log_mean,
            parts.hop2_log_mean,
        ];
        let names = ["C1", "C2", "E ln g1", "E ln g2"];
        for k in 0..4 {
            let mean = acc[k] / n as f64;
            let var = (acc_sq[k] / n as f64 - mean * mean).max(0.0);
            let sigma = (var / n as f64).sqrt();
            assert!(
                (mean - analytic[k]).abs() <= 3.0 * sigma.max(1e-9),
                "{scheme} {}: mc {mean} vs analytic {} (sigma {sigma:.2e})",
                names[k],
                analytic[k]
            );
        }
    }
}

#[test]
fn capacity_bound_sits_above_simulation() {
    let spec = QuadratureSpec::default();
    for scheme in Scheme::ALL {
        for rho1_db in [10.0, 20.0, 30.0] {
            let p = SystemParams::baseline(2, 10f64.powf(rho1_db / 10.0));
            let ub = analysis::capacity_upper_bound(scheme, &p, &spec).unwrap();
            let est = mc::estimate_capacity(scheme, &p, 1_000_000, 0xCAB).unwrap();
            assert!(
                ub >= est.mean - 3.0 * est.std_error,
                "{scheme} at {rho1_db} dB: ub {ub} vs mc {} +- {}",
                est.mean,
                est.std_error
            );
        }
    }
}

/// High-SNR approximations against the exact/simulated outage at 20 dB: the
/// approximations land within their slow log-corrected convergence band.
#[test]
fn high_snr_forms_are_consistent_at_moderate_snr() {
    let p = perf_point();
    let exact = analysis::outage_exact_nl(&p, &QuadratureSpec::default()).unwrap();
    let hs = analysis::outage_high_snr(Scheme::NoiseLimited, &p).unwrap();
    let ratio = hs / exact;
    assert!((0.4..1.1).contains(&ratio), "ratio = {ratio}");
    for scheme in [Scheme::MrcMrt, Scheme::MmseMrt] {
        let est = mc::estimate_outage(scheme, &p, 4_000_000, 0xD1CE).unwrap();
        let hs = analysis::outage_high_snr(scheme, &p).unwrap();
        let ratio = hs / est.mean;
        assert!((0.4..1.1).contains(&ratio), "{scheme}: ratio = {ratio}");
    }
}
