use super::*;
use crate::quad::QuadratureSpec;

fn spec_point() -> SystemParams {
    // N = 2, eta = 0.8, theta = 0.5, rho1 = 100, unit distances, tau = 2,
    // gamma_th = 1.
    SystemParams::baseline(2, 100.0)
}

fn cci_point() -> SystemParams {
    let mut p = SystemParams::baseline(2, 10.0);
    p.rho_i = 2.0;
    p
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

/// Composite Simpson on a closure.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, steps: usize) -> f64 {
    let steps = steps + steps % 2;
    let h = (b - a) / steps as f64;
    let mut acc = f(a) + f(b);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

#[test]
fn outage_coeffs_match_definitions() {
    let p = spec_point();
    let co = OutageCoeffs::from_params(&p);
    assert!((co.a - 0.5 * 100.0).abs() < 1e-12);
    assert!((co.b - 1.0).abs() < 1e-12);
    assert!((co.c - 0.8 * 0.5 * 0.5 * 100.0 * 100.0).abs() < 1e-9);
    assert!((co.d - 0.8 * 0.5 * 100.0).abs() < 1e-10);
    assert!(co.c > 0.0 && co.d > 0.0);
}

#[test]
fn exact_outage_degenerate_and_small_threshold() {
    let mut p = spec_point();
    p.theta = 0.0;
    assert_eq!(outage_exact_nl(&p, &QuadratureSpec::default()).unwrap(), 1.0);
    p = spec_point();
    p.gamma_th = 1e-9;
    let v = outage_exact_nl(&p, &QuadratureSpec::default()).unwrap();
    assert!(v < 1e-6, "v = {v}");
}

/// Brute-force oracle for the exact outage: two-dimensional quadrature of
/// the outage region over the joint density of the two squared norms, using
/// raw Simpson sums and the bare gamma density (independent of the
/// production integration and special-function paths).
fn outage_2d_oracle(p: &SystemParams) -> f64 {
    let n = p.n_antennas;
    let co = OutageCoeffs::from_params(p);
    let gamma_n = factorial(n - 1);
    let dens = |t: f64| t.powi(n as i32 - 1) * (-t).exp() / gamma_n;
    let y_cap = 60.0;
    let inner = |x: f64| -> f64 {
        let denom = co.c * x * x - co.d * x;
        if denom <= 0.0 {
            return 1.0; // every y is in outage
        }
        let y_star = ((co.a * x + co.b) / denom).min(y_cap);
        simpson(dens, 0.0, y_star, 600)
    };
    // Below x = d/c the whole y-axis is in outage; above it the integrand has
    // a boundary layer, resolved by the substitution x = d/c + u^2.
    let lower = co.d / co.c;
    let head = simpson(dens, 0.0, lower, 400);
    let tail = simpson(
        |u| {
            let x = lower + u * u;
            2.0 * u * dens(x) * inner(x)
        },
        0.0,
        (50.0 - lower).sqrt(),
        6000,
    );
    head + tail
}

#[test]
fn exact_outage_matches_2d_oracle() {
    let p = spec_point();
    let got = outage_exact_nl(&p, &QuadratureSpec::default()).unwrap();
    let want = outage_2d_oracle(&p);
    assert!(rel_err(got, want) < 1e-6, "got {got}, oracle {want}");
}

/// The closed Bessel-sum bound must equal its defining integral.
#[test]
fn nl_bound_matches_direct_quadrature() {
    for n in 1..=4usize {
        let mut p = spec_point();
        p.n_antennas = n;
        let (factors, bound) = outage_lower_bound(Scheme::NoiseLimited, &p).unwrap();
        assert!((bound - (1.0 - factors.f1 * factors.f2)).abs() < 1e-14);
        let co = OutageCoeffs::from_params(&p);
        let gamma_n = factorial(n - 1);
        let survival = quad::semi_infinite(
            move |x| {
                let denom = co.c * x - co.d;
                if denom <= 0.0 {
                    return 0.0;
                }
                (1.0 - gamma_cdf(n, co.a / denom))
                    * ((n - 1) as f64 * x.ln() - x - gamma_n.ln()).exp()
            },
            co.d / co.c,
            &QuadratureSpec::strict(),
        )
        .unwrap()
        .value;
        assert!(
            rel_err(factors.f1, survival) < 1e-7,
            "N = {n}: closed {} vs quadrature {survival}",
            factors.f1
        );
    }
}

#[test]
fn pdf_z_normalization_mean_and_n1_form() {
    for (n, rho1, rho_i) in [(1usize, 10.0, 2.0), (2, 10.0, 2.0), (3, 31.6, 8.9)] {
        let mut p = SystemParams::baseline(n, rho1);
        p.rho_i = rho_i;
        let mass = quad::semi_infinite(|x| pdf_z(x, &p).unwrap_or(0.0), 0.0, &QuadratureSpec::strict())
            .unwrap()
            .value;
        assert!((mass - 1.0).abs() < 1e-6, "N = {n}: mass = {mass}");
        let mean = quad::semi_infinite(
            |x| x * pdf_z(x, &p).unwrap_or(0.0),
            0.0,
            &QuadratureSpec::strict(),
        )
        .unwrap()
        .value;
        assert!(rel_err(mean, mean_z(&p)) < 1e-6, "N = {n}: mean = {mean}");
    }
    // N = 1: two-exponential mixture.
    let mut p = SystemParams::baseline(1, 10.0);
    p.rho_i = 2.0;
    let (s1, si) = (p.s1(), p.si());
    for &x in &[0.1, 1.0, 5.0, 20.0] {
        let want = ((-x / s1).exp() - (-x / si).exp()) / (s1 - si);
        assert!(rel_err(pdf_z(x, &p).unwrap(), want) < 1e-10, "x = {x}");
    }
}

#[test]
fn pdf_z_rejects_degenerate_scales() {
    let mut p = SystemParams::baseline(2, 10.0);
    p.rho_i = 10.0;
    assert!(matches!(pdf_z(1.0, &p), Err(Error::DegenerateParams(_))));
    // Equal rho but different distance is fine.
    p.d_i = 2.0;
    assert!(pdf_z(1.0, &p).is_ok());
}

/// The second-hop cdf must agree with direct quadrature over the density of
/// the harvested-power variable.
#[test]
fn cdf_gamma_i2_matches_quadrature() {
    let p = cci_point();
    let n = p.n_antennas;
    for &x in &[0.2, 1.0, 4.0] {
        let got = cdf_gamma_i2(x, &p).unwrap();
        let w = p.d2_tau() * x / (p.eta * p.theta);
        let want = quad::semi_infinite(
            |z| {
                if z <= 0.0 {
                    return 0.0;
                }
                gamma_cdf(n, w / z) * pdf_z(z, &p).unwrap_or(0.0)
            },
            0.0,
            &QuadratureSpec::strict(),
        )
        .unwrap()
        .value;
        assert!(rel_err(got, want) < 1e-7, "x = {x}: {got} vs {want}");
    }
}

#[test]
fn cdf_gamma_i2_shape() {
    let p = cci_point();
    assert_eq!(cdf_gamma_i2(0.0, &p).unwrap(), 0.0);
    let mut last = 0.0;
    for i in 1..=50 {
        let x = 0.2 * i as f64;
        let v = cdf_gamma_i2(x, &p).unwrap();
        assert!((0.0..=1.0).contains(&v));
        assert!(v + 1e-12 >= last, "not monotone at x = {x}");
        last = v;
    }
    assert!(cdf_gamma_i2(1e6, &p).unwrap() > 1.0 - 1e-3);
}

#[test]
fn cdf_gamma_i1_cases() {
    let p = cci_point();
    for scheme in Scheme::ALL {
        assert_eq!(cdf_gamma_i1(scheme, 0.0, &p).unwrap(), 0.0);
        let mut last = 0.0;
        for i in 1..=40 {
            let x = 0.25 * i as f64;
            let v = cdf_gamma_i1(scheme, x, &p).unwrap();
            assert!((0.0..=1.0).contains(&v));
            assert!(v + 1e-12 >= last, "{scheme} not monotone at {x}");
            last = v;
        }
        assert!(cdf_gamma_i1(scheme, 1e6, &p).unwrap() > 1.0 - 1e-6);
    }
    // ZF restates the reduced-shape Erlang cdf.
    let kappa = 1.0 / ((1.0 - p.theta) * p.s1());
    for &x in &[0.3, 1.0, 3.0] {
        assert!(
            (cdf_gamma_i1(Scheme::ZfMrt, x, &p).unwrap() - gamma_cdf(1, kappa * x)).abs() < 1e-12
        );
    }
    // Vanishing interference recovers the noise-limited first hop.
    let mut weak = p;
    weak.rho_i = 1e-12;
    for &x in &[0.5, 2.0] {
        let nl = cdf_gamma_i1(Scheme::NoiseLimited, x, &weak).unwrap();
        let mrc = cdf_gamma_i1(Scheme::MrcMrt, x, &weak).unwrap();
        let mmse = cdf_gamma_i1(Scheme::MmseMrt, x, &weak).unwrap();
        assert!((mrc - nl).abs() < 1e-6, "mrc {mrc} vs nl {nl}");
        assert!((mmse - nl).abs() < 1e-6);
    }
}

#[test]
fn lower_bound_vanishes_with_threshold() {
    let mut p = cci_point();
    p.gamma_th = 1e-9;
    for scheme in Scheme::ALL {
        let (_, bound) = outage_lower_bound(scheme, &p).unwrap();
        assert!(bound < 1e-4, "{scheme}: bound = {bound}");
    }
}

#[test]
fn lower_bound_rejects_equal_scales_without_perturbation() {
    let mut p = SystemParams::baseline(2, 10.0);
    p.rho_i = 10.0;
    for scheme in [Scheme::MrcMrt, Scheme::ZfMrt, Scheme::MmseMrt] {
        assert!(matches!(
            outage_lower_bound(scheme, &p),
            Err(Error::DegenerateParams(_))
        ));
    }
    assert!(outage_lower_bound(Scheme::NoiseLimited, &p).is_ok());
}

#[test]
fn zf_high_snr_is_a_pure_power_law() {
    let mut p = SystemParams::baseline(3, 1.0);
    let mut last: Option<(f64, f64)> = None;
    for db in [45.0, 50.0, 55.0, 60.0] {
        p.rho1 = 10f64.powf(db / 10.0);
        let v = outage_high_snr(Scheme::ZfMrt, &p).unwrap();
        if let Some((prev_db, prev)) = last {
            let slope = (v.log10() - prev.log10()) / ((db - prev_db) / 10.0);
            assert!(
                (slope + (p.n_antennas - 1) as f64).abs() < 1e-9,
                "slope = {slope}"
            );
        }
        last = Some((db, v));
    }
}

#[test]
fn mrc_high_snr_general_reduces_to_n1_form() {
    // The general expression evaluated at N = 1 approaches the displayed
    // single-antenna formula as rho1 grows (they differ by a factor
    // 1/(1 - si/s1) on the log term).
    let mut p = SystemParams::baseline(1, 10f64.powf(5.5));
    p.rho_i = 10f64.powf(0.95);
    let general = outage_high_snr_mrc_general(&p).unwrap();
    let closed = outage_high_snr(Scheme::MrcMrt, &p).unwrap();
    assert!(rel_err(general, closed) < 1e-4, "{general} vs {closed}");
}

#[test]
fn nl_high_snr_forms_agree_asymptotically() {
    let mut p = SystemParams::baseline(2, 10f64.powf(5.0));
    p.rho_i = 0.0;
    let simple = outage_high_snr(Scheme::NoiseLimited, &p).unwrap();
    let ei_form = outage_high_snr_nl_ei_form(&p).unwrap();
    assert!(rel_err(simple, ei_form) < 1e-3, "{simple} vs {ei_form}");
}

/// The interference-averaged second hop term equals
/// `(d2^tau gamma_th / (eta theta))^N E[Z^{-N}] / Gamma(N+1)`. The inverse
/// moment has the exact smooth representation
/// `E[Z^{-N}] = (1/Gamma(N)) int_0^inf t^{N-1} (1+s1 t)^{-N} (1+si t)^{-N} dt`
/// through the Laplace transform of the two independent Erlang branches.
#[test]
fn hsnr_second_term_matches_inverse_moment() {
    for n in [2usize, 3] {
        let mut p = SystemParams::baseline(n, 100.0);
        p.rho_i = 8.912509381337456;
        let got = hsnr_second_term(&p).unwrap() * (p.gamma_th / p.s1()).powi(n as i32);
        let (s1, si) = (p.s1(), p.si());
        let inv_moment = quad::semi_infinite(
            move |t| {
                if t <= 0.0 {
                    return 0.0;
                }
                t.powi(n as i32 - 1)
                    / ((1.0 + s1 * t) * (1.0 + si * t)).powi(n as i32)
            },
            0.0,
            &QuadratureSpec::strict(),
        )
        .unwrap()
        .value
            / factorial(n - 1);
        let want =
            (p.d2_tau() * p.gamma_th / (p.eta * p.theta)).powi(n as i32) * inv_moment / factorial(n);
        assert!(rel_err(got, want) < 1e-7, "N = {n}: {got} vs {want}");
    }
}

#[test]
fn array_gain_hand_example_and_ordering() {
    // N = 2, theta = 0.5, rho_i = 2, d_i = 1: mu = 1.
    let mut p = SystemParams::baseline(2, 10.0);
    p.rho_i = 2.0;
    let g = array_gain_terms(&p).unwrap();
    assert!((g.mrc - 2.5).abs() < 1e-12, "mrc = {}", g.mrc);
    assert!((g.zf - 1.0).abs() < 1e-12);
    assert!((g.mmse - 1.5).abs() < 1e-12);
    // MMSE keeps the first two MRC terms: strictly smaller for N >= 2 with
    // an active interferer, identical when N = 1 exhausts the series.
    for n in 1..=4 {
        for rho_i_db in [-10.0, 0.0, 9.5, 20.0] {
            let mut p = SystemParams::baseline(n, 100.0);
            p.rho_i = 10f64.powf(rho_i_db / 10.0);
            let g = array_gain_terms(&p).unwrap();
            if n >= 2 {
                assert!(g.mmse < g.mrc, "N = {n}, rho_i_db = {rho_i_db}");
            } else {
                assert!((g.mmse - g.mrc).abs() < 1e-14 * g.mrc);
            }
        }
    }
    // Without the interferer both collapse to the leading term.
    let mut p = SystemParams::baseline(3, 100.0);
    p.rho_i = 0.0;
    let g = array_gain_terms(&p).unwrap();
    assert!((g.mrc - g.mmse).abs() < 1e-15);
    assert!((g.mrc - 1.0 / factorial(3)).abs() < 1e-15);
}

#[test]
fn cci_penalty_consistent_with_high_snr_forms() {
    for rho_i_db in [-15.0f64, -5.0, 5.0, 15.0] {
        let mut p = SystemParams::baseline(1, 10f64.powf(3.0));
        p.rho_i = 10f64.powf(rho_i_db / 10.0);
        let penalty = mrc_n1_cci_penalty(&p).unwrap();
        let with_cci = outage_high_snr(Scheme::MrcMrt, &p).unwrap();
        let without = outage_high_snr(Scheme::NoiseLimited, &p).unwrap();
        let diff = (with_cci - without) * p.s1() / p.gamma_th;
        assert!(
            (penalty - diff).abs() < 1e-9 * penalty.abs().max(1.0),
            "penalty {penalty} vs bracket diff {diff}"
        );
    }
}

#[test]
fn simo_capacity_single_antenna_reduction() {
    // One-antenna first hop: (1/ln 4) e^kappa Gamma(0, kappa).
    let p = SystemParams::baseline(1, 100.0);
    let kappa = 1.0 / ((1.0 - p.theta) * p.s1());
    let got = simo_capacity_sum(1, kappa, &QuadratureSpec::strict()).unwrap();
    let want = kappa.exp() * upper_inc_gamma(0.0, kappa).unwrap() / (2.0 * std::f64::consts::LN_2);
    assert!(rel_err(got, want) < 1e-12);
}

#[test]
fn capacity_vanishes_at_tiny_snr_and_degenerate_theta() {
    let mut p = SystemParams::baseline(2, 1e-4);
    p.rho_i = 2e-5;
    for scheme in Scheme::ALL {
        let c = capacity_upper_bound(scheme, &p, &QuadratureSpec::default()).unwrap();
        assert!(c.abs() < 1e-3, "{scheme}: c = {c}");
    }
    let mut p = cci_point();
    p.theta = 1.0;
    assert_eq!(
        capacity_upper_bound(Scheme::MrcMrt, &p, &QuadratureSpec::default()).unwrap(),
        0.0
    );
}

#[test]
fn e_ln_z_matches_quadrature() {
    let p = cci_point();
    let got = e_ln_z(&p).unwrap();
    let want = quad::semi_infinite(
        |x| {
            if x <= 0.0 {
                return 0.0;
            }
            x.ln() * pdf_z(x, &p).unwrap_or(0.0)
        },
        0.0,
        &QuadratureSpec::strict(),
    )
    .unwrap()
    .value;
    assert!(rel_err(got, want) < 1e-6, "{got} vs {want}");
}

#[test]
fn mrc_log_moment_single_antenna_identity() {
    // At N = 1 the derivative term collapses to e^lambda Gamma(0, lambda).
    let mut p = SystemParams::baseline(1, 10.0);
    p.rho_i = 2.0;
    let lambda = 1.0 / ((1.0 - p.theta) * p.si());
    let got = mrc_e_ln_gamma_i1(&p, &QuadratureSpec::strict()).unwrap();
    let want = ((1.0 - p.theta) * p.s1()).ln()
        - EULER_GAMMA
        - exp_scaled_upper_gamma(0.0, lambda, &QuadratureSpec::strict()).unwrap();
    assert!(rel_err(got, want) < 1e-9, "{got} vs {want}");
}

#[test]
fn exp_scaled_gamma_handles_large_arguments() {
    // Both evaluation routes agree where each is valid, and the shifted
    // integral stays finite where e^x alone would overflow.
    for &a in &[0.0f64, -1.0, -3.0] {
        let x = 35.0f64;
        let direct = x.exp() * upper_inc_gamma(a, x).unwrap();
        let shifted = exp_scaled_upper_gamma(a, x, &QuadratureSpec::strict()).unwrap();
        assert!(rel_err(direct, shifted) < 1e-9, "a = {a}: {direct} vs {shifted}");
        let huge = exp_scaled_upper_gamma(a, 2e4, &QuadratureSpec::strict()).unwrap();
        assert!(huge.is_finite() && huge > 0.0);
    }
}

#[test]
fn capacity_rejects_unsupported_configurations() {
    let p1 = SystemParams::baseline(1, 100.0);
    assert!(matches!(
        capacity_upper_bound(Scheme::ZfMrt, &p1, &QuadratureSpec::default()),
        Err(Error::SchemeUnsupported(_))
    ));
    let mut eq = SystemParams::baseline(2, 10.0);
    eq.rho_i = 10.0;
    assert!(matches!(
        capacity_upper_bound(Scheme::MmseMrt, &eq, &QuadratureSpec::default()),
        Err(Error::DegenerateParams(_))
    ));
}
