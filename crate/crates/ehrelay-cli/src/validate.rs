//! Cross-check suite: special-function identities, distribution
//! normalizations, and analysis-vs-Monte-Carlo consistency on a parameter
//! grid. Deterministic for a fixed seed; any failed tolerance makes the
//! run exit nonzero.

use ehrelay::model::SystemParams;
use ehrelay::quad::QuadratureSpec;
use ehrelay::schemes::Scheme;
use ehrelay::{analysis, mc, optimum, quad, specfun};
use std::io::Write;

use crate::CliError;

pub const CSV_HEADER: &str = "check,scheme,detail,value,reference,status";

struct Report<'w, W: Write> {
    out: &'w mut W,
    all_pass: bool,
}

impl<W: Write> Report<'_, W> {
    /// A check passes when `value <= reference`.
    fn row(
        &mut self,
        check: &str,
        scheme: &str,
        detail: &str,
        value: f64,
        reference: f64,
    ) -> Result<(), CliError> {
        let pass = value <= reference;
        self.all_pass &= pass;
        writeln!(
            self.out,
            "{check},{scheme},{detail},{value:.11e},{reference:.11e},{}",
            if pass { "PASS" } else { "FAIL" }
        )
        .map_err(CliError::io)
    }
}

/// xorshift for reproducible parameter grids, independent of the MC engine.
struct Mix(u64);

impl Mix {
    fn next(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn random_cci_params(mix: &mut Mix) -> SystemParams {
    loop {
        let p = SystemParams {
            n_antennas: 1 + (mix.next() * 4.0) as usize,
            eta: 0.3 + 0.65 * mix.next(),
            theta: 0.2 + 0.6 * mix.next(),
            rho1: 10f64.powf(2.0 * mix.next() + 0.5),
            rho_i: 10f64.powf(1.5 * mix.next() - 0.5),
            d1: 0.5 + mix.next(),
            d2: 0.5 + mix.next(),
            d_i: 0.5 + mix.next(),
            tau: 2.0 + mix.next(),
            gamma_th: 1.0,
        };
        if p.s1() != p.si() {
            return p;
        }
    }
}

pub fn run_validate<W: Write>(quick: bool, seed: u64, out: &mut W) -> Result<bool, CliError> {
    writeln!(out, "{CSV_HEADER}").map_err(CliError::io)?;
    let mut rep = Report {
        out,
        all_pass: true,
    };
    let quad_spec = QuadratureSpec::default();

    // --- special functions -------------------------------------------------
    let mut mix = Mix(seed | 1);
    let mut worst = 0.0f64;
    for _ in 0..if quick { 200 } else { 1000 } {
        let a = -5.0 + 10.0 * mix.next();
        let x = 0.01 + 49.99 * mix.next();
        if a.abs() < 1e-3 || (a + 1.0).abs() < 1e-3 {
            continue;
        }
        let g1 = specfun::upper_inc_gamma(a + 1.0, x).map_err(CliError::usage)?;
        let g0 = specfun::upper_inc_gamma(a, x).map_err(CliError::usage)?;
        let resid = (g1 - a * g0 - (a * x.ln() - x).exp()).abs() / g1.abs().max(1.0);
        worst = worst.max(resid);
    }
    rep.row("specfun_gamma_recurrence", "-", "max_rel_residual", worst, 1e-9)?;

    let mut worst = 0.0f64;
    for &x in &[0.05, 1.0, 2.5, 12.0, 40.0] {
        for n in 0..6 {
            let d = (specfun::bessel_k_int(-n, x).map_err(CliError::usage)?
                - specfun::bessel_k_int(n, x).map_err(CliError::usage)?)
            .abs();
            worst = worst.max(d);
        }
    }
    rep.row("specfun_bessel_symmetry", "-", "max_abs_diff", worst, 0.0)?;

    let mut worst = 0.0f64;
    for &x in &[0.1, 1.0, 10.0] {
        let g = specfun::upper_inc_gamma(0.0, x).map_err(CliError::usage)?;
        let e = specfun::exp_integral_ei(-x).map_err(CliError::usage)?;
        worst = worst.max((g + e).abs() / g.abs());
    }
    rep.row("specfun_wronskian", "-", "max_rel_residual", worst, 1e-10)?;

    let mut worst = 0.0f64;
    for &w in &[0.5, 3.0, 80.0] {
        let got = specfun::gauss_2f1(2.0, 1.0, 2.0, -w).map_err(CliError::usage)?;
        worst = worst.max((got - 1.0 / (1.0 + w)).abs() * (1.0 + w));
    }
    rep.row("specfun_2f1_reduction", "-", "max_rel_error", worst, 1e-12)?;

    let mut worst = 0.0f64;
    for &z in &[0.4, 2.0, 15.0] {
        let got = specfun::kummer_u(1.0, 1.0, z).map_err(CliError::usage)?;
        let want = z.exp() * specfun::upper_inc_gamma(0.0, z).map_err(CliError::usage)?;
        worst = worst.max((got - want).abs() / want);
    }
    rep.row("specfun_kummer_identity", "-", "max_rel_error", worst, 1e-9)?;

    // --- distribution building blocks --------------------------------------
    let mass_spec = QuadratureSpec {
        rel_tol: 1e-9,
        abs_tol: 1e-290,
        max_subdivisions: 4000,
    };
    let mut mix = Mix(seed | 3);
    let sets = if quick { 3 } else { 20 };
    let mut worst = 0.0f64;
    for _ in 0..sets {
        let p = random_cci_params(&mut mix);
        let mass = quad::semi_infinite(
            |x| {
                if x <= 0.0 {
                    0.0
                } else {
                    analysis::pdf_z(x, &p).unwrap_or(0.0)
                }
            },
            0.0,
            &mass_spec,
        )
        .map_err(CliError::usage)?
        .value;
        worst = worst.max((mass - 1.0).abs());
    }
    rep.row("pdf_z_normalization", "-", "max_abs_deviation", worst, 1e-6)?;

    // --- analysis vs Monte Carlo -------------------------------------------
    let (grid, samples): (Vec<(usize, f64)>, usize) = if quick {
        (vec![(1, 10.0), (2, 20.0)], 200_000)
    } else {
        (
            vec![
                (1, 10.0),
                (1, 20.0),
                (1, 30.0),
                (2, 10.0),
                (2, 20.0),
                (2, 30.0),
                (4, 10.0),
                (4, 20.0),
                (4, 30.0),
            ],
            10_000_000,
        )
    };
    for &(n, db) in &grid {
        let p = SystemParams::baseline(n, 10f64.powf(db / 10.0));
        let exact = analysis::outage_exact_nl(&p, &quad_spec).map_err(CliError::usage)?;
        let est =
            mc::estimate_outage(Scheme::NoiseLimited, &p, samples, seed).map_err(CliError::usage)?;
        // Consistency band from the analytic probability, which remains
        // meaningful when the empirical count is zero.
        let sigma = (exact * (1.0 - exact) / samples as f64).sqrt();
        rep.row(
            "exact_vs_mc",
            "nl",
            &format!("N={n};rho1_db={db}"),
            (est.mean - exact).abs(),
            3.0 * sigma.max(f64::MIN_POSITIVE),
        )?;
    }

    let bound_points: Vec<(usize, f64)> = if quick {
        vec![(2, 20.0)]
    } else {
        vec![(2, 20.0), (2, 30.0), (3, 30.0)]
    };
    let bound_samples = if quick { 200_000 } else { 2_000_000 };
    for &(n, db) in &bound_points {
        let p = SystemParams::baseline(n, 10f64.powf(db / 10.0));
        for scheme in Scheme::ALL {
            let (_, lb) = analysis::outage_lower_bound(scheme, &p).map_err(CliError::usage)?;
            let est = mc::estimate_outage(scheme, &p, bound_samples, seed).map_err(CliError::usage)?;
            rep.row(
                "outage_bound_is_lower",
                scheme.name(),
                &format!("N={n};rho1_db={db}"),
                lb - est.mean,
                3.0 * est.std_error.max((lb / bound_samples as f64).sqrt()),
            )?;
        }
    }

    let cap_samples = if quick { 100_000 } else { 1_000_000 };
    for &db in if quick { &[20.0][..] } else { &[10.0, 20.0, 30.0][..] } {
        let p = SystemParams::baseline(2, 10f64.powf(db / 10.0));
        for scheme in Scheme::ALL {
            let ub = analysis::capacity_upper_bound(scheme, &p, &quad_spec).map_err(CliError::usage)?;
            let est =
                mc::estimate_capacity(scheme, &p, cap_samples, seed).map_err(CliError::usage)?;
            rep.row(
                "capacity_bound_is_upper",
                scheme.name(),
                &format!("N=2;rho1_db={db}"),
                est.mean - ub,
                3.0 * est.std_error,
            )?;
        }
    }

    // Shared-draw scheme ordering: MMSE dominates per draw, so its outage
    // estimate can never exceed the others on the same draws.
    let ord_samples = if quick { 200_000 } else { 1_000_000 };
    let p = SystemParams::baseline(2, 100.0);
    let ests = mc::estimate_outage_multi(
        &[Scheme::MmseMrt, Scheme::ZfMrt, Scheme::MrcMrt],
        &p,
        ord_samples,
        seed,
    )
    .map_err(CliError::usage)?;
    rep.row(
        "ordering_mmse_vs_zf",
        "mmse",
        "N=2;rho1_db=20",
        ests[0].mean - ests[1].mean,
        0.0,
    )?;
    rep.row(
        "ordering_mmse_vs_mrc",
        "mmse",
        "N=2;rho1_db=20",
        ests[0].mean - ests[2].mean,
        0.0,
    )?;

    // --- optimal splitting ratio -------------------------------------------
    let mut mix = Mix(seed | 7);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let mut p = random_cci_params(&mut mix);
        p.n_antennas = 1;
        let closed = optimum::optimal_theta_mrc_n1(&p).map_err(CliError::usage)?;
        let root = optimum::optimal_theta(Scheme::MrcMrt, &p)
            .map_err(CliError::usage)?
            .theta_star;
        worst = worst.max((closed - root).abs());
    }
    rep.row("theta_closed_form", "mrc", "N=1", worst, 1e-8)?;

    let p = SystemParams::baseline(2, 1000.0);
    for scheme in Scheme::ALL {
        let sol = optimum::optimal_theta(scheme, &p).map_err(CliError::usage)?;
        let poly = optimum::ThetaPolynomial::new(scheme, &p).map_err(CliError::usage)?;
        let (_, scale) = poly.eval_scaled(sol.theta_star);
        rep.row(
            "theta_residual",
            scheme.name(),
            "N=2;rho1_db=30",
            sol.residual,
            1e-9 * scale.max(1.0),
        )?;
    }

    Ok(rep.all_pass)
}
