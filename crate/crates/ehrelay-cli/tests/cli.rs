//! Interface contract of the `ehrelay` binary: CSV shapes, flag precedence,
//! exit codes, and output determinism.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehrelay"))
        .args(args)
        .output()
        .expect("spawn ehrelay")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn outage_sweep_contract() {
    let out = run(&[
        "outage",
        "--scheme",
        "mmse",
        "--sweep",
        "rho1_db",
        "0:5:40",
        "--n",
        "3",
        "--theta",
        "0.5",
        "--rho-i-db",
        "9.5",
        "--mc-samples",
        "2000",
        "--seed",
        "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "param,scheme,quantity,value,stderr");
    // 9 sweep values x 1 scheme x 3 quantities (exact is noise-limited only).
    assert_eq!(text.lines().count(), 1 + 9 * 3);
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 5, "line {line}");
        assert_eq!(cols[1], "mmse");
        let _: f64 = cols[3].parse().unwrap();
    }
    // Analytic rows have a blank stderr column.
    assert!(text.lines().any(|l| l.contains(",outage_lb,") && l.ends_with(',')));
}

#[test]
fn capacity_sweep_contract() {
    let out = run(&[
        "capacity",
        "--scheme",
        "nl,mrc",
        "--sweep",
        "rho1_db",
        "10,20",
        "--mc-samples",
        "2000",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);
    assert!(text.contains(",capacity_ub,"));
    assert!(text.contains(",capacity_mc,"));
}

#[test]
fn theta_matches_closed_form() {
    let out = run(&["theta", "--scheme", "mrc", "--n", "1", "--rho1-db", "10", "--rho-i-db", "20"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let line = text.lines().nth(1).unwrap();
    let theta: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    // sqrt(X)/(1 + sqrt(X)) with X = ln(10)/(0.8 * 9).
    let x = (10f64.ln()) / (0.8 * 9.0);
    let want = x.sqrt() / (1.0 + x.sqrt());
    assert!((theta - want).abs() < 1e-8, "theta {theta} vs {want}");
}

#[test]
fn theta_scan_appends_table() {
    let out = run(&[
        "theta",
        "--scheme",
        "zf",
        "--n",
        "2",
        "--rho1-db",
        "25",
        "--scan",
        "--grid-points",
        "13",
        "--mc-samples",
        "20000",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("scheme,theta_star,residual,bracket"));
    assert!(text.contains("param,scheme,quantity,value,stderr"));
    assert_eq!(text.matches(",outage_mc,").count(), 13);
    assert!(text.contains(",theta_mc_argmin,"));
}

#[test]
fn exit_codes() {
    // Usage error.
    let out = run(&["outage", "--scheme", "warp-drive"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["outage", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    // Degenerate parameters without --nudge.
    let out = run(&[
        "outage", "--scheme", "mrc", "--rho1-db", "9.5", "--mc-samples", "2000",
    ]);
    assert_eq!(out.status.code(), Some(3));
    // Same point with --nudge succeeds.
    let out = run(&[
        "outage", "--scheme", "mrc", "--rho1-db", "9.5", "--mc-samples", "2000", "--nudge",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = std::env::temp_dir().join(format!("ehrelay-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.conf");
    std::fs::write(
        &cfg,
        "scheme = zf\nsweep = rho1_db 10,20\nmc_samples = 2000\nrho_i_db = 5\nn = 4\n",
    )
    .unwrap();
    let base = run(&["outage", "--config", cfg.to_str().unwrap()]);
    assert!(base.status.success());
    let text = stdout(&base);
    assert_eq!(text.lines().count(), 1 + 2 * 3);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(1) == Some("zf")));
    // A flag overrides the config's scheme choice.
    let over = run(&[
        "outage",
        "--config",
        cfg.to_str().unwrap(),
        "--scheme",
        "mrc",
    ]);
    let text = stdout(&over);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(1) == Some("mrc")));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn out_file_and_determinism() {
    let dir = std::env::temp_dir().join(format!("ehrelay-out-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sweep.csv");
    let args = [
        "outage",
        "--scheme",
        "mmse,mrc",
        "--sweep",
        "theta",
        "0.2:0.2:0.8",
        "--rho1-db",
        "15",
        "--mc-samples",
        "50000",
        "--seed",
        "9",
        "--out",
    ];
    let mut with_out: Vec<&str> = args.to_vec();
    let path_str = path.to_str().unwrap();
    with_out.push(path_str);
    let run1 = run(&with_out);
    assert!(run1.status.success());
    assert!(stdout(&run1).is_empty());
    let first = std::fs::read(&path).unwrap();
    let run2 = run(&with_out);
    assert!(run2.status.success());
    let second = std::fs::read(&path).unwrap();
    assert_eq!(first, second, "CSV not byte-identical across runs");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn validate_quick_contract() {
    let out = run(&["validate", "--quick"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("check,scheme,detail,value,reference,status"));
    assert!(text.lines().skip(1).all(|l| l.ends_with("PASS")));
}
