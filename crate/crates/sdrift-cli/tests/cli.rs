//! End-to-end tests that drive the compiled `sdrift` binary: config
//! handling, exit codes, CSV schemas, reproducibility, and the tilt-mc to
//! tailfit round trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use singular_drift::analytic::{bessel_like_survival, gamma_rate};
use tempfile::TempDir;

fn sdrift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdrift"))
        .args(args)
        .output()
        .expect("binary should start")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout_of(output: &Output) -> String {
    assert!(
        output.status.success(),
        "expected success, got {:?}\nstderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).unwrap()
}

#[test]
fn rate_prints_four_significant_digits_and_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rate.csv");
    let cfg = write_config(
        dir.path(),
        "rate.ini",
        &format!(
            "# decay rate of the survival probability\n\
             drift.p = 0.5\n\
             drift.beta = 1\n\
             run.out = {}\n",
            out.display()
        ),
    );
    let run = sdrift(&["rate", cfg.to_str().unwrap()]);
    let summary = stdout_of(&run);
    assert!(summary.contains("2.554"), "summary was: {summary}");
    assert!(summary.contains("rate.csv"), "summary was: {summary}");
    let first = std::fs::read(&out).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.starts_with("p,beta,rate\n"), "csv was: {text}");
    // 17 significant digits round-trip the f64 exactly.
    let rate: f64 = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(rate, gamma_rate(0.5, 1.0).unwrap(), "csv was: {text}");

    let rerun = sdrift(&["rate", cfg.to_str().unwrap()]);
    stdout_of(&rerun);
    assert_eq!(std::fs::read(&out).unwrap(), first, "rerun must be byte-identical");
}

#[test]
fn missing_key_exits_with_config_code_and_names_the_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.ini", "drift.p = 0.5\nrun.out = x.csv\n");
    let run = sdrift(&["rate", cfg.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    let stderr = String::from_utf8(run.stderr).unwrap();
    assert!(stderr.contains("drift.beta"), "stderr was: {stderr}");
}

#[test]
fn unknown_key_exits_with_config_code_and_names_the_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "extra.ini",
        "drift.p = 0.5\ndrift.beta = 1\ndrift.bogus = 7\nrun.out = x.csv\n",
    );
    let run = sdrift(&["rate", cfg.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    let stderr = String::from_utf8(run.stderr).unwrap();
    assert!(stderr.contains("drift.bogus"), "stderr was: {stderr}");
    assert!(!dir.path().join("x.csv").exists(), "no artifact on failure");
}

#[test]
fn pinned_subcommand_tag_must_match_the_invocation() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "pinned.ini",
        "run.subcommand = varmin\ndrift.p = 0.5\ndrift.beta = 1\nrun.out = x.csv\n",
    );
    let run = sdrift(&["rate", cfg.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    let stderr = String::from_utf8(run.stderr).unwrap();
    assert!(stderr.contains("varmin"), "stderr was: {stderr}");
}

#[test]
fn domain_error_exits_with_its_own_code() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "domain.ini",
        "drift.p = 1.5\ndrift.beta = 1\nrun.out = x.csv\n",
    );
    let run = sdrift(&["rate", cfg.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(3));
}

#[test]
fn survival_closed_matches_the_library_value() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("closed.csv");
    let cfg = write_config(
        dir.path(),
        "closed.ini",
        &format!(
            "drift.beta = 0.5\n\
             drift.p = 1\n\
             run.x0 = 1\n\
             run.t = 1\n\
             run.out = {}\n",
            out.display()
        ),
    );
    stdout_of(&sdrift(&["survival-closed", cfg.to_str().unwrap()]));
    let text = std::fs::read_to_string(&out).unwrap();
    let row = text.lines().nth(1).unwrap();
    let prob: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    let expected = bessel_like_survival(0.5, 1.0, 1.0).unwrap();
    assert!((prob - expected).abs() < 1e-15, "{prob} vs {expected}");
}

#[test]
fn survival_mc_is_reproducible_and_seed_override_changes_the_sample() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("mc.csv");
    let cfg = write_config(
        dir.path(),
        "mc.ini",
        &format!(
            "drift.kind = pure-power\n\
             drift.beta = 1\n\
             drift.p = 0.5\n\
             sim.horizon = 0.5\n\
             sim.dt_max = 1e-2\n\
             sim.n_paths = 2000\n\
             sim.seed = 11\n\
             run.x0 = 1\n\
             run.out = {}\n",
            out.display()
        ),
    );
    stdout_of(&sdrift(&["survival-mc", cfg.to_str().unwrap()]));
    let first = std::fs::read(&out).unwrap();
    assert!(String::from_utf8_lossy(&first)
        .starts_with("x0,horizon,estimate,stderr,n_paths,capped_fraction\n"));

    stdout_of(&sdrift(&["survival-mc", cfg.to_str().unwrap()]));
    assert_eq!(std::fs::read(&out).unwrap(), first, "same seed, same bytes");

    // More workers, same bytes: per-path random streams make the estimate
    // independent of the pool size.
    stdout_of(&sdrift(&["survival-mc", cfg.to_str().unwrap(), "--workers", "3"]));
    assert_eq!(std::fs::read(&out).unwrap(), first, "worker count must not matter");

    stdout_of(&sdrift(&["survival-mc", cfg.to_str().unwrap(), "--seed", "12"]));
    assert_ne!(std::fs::read(&out).unwrap(), first, "new seed, new sample");
}

#[test]
fn out_flag_overrides_the_config_path() {
    let dir = TempDir::new().unwrap();
    let cfg_out = dir.path().join("from-config.csv");
    let flag_out = dir.path().join("from-flag.csv");
    let cfg = write_config(
        dir.path(),
        "rate.ini",
        &format!(
            "drift.p = 0.5\ndrift.beta = 1\nrun.out = {}\n",
            cfg_out.display()
        ),
    );
    stdout_of(&sdrift(&[
        "rate",
        cfg.to_str().unwrap(),
        "--out",
        flag_out.to_str().unwrap(),
    ]));
    assert!(flag_out.exists());
    assert!(!cfg_out.exists());
}

#[test]
fn tilt_mc_output_feeds_tailfit_with_a_pinned_exponent() {
    let dir = TempDir::new().unwrap();
    let tilt_out = dir.path().join("tilt.csv");
    let tilt_cfg = write_config(
        dir.path(),
        "tilt.ini",
        &format!(
            "drift.kind = pure-power\n\
             drift.beta = 1\n\
             drift.p = 0.5\n\
             sim.dt_max = 1e-2\n\
             sim.n_paths = 2000\n\
             sim.seed = 5\n\
             run.x0 = 1\n\
             run.t_grid = 1, 2, 3\n\
             run.tilt_n = 32\n\
             run.out = {}\n",
            tilt_out.display()
        ),
    );
    let summary = stdout_of(&sdrift(&["tilt-mc", tilt_cfg.to_str().unwrap()]));
    assert!(summary.contains("3 horizons"), "summary was: {summary}");
    let tilt_text = std::fs::read_to_string(&tilt_out).unwrap();
    assert!(tilt_text.starts_with("t,estimate,stderr,n_paths\n"));
    assert_eq!(tilt_text.lines().count(), 4);

    let fit_out = dir.path().join("fit.csv");
    let fit_cfg = write_config(
        dir.path(),
        "fit.ini",
        &format!(
            "run.input = {}\nrun.p_hint = 0.5\nrun.out = {}\n",
            tilt_out.display(),
            fit_out.display()
        ),
    );
    let summary = stdout_of(&sdrift(&["tailfit", fit_cfg.to_str().unwrap()]));
    assert!(summary.contains("tail fit"), "summary was: {summary}");
    let fit_text = std::fs::read_to_string(&fit_out).unwrap();
    assert!(fit_text.starts_with("exponent,rate,residual_rms,points_used\n"));
    let row: Vec<&str> = fit_text.lines().nth(1).unwrap().split(',').collect();
    let exponent: f64 = row[0].parse().unwrap();
    let rate: f64 = row[1].parse().unwrap();
    let points: usize = row[3].parse().unwrap();
    // p_hint = 1/2 pins the time exponent to (1-p)/(1+p) = 1/3.
    assert!((exponent - 1.0 / 3.0).abs() < 1e-12, "exponent {exponent}");
    assert!(rate > 0.0, "rate {rate}");
    assert_eq!(points, 3);
}

#[test]
fn varmin_reports_the_gap_to_the_rate_constant_and_dumps_the_path() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("varmin.csv");
    let cfg = write_config(
        dir.path(),
        "varmin.ini",
        &format!(
            "drift.p = 0.5\n\
             drift.beta = 1\n\
             run.n = 64\n\
             run.tol = 1e-8\n\
             run.max_iters = 20000\n\
             run.out = {}\n",
            out.display()
        ),
    );
    let summary = stdout_of(&sdrift(&["varmin", cfg.to_str().unwrap()]));
    assert!(summary.contains("relative gap"), "summary was: {summary}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("u,omega\n"));
    // 64 cells means 65 nodes, plus the header row.
    assert_eq!(text.lines().count(), 66);
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert_eq!(last[0].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn two_sided_reports_estimate_against_the_scale_identity() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("exit.csv");
    let cfg = write_config(
        dir.path(),
        "exit.ini",
        &format!(
            "drift.kind = pure-power\n\
             drift.beta = 1\n\
             drift.p = 0.5\n\
             sim.horizon = 20\n\
             sim.dt_max = 1e-2\n\
             sim.n_paths = 2000\n\
             run.x0 = 1.5\n\
             run.lower = 0.5\n\
             run.upper = 3\n\
             run.out = {}\n",
            out.display()
        ),
    );
    stdout_of(&sdrift(&["two-sided", cfg.to_str().unwrap()]));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("lower,upper,x0,estimate,stderr,exact\n"));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let estimate: f64 = row[3].parse().unwrap();
    let exact: f64 = row[5].parse().unwrap();
    assert!(estimate > 0.0 && estimate < 1.0);
    assert!(exact > 0.0 && exact < 1.0);
}

#[test]
fn fk_check_writes_one_row_per_method() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("fk.csv");
    let cfg = write_config(
        dir.path(),
        "fk.ini",
        &format!(
            "drift.kind = piecewise\n\
             drift.alpha = 1\n\
             drift.q = 0.5\n\
             drift.beta = 1\n\
             drift.p = 0.5\n\
             drift.m1 = 0.5\n\
             drift.m2 = 2\n\
             sim.horizon = 0.5\n\
             sim.dt_max = 1e-2\n\
             sim.n_paths = 2000\n\
             run.x0 = 1\n\
             run.out = {}\n",
            out.display()
        ),
    );
    let summary = stdout_of(&sdrift(&["fk-check", cfg.to_str().unwrap()]));
    assert!(summary.contains("feynman-kac"), "summary was: {summary}");
    let text = std::fs::read_to_string(&out).unwrap();
    let methods: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|line| line.split(',').next().unwrap())
        .collect();
    assert_eq!(methods, vec!["direct", "feynman-kac"]);
}

#[test]
fn compare_emits_one_row_per_step_size() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("compare.csv");
    let cfg = write_config(
        dir.path(),
        "compare.ini",
        &format!(
            "drift.kind = slowly-varying\n\
             drift.alpha = -1.5\n\
             drift.beta = 1\n\
             drift.q = 0.5\n\
             drift.p = 0.5\n\
             drift.ell1 = one\n\
             drift.ell2 = one\n\
             drift.m1 = 0.5\n\
             drift.m2 = 2\n\
             sim.horizon = 1\n\
             sim.n_paths = 500\n\
             sim.bridge = false\n\
             sim.absorb_at = 1e-4\n\
             run.x0 = 0.005\n\
             run.delta = 0.05\n\
             run.eps = 0.25\n\
             run.dts = 1e-2, 2e-3\n\
             run.out = {}\n",
            out.display()
        ),
    );
    let summary = stdout_of(&sdrift(&["compare", cfg.to_str().unwrap()]));
    assert!(summary.contains("violation fractions"), "summary was: {summary}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("dt,violations,compared_steps,violation_fraction,max_gap,n_paths\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn potter_reports_the_envelope_verdict() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("potter.csv");
    let cfg = write_config(
        dir.path(),
        "potter.ini",
        &format!(
            "run.ell = log-power\n\
             run.a = 2\n\
             run.delta = 0.1\n\
             run.m = 10\n\
             run.pairs = 500\n\
             run.out = {}\n",
            out.display()
        ),
    );
    let summary = stdout_of(&sdrift(&["potter", cfg.to_str().unwrap()]));
    assert!(summary.contains("holds = false"), "summary was: {summary}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("holds,worst_ratio,grid_min,grid_max,grid_points\n"));
    assert!(text.lines().nth(1).unwrap().starts_with("false,"));
}
