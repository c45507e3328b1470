//! Subcommand implementations: each translates a parsed [`Config`] into
//! library calls, writes one CSV artifact, and returns the one-line summary
//! the binary prints.
//!
//! Conventions shared by every subcommand:
//! - all config keys are consumed, and unknown keys rejected, before any
//!   expensive computation starts;
//! - every float lands in the CSV as `{:.16e}` (17 significant digits), so
//!   reruns with identical configs and seeds are byte-identical;
//! - summaries show four significant digits and name the artifact path.

use std::path::Path;

use singular_drift::analytic::{bessel_like_survival, bm_survival, gamma_rate, two_sided_exit_prob};
use singular_drift::drift::{
    potter_check, sandwich_drifts, CoefFn, DriftSpec, MidSegment, SlowVaryFn, VaryDomain,
};
use singular_drift::mc::{
    coupled_compare, fit_tail_exponent, fk_survival, survival_probability, tilted_survival,
    two_sided_exit_mc, SimConfig,
};
use singular_drift::variational::{minimize_F, optimal_tilt};

use crate::config::Config;
use crate::error::CliError;

/// Route a subcommand name to its implementation.
pub fn dispatch(
    name: &str,
    cfg: &Config,
    seed: Option<u64>,
    workers: Option<usize>,
    out: &Path,
) -> Result<String, CliError> {
    match name {
        "rate" => rate(cfg, out),
        "survival-closed" => survival_closed(cfg, out),
        "survival-mc" => survival_mc(cfg, seed, workers, out),
        "fk-check" => fk_check(cfg, seed, workers, out),
        "two-sided" => two_sided(cfg, seed, workers, out),
        "tilt-mc" => tilt_mc(cfg, seed, workers, out),
        "varmin" => varmin(cfg, out),
        "compare" => compare(cfg, seed, workers, out),
        "tailfit" => tailfit(cfg, out),
        "potter" => potter(cfg, out),
        other => unreachable!("unrouted subcommand {other}"),
    }
}

/// CSV float format: 17 significant digits round-trip an f64 exactly.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Four significant digits for summary lines.
fn sig4(x: f64) -> String {
    format!("{x:.3e}")
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut text = String::with_capacity(
        header.len() + 1 + rows.iter().map(|row| row.len() + 1).sum::<usize>(),
    );
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    std::fs::write(path, text)
        .map_err(|err| CliError::Io(format!("cannot write {}: {err}", path.display())))
}

/// Run `op` on a dedicated pool when a worker count was requested; the
/// estimators assign one random stream per path, so the result does not
/// depend on the count.
fn with_workers<T: Send>(
    workers: Option<usize>,
    op: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match workers {
        None => Ok(op()),
        Some(0) => Err(CliError::Config("key `run.workers`: must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|err| CliError::Config(format!("cannot build a {n}-thread pool: {err}")))?;
            Ok(pool.install(op))
        }
    }
}

/// Assemble the drift coefficient from the `drift.*` keys.
fn drift_from_config(cfg: &Config) -> Result<DriftSpec, CliError> {
    let kind = cfg.require("drift.kind")?;
    match kind {
        "pure-power" => {
            let beta = cfg.require_f64("drift.beta")?;
            let p = cfg.require_f64("drift.p")?;
            Ok(DriftSpec::pure_power(beta, p)?)
        }
        "piecewise" => {
            let alpha = cfg.require_f64("drift.alpha")?;
            let q = cfg.require_f64("drift.q")?;
            let beta = cfg.require_f64("drift.beta")?;
            let p = cfg.require_f64("drift.p")?;
            let m1 = cfg.require_f64("drift.m1")?;
            let m2 = cfg.require_f64("drift.m2")?;
            let mid = match cfg.get("drift.mid").unwrap_or("bridge") {
                "bridge" => MidSegment::SmoothBridge,
                "linear" => MidSegment::LinearBridge,
                "constant" => MidSegment::Constant(cfg.require_f64("drift.mid_value")?),
                other => {
                    return Err(CliError::Config(format!(
                        "key `drift.mid`: unknown middle segment `{other}` \
                         (expected bridge, linear, or constant)"
                    )))
                }
            };
            Ok(DriftSpec::piecewise_power(alpha, q, beta, p, m1, m2, mid)?)
        }
        "slowly-varying" => {
            let alpha = cfg.require_f64("drift.alpha")?;
            let beta = cfg.require_f64("drift.beta")?;
            let q = cfg.require_f64("drift.q")?;
            let p = cfg.require_f64("drift.p")?;
            let ell1_kind = cfg.get("drift.ell1").unwrap_or("one").to_string();
            let ell2_kind = cfg.get("drift.ell2").unwrap_or("one").to_string();
            let ell1 = slow_vary_from_kind(cfg, "drift.ell1", &ell1_kind, VaryDomain::AtZero)?;
            let ell2 = slow_vary_from_kind(cfg, "drift.ell2", &ell2_kind, VaryDomain::AtInfinity)?;
            let m1 = cfg.require_f64("drift.m1")?;
            let m2 = cfg.require_f64("drift.m2")?;
            Ok(DriftSpec::slowly_varying(
                CoefFn::Constant(alpha),
                CoefFn::Constant(beta),
                q,
                p,
                ell1,
                ell2,
                m1,
                m2,
            )?)
        }
        other => Err(CliError::Config(format!(
            "key `drift.kind`: unknown drift kind `{other}` \
             (expected pure-power, piecewise, or slowly-varying)"
        ))),
    }
}

/// Build a slowly varying factor named by `kind`; `<key>_r` supplies the
/// log power when applicable.
fn slow_vary_from_kind(
    cfg: &Config,
    key: &str,
    kind: &str,
    domain: VaryDomain,
) -> Result<SlowVaryFn, CliError> {
    match kind {
        "one" => Ok(SlowVaryFn::one(domain)),
        "log-power" => {
            let r = cfg.get_f64(&format!("{key}_r"))?.unwrap_or(1.0);
            Ok(SlowVaryFn::log_power(r, domain))
        }
        "iter-log" => Ok(SlowVaryFn::iter_log(domain)),
        other => Err(CliError::Config(format!(
            "key `{key}`: unknown slowly varying kind `{other}` \
             (expected one, log-power, or iter-log)"
        ))),
    }
}

/// Assemble the engine settings from the `sim.*` keys over the defaults.
fn sim_from_config(cfg: &Config, seed_override: Option<u64>) -> Result<SimConfig, CliError> {
    let mut sim = SimConfig::default();
    if let Some(v) = cfg.get_f64("sim.horizon")? {
        sim.horizon = v;
    }
    if let Some(v) = cfg.get_f64("sim.dt_max")? {
        sim.dt_max = v;
    }
    if let Some(v) = cfg.get_f64("sim.dt_floor")? {
        sim.dt_floor = v;
    }
    if let Some(v) = cfg.get_f64("sim.absorb_at")? {
        sim.absorb_at = v;
    }
    if let Some(v) = cfg.get_bool("sim.bridge")? {
        sim.bridge = v;
    }
    if let Some(v) = cfg.get_usize("sim.n_paths")? {
        sim.n_paths = v;
    }
    if let Some(v) = cfg.get_u64("sim.seed")? {
        sim.seed = v;
    }
    if let Some(seed) = seed_override {
        sim.seed = seed;
    }
    Ok(sim)
}

fn rate(cfg: &Config, out: &Path) -> Result<String, CliError> {
    let p = cfg.require_f64("drift.p")?;
    let beta = cfg.require_f64("drift.beta")?;
    cfg.reject_unused()?;
    let rate = gamma_rate(p, beta)?;
    write_csv(
        out,
        "p,beta,rate",
        &[format!("{},{},{}", num(p), num(beta), num(rate))],
    )?;
    Ok(format!(
        "rate constant {r} for p = {p}, beta = {beta}; wrote {o}",
        r = sig4(rate),
        o = out.display()
    ))
}

fn survival_closed(cfg: &Config, out: &Path) -> Result<String, CliError> {
    let beta = cfg.require_f64("drift.beta")?;
    let p = cfg.require_f64("drift.p")?;
    let x0 = cfg.require_f64("run.x0")?;
    let t = cfg.require_f64("run.t")?;
    cfg.reject_unused()?;
    let prob = if beta == 0.0 {
        bm_survival(x0, t)?
    } else if p == 1.0 {
        bessel_like_survival(beta, x0, t)?
    } else {
        return Err(CliError::Config(
            "closed-form survival needs beta = 0 (driftless) or p = 1 (inverse-linear drift)"
                .into(),
        ));
    };
    write_csv(
        out,
        "x0,t,probability",
        &[format!("{},{},{}", num(x0), num(t), num(prob))],
    )?;
    Ok(format!(
        "survival probability {s} at x0 = {x0}, t = {t}; wrote {o}",
        s = sig4(prob),
        o = out.display()
    ))
}

fn survival_mc(
    cfg: &Config,
    seed: Option<u64>,
    workers: Option<usize>,
    out: &Path,
) -> Result<String, CliError> {
    let spec = drift_from_config(cfg)?;
    let sim = sim_from_config(cfg, seed)?;
    let x0 = cfg.require_f64("run.x0")?;
    cfg.reject_unused()?;
    let est = with_workers(workers, || survival_probability(&spec, &sim, x0))??;
    write_csv(
        out,
        "x0,horizon,estimate,stderr,n_paths,capped_fraction",
        &[format!(
            "{},{},{},{},{},{}",
            num(x0),
            num(sim.horizon),
            num(est.value),
            num(est.stderr),
            est.n_paths,
            num(est.capped_fraction)
        )],
    )?;
    Ok(format!(
        "survival estimate {v} (stderr {s}) from {n} paths; wrote {o}",
        v = sig4(est.value),
        s = sig4(est.stderr),
        n = est.n_paths,
        o = out.display()
    ))
}

fn fk_check(
    cfg: &Config,
    seed: Option<u64>,
    workers: Option<usize>,
    out: &Path,
) -> Result<String, CliError> {
    let spec = drift_from_config(cfg)?;
    let sim = sim_from_config(cfg, seed)?;
    let x0 = cfg.require_f64("run.x0")?;
    cfg.reject_unused()?;
    let (direct, weighted) = with_workers(workers, || -> singular_drift::Result<_> {
        Ok((
            survival_probability(&spec, &sim, x0)?,
            fk_survival(&spec, &sim, x0)?,
        ))
    })??;
    let dev = (direct.value - weighted.value).abs();
    let combined = (direct.stderr.powi(2) + weighted.stderr.powi(2)).sqrt();
    write_csv(
        out,
        "method,estimate,stderr,n_paths,capped_fraction",
        &[
            format!(
                "direct,{},{},{},{}",
                num(direct.value),
                num(direct.stderr),
                direct.n_paths,
                num(direct.capped_fraction)
            ),
            format!(
                "feynman-kac,{},{},{},{}",
                num(weighted.value),
                num(weighted.stderr),
                weighted.n_paths,
                num(weighted.capped_fraction)
            ),
        ],
    )?;
    Ok(format!(
        "direct {d} vs feynman-kac {w}: deviation {x} with combined stderr {c}; wrote {o}",
        d = sig4(direct.value),
        w = sig4(weighted.value),
        x = sig4(dev),
        c = sig4(combined),
        o = out.display()
    ))
}

fn two_sided(
    cfg: &Config,
    seed: Option<u64>,
    workers: Option<usize>,
    out: &Path,
) -> Result<String, CliError> {
    let spec = drift_from_config(cfg)?;
    let sim = sim_from_config(cfg, seed)?;
    let x0 = cfg.require_f64("run.x0")?;
    let lower = cfg.require_f64("run.lower")?;
    let upper = cfg.require_f64("run.upper")?;
    cfg.reject_unused()?;
    let est = with_workers(workers, || two_sided_exit_mc(&spec, &sim, x0, lower, upper))??;
    let exact = two_sided_exit_prob(&spec, lower, x0, upper)?;
    write_csv(
        out,
        "lower,upper,x0,estimate,stderr,exact",
        &[format!(
            "{},{},{},{},{},{}",
            num(lower),
            num(upper),
            num(x0),
            num(est.value),
            num(est.stderr),
            num(exact)
        )],
    )?;
    Ok(format!(
        "upper-exit estimate {v} (stderr {s}) vs scale identity {e}; wrote {o}",
        v = sig4(est.value),
        s = sig4(est.stderr),
        e = sig4(exact),
        o = out.display()
    ))
}

fn tilt_mc(
    cfg: &Config,
    seed: Option<u64>,
    workers: Option<usize>,
    out: &Path,
) -> Result<String, CliError> {
    let spec = drift_from_config(cfg)?;
    // The tilt is built from the far-field decay parameters, which the
    // drift section supplies for every spec kind.
    let p = cfg.require_f64("drift.p")?;
    let beta = cfg.require_f64("drift.beta")?;
    let base = sim_from_config(cfg, seed)?;
    let x0 = cfg.require_f64("run.x0")?;
    let t_grid = cfg.require_list_f64("run.t_grid")?;
    let n_grid = cfg.get_list_usize("run.n_grid")?;
    let tilt_n = cfg.get_usize("run.tilt_n")?.unwrap_or(96);
    let offset = cfg.get_f64("run.offset")?.unwrap_or(0.05);
    cfg.reject_unused()?;
    if t_grid.is_empty() {
        return Err(CliError::Config(
            "key `run.t_grid`: needs at least one horizon".into(),
        ));
    }
    if let Some(ns) = &n_grid {
        if ns.len() != t_grid.len() {
            return Err(CliError::Config(format!(
                "key `run.n_grid`: {got} entries for {want} horizons",
                got = ns.len(),
                want = t_grid.len()
            )));
        }
    }
    let tilt = optimal_tilt(tilt_n, p, beta, offset)?;
    let estimates = with_workers(workers, || -> singular_drift::Result<Vec<_>> {
        t_grid
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let mut sim = base.clone();
                sim.horizon = t;
                if let Some(ns) = &n_grid {
                    sim.n_paths = ns[i];
                }
                tilted_survival(&spec, &sim, x0, &tilt).map(|est| (t, est))
            })
            .collect()
    })??;
    let rows: Vec<String> = estimates
        .iter()
        .map(|(t, est)| {
            format!(
                "{},{},{},{}",
                num(*t),
                num(est.value),
                num(est.stderr),
                est.n_paths
            )
        })
        .collect();
    write_csv(out, "t,estimate,stderr,n_paths", &rows)?;
    let (t_last, last) = estimates.last().expect("t_grid checked non-empty");
    Ok(format!(
        "tilted survival at {k} horizons, ending with {v} (stderr {s}) at t = {t_last}; wrote {o}",
        k = estimates.len(),
        v = sig4(last.value),
        s = sig4(last.stderr),
        o = out.display()
    ))
}

fn varmin(cfg: &Config, out: &Path) -> Result<String, CliError> {
    let p = cfg.require_f64("drift.p")?;
    let beta = cfg.require_f64("drift.beta")?;
    let n = cfg.get_usize("run.n")?.unwrap_or(512);
    let tol = cfg.get_f64("run.tol")?.unwrap_or(1e-10);
    let max_iters = cfg.get_usize("run.max_iters")?.unwrap_or(50_000);
    cfg.reject_unused()?;
    let outcome = minimize_F(n, p, beta, tol, max_iters)?;
    let rate = gamma_rate(p, beta)?;
    let gap = (outcome.value.total - rate).abs() / rate;
    let rows: Vec<String> = outcome
        .path
        .values
        .iter()
        .enumerate()
        .map(|(k, &omega)| format!("{},{}", num(k as f64 / n as f64), num(omega)))
        .collect();
    write_csv(out, "u,omega", &rows)?;
    Ok(format!(
        "variational minimum {v} after {it} iterations (converged: {c}); \
         rate constant {r}, relative gap {g}; wrote {o}",
        v = sig4(outcome.value.total),
        it = outcome.iterations,
        c = outcome.converged,
        r = sig4(rate),
        g = sig4(gap),
        o = out.display()
    ))
}

fn compare(
    cfg: &Config,
    seed: Option<u64>,
    workers: Option<usize>,
    out: &Path,
) -> Result<String, CliError> {
    let spec = drift_from_config(cfg)?;
    let delta = cfg.require_f64("run.delta")?;
    let eps = cfg.require_f64("run.eps")?;
    let base = sim_from_config(cfg, seed)?;
    let x0 = cfg.require_f64("run.x0")?;
    let dts = cfg.require_list_f64("run.dts")?;
    cfg.reject_unused()?;
    if dts.is_empty() {
        return Err(CliError::Config(
            "key `run.dts`: needs at least one step size".into(),
        ));
    }
    let (low, high) = sandwich_drifts(&spec, delta, eps)?;
    let reports = with_workers(workers, || -> singular_drift::Result<Vec<_>> {
        dts.iter()
            .map(|&dt| {
                let mut sim = base.clone();
                sim.dt_max = dt;
                coupled_compare(&low, &high, &sim, x0).map(|report| (dt, report))
            })
            .collect()
    })??;
    let rows: Vec<String> = reports
        .iter()
        .map(|(dt, report)| {
            format!(
                "{},{},{},{},{},{}",
                num(*dt),
                report.violations,
                report.compared_steps,
                num(report.violation_fraction),
                num(report.max_gap),
                report.n_paths
            )
        })
        .collect();
    write_csv(
        out,
        "dt,violations,compared_steps,violation_fraction,max_gap,n_paths",
        &rows,
    )?;
    let listing: Vec<String> = reports
        .iter()
        .map(|(dt, report)| format!("{f} at dt {d}", f = sig4(report.violation_fraction), d = sig4(*dt)))
        .collect();
    Ok(format!(
        "ordering violation fractions: {l}; wrote {o}",
        l = listing.join(", "),
        o = out.display()
    ))
}

fn tailfit(cfg: &Config, out: &Path) -> Result<String, CliError> {
    let input = cfg.require("run.input")?.to_string();
    let p_hint = cfg.get_f64("run.p_hint")?;
    cfg.reject_unused()?;
    let text = std::fs::read_to_string(&input)
        .map_err(|err| CliError::Io(format!("cannot read {input}: {err}")))?;
    let samples = parse_estimate_csv(&input, &text)?;
    let fit = fit_tail_exponent(&samples, p_hint)?;
    write_csv(
        out,
        "exponent,rate,residual_rms,points_used",
        &[format!(
            "{},{},{},{}",
            num(fit.exponent),
            num(fit.rate),
            num(fit.residual_rms),
            fit.points_used
        )],
    )?;
    Ok(format!(
        "tail fit over {k} points: exponent {e}, rate {r}, rms residual {m}; wrote {o}",
        k = fit.points_used,
        e = sig4(fit.exponent),
        r = sig4(fit.rate),
        m = sig4(fit.residual_rms),
        o = out.display()
    ))
}

/// Parse a `t,estimate,stderr[,...]` CSV (the tilt-mc schema) into
/// log-scale samples for the tail fitter. The standard error of log p is
/// stderr / p by the delta method; zero estimates produce minus-infinite
/// logs and negative ones NaN, both of which the fitter drops.
fn parse_estimate_csv(name: &str, text: &str) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Config(format!("{name}: empty input file")))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |want: &str| -> Result<usize, CliError> {
        columns.iter().position(|c| *c == want).ok_or_else(|| {
            CliError::Config(format!("{name}: input header lacks the `{want}` column"))
        })
    };
    let (ti, ei, si) = (find("t")?, find("estimate")?, find("stderr")?);
    let mut samples = Vec::new();
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let number = row + 2;
        let field = |i: usize| -> Result<f64, CliError> {
            fields
                .get(i)
                .ok_or_else(|| CliError::Config(format!("{name}: line {number}: too few columns")))?
                .parse::<f64>()
                .map_err(|err| CliError::Config(format!("{name}: line {number}: {err}")))
        };
        let (t, estimate, stderr) = (field(ti)?, field(ei)?, field(si)?);
        samples.push((t, estimate.ln(), stderr / estimate));
    }
    Ok(samples)
}

fn potter(cfg: &Config, out: &Path) -> Result<String, CliError> {
    let kind = cfg.require("run.ell")?.to_string();
    let ell = slow_vary_from_kind(cfg, "run.ell", &kind, VaryDomain::AtInfinity)?;
    let a = cfg.require_f64("run.a")?;
    let delta = cfg.require_f64("run.delta")?;
    let m = cfg.require_f64("run.m")?;
    let pairs = cfg.get_usize("run.pairs")?.unwrap_or(1000);
    cfg.reject_unused()?;
    let report = potter_check(&ell, a, delta, m, pairs)?;
    write_csv(
        out,
        "holds,worst_ratio,grid_min,grid_max,grid_points",
        &[format!(
            "{},{},{},{},{}",
            report.holds,
            num(report.worst_ratio),
            num(report.grid_min),
            num(report.grid_max),
            report.grid_points
        )],
    )?;
    Ok(format!(
        "potter envelope verdict: holds = {h} (worst ratio {w} on [{lo}, {hi}]); wrote {o}",
        h = report.holds,
        w = sig4(report.worst_ratio),
        lo = sig4(report.grid_min),
        hi = sig4(report.grid_max),
        o = out.display()
    ))
}
