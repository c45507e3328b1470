//! Monte Carlo estimators built on the shared engine: direct survival
//! frequency, two-sided exit frequency, and the Feynman–Kac weighted
//! estimator that reweights driftless paths by
//! exp(∫₀ᵗ V(B_s) ds) · h(B_t)/h(x₀) with the harmonic pair (h, V) of the
//! drift. Frequency estimators report the binomial standard error
//! √(p̂(1−p̂)/n); weighted estimators report sample-SD/√n.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::engine::{adaptive_dt, bridge_crossing_prob, capped_drift, run_paths, SimConfig};
use crate::analytic::h_transform;
use crate::drift::DriftSpec;
use crate::error::{Error, Result};

/// A Monte Carlo estimate with its uncertainty and engine diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n_paths: usize,
    /// Fraction of all Euler steps whose drift increment was capped;
    /// a nonzero value flags configurations too coarse for the drift.
    pub capped_fraction: f64,
}

fn capped_fraction(capped: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        capped as f64 / total as f64
    }
}

/// Mean and sample-SD/√n standard error of per-path contributions.
fn weighted_estimate(contributions: &[f64], capped: usize, steps: usize) -> Estimate {
    let n = contributions.len();
    let nf = n as f64;
    let mean = contributions.iter().sum::<f64>() / nf;
    let var = if n > 1 {
        contributions
            .iter()
            .map(|w| (w - mean) * (w - mean))
            .sum::<f64>()
            / (nf - 1.0)
    } else {
        0.0
    };
    Estimate {
        value: mean,
        stderr: (var / nf).sqrt(),
        n_paths: n,
        capped_fraction: capped_fraction(capped, steps),
    }
}

/// P(T_absorb > horizon | X_0 = x0) by direct path counting.
pub fn survival_probability(spec: &DriftSpec, config: &SimConfig, x0: f64) -> Result<Estimate> {
    let records = run_paths(spec, config, x0, false)?;
    let n = records.len();
    let survivors = records.iter().filter(|r| r.survived()).count();
    let p = survivors as f64 / n as f64;
    let capped: usize = records.iter().map(|r| r.capped_steps).sum();
    let steps: usize = records.iter().map(|r| r.steps).sum();
    Ok(Estimate {
        value: p,
        stderr: (p * (1.0 - p) / n as f64).sqrt(),
        n_paths: n,
        capped_fraction: capped_fraction(capped, steps),
    })
}

/// P(exit through `upper` before `lower` | X_0 = x0) by path counting.
/// Both boundaries use the bridge sub-step test when enabled (checked
/// lower-first with independent uniforms). Paths still inside at the
/// horizon count as lower exits; choose horizons generously.
pub fn two_sided_exit_mc(
    spec: &DriftSpec,
    config: &SimConfig,
    x0: f64,
    lower: f64,
    upper: f64,
) -> Result<Estimate> {
    config.validate()?;
    if !(lower >= 0.0) || !(x0 > lower) || !(upper > x0) || !upper.is_finite() {
        return Err(Error::Domain {
            arg: "x0",
            value: x0,
            constraint: "two-sided exit requires 0 <= lower < x0 < upper < inf",
        });
    }
    spec.eval(x0)?;
    let results: Vec<(bool, usize, usize)> = (0..config.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            let mut x = x0;
            let mut t = 0.0f64;
            let mut steps = 0usize;
            let mut capped_steps = 0usize;
            loop {
                let remaining = config.horizon - t;
                if remaining <= 0.0 {
                    return (false, steps, capped_steps);
                }
                // The quadratic step rule guards the singular origin;
                // nothing is singular at the upper boundary.
                let dt = adaptive_dt(x, remaining, config);
                let z: f64 = rng.sample(StandardNormal);
                let (drift, capped) = capped_drift(spec.eval_unchecked(x), dt);
                if capped {
                    capped_steps += 1;
                }
                let x_new = x + drift + dt.sqrt() * z;
                t += dt;
                steps += 1;
                if x_new <= lower {
                    return (false, steps, capped_steps);
                }
                if x_new >= upper {
                    return (true, steps, capped_steps);
                }
                if config.bridge {
                    let u_low: f64 = rng.gen();
                    let u_up: f64 = rng.gen();
                    if u_low < bridge_crossing_prob(x, x_new, lower, dt) {
                        return (false, steps, capped_steps);
                    }
                    if u_up < bridge_crossing_prob(upper - x, upper - x_new, 0.0, dt) {
                        return (true, steps, capped_steps);
                    }
                }
                x = x_new;
            }
        })
        .collect();
    let n = results.len();
    let hits = results.iter().filter(|r| r.0).count();
    let p = hits as f64 / n as f64;
    let capped: usize = results.iter().map(|r| r.2).sum();
    let steps: usize = results.iter().map(|r| r.1).sum();
    Ok(Estimate {
        value: p,
        stderr: (p * (1.0 - p) / n as f64).sqrt(),
        n_paths: n,
        capped_fraction: capped_fraction(capped, steps),
    })
}

/// Survival probability via the Feynman–Kac identity: simulate driftless
/// Brownian paths with the usual absorption rules and weight each
/// survivor by exp(∫₀ᵗ V(B_s) ds) · h(B_t)/h(x₀), trapezoid rule along
/// the grid. Requires a C¹ drift (the potential contains b′).
pub fn fk_survival(spec: &DriftSpec, config: &SimConfig, x0: f64) -> Result<Estimate> {
    config.validate()?;
    if !(x0 > config.absorb_at) || !x0.is_finite() {
        return Err(Error::Domain {
            arg: "x0",
            value: x0,
            constraint: "start must lie strictly above the absorption level",
        });
    }
    let ht = h_transform(spec)?;
    let log_h_x0 = ht.log_h(x0);
    let contributions: Vec<f64> = (0..config.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            let mut x = x0;
            let mut t = 0.0f64;
            let mut v_old = ht.v(x);
            let mut integral = 0.0f64;
            loop {
                let remaining = config.horizon - t;
                if remaining <= 0.0 {
                    return (integral + ht.log_h(x) - log_h_x0).exp();
                }
                let dt = adaptive_dt(x, remaining, config);
                let z: f64 = rng.sample(StandardNormal);
                let x_new = x + dt.sqrt() * z;
                t += dt;
                if x_new <= config.absorb_at {
                    return 0.0;
                }
                if config.bridge {
                    let u: f64 = rng.gen();
                    if u < bridge_crossing_prob(x, x_new, config.absorb_at, dt) {
                        return 0.0;
                    }
                }
                let v_new = ht.v(x_new);
                integral += 0.5 * (v_old + v_new) * dt;
                v_old = v_new;
                x = x_new;
            }
        })
        .collect();
    // Driftless paths take no drift increment, so nothing can cap.
    Ok(weighted_estimate(&contributions, 0, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{bessel_like_survival, bm_survival, two_sided_exit_prob};
    use crate::drift::MidSegment;

    #[test]
    fn survival_matches_brownian_motion_for_negligible_drift() {
        let spec = DriftSpec::pure_power(1e-12, 0.5).unwrap();
        let config = SimConfig {
            n_paths: 4000,
            ..SimConfig::default()
        };
        let est = survival_probability(&spec, &config, 1.0).unwrap();
        let exact = bm_survival(1.0, 1.0).unwrap();
        assert!(
            (est.value - exact).abs() <= 3.5 * est.stderr + 0.01,
            "MC {v} vs exact {exact} (stderr {s})",
            v = est.value,
            s = est.stderr
        );
        assert!(est.stderr > 0.0 && est.n_paths == 4000);
        assert_eq!(est.capped_fraction, 0.0);
    }

    #[test]
    fn survival_matches_the_inverse_linear_drift_law() {
        // b = −β/x has the closed-form survival law used as an
        // independent oracle for the engine's handling of a singular
        // drift.
        let spec = DriftSpec::pure_power(0.25, 1.0).unwrap();
        let config = SimConfig {
            n_paths: 4000,
            ..SimConfig::default()
        };
        let est = survival_probability(&spec, &config, 1.0).unwrap();
        let exact = bessel_like_survival(0.25, 1.0, 1.0).unwrap();
        assert!(
            (est.value - exact).abs() <= 3.5 * est.stderr + 0.01,
            "MC {v} vs exact {exact}",
            v = est.value
        );
    }

    #[test]
    fn two_sided_exit_matches_the_scale_prediction() {
        let spec = DriftSpec::piecewise_power(
            1.0,
            0.5,
            1.0,
            0.5,
            1.0,
            2.0,
            MidSegment::LinearBridge,
        )
        .unwrap();
        let config = SimConfig {
            n_paths: 3000,
            horizon: 50.0,
            ..SimConfig::default()
        };
        let est = two_sided_exit_mc(&spec, &config, 1.2, 0.4, 2.5).unwrap();
        let exact = two_sided_exit_prob(&spec, 0.4, 1.2, 2.5).unwrap();
        assert!(
            (est.value - exact).abs() <= 3.5 * est.stderr + 0.01,
            "MC {v} vs scale prediction {exact}",
            v = est.value
        );
    }

    #[test]
    fn two_sided_exit_nearly_linear_without_drift() {
        let spec = DriftSpec::pure_power(1e-12, 0.5).unwrap();
        let config = SimConfig {
            n_paths: 3000,
            horizon: 50.0,
            ..SimConfig::default()
        };
        let est = two_sided_exit_mc(&spec, &config, 1.0, 0.5, 2.0).unwrap();
        assert!(
            (est.value - 1.0 / 3.0).abs() <= 3.5 * est.stderr + 0.01,
            "driftless exit {v} should be ~1/3",
            v = est.value
        );
    }

    #[test]
    fn fk_estimator_agrees_with_direct_counting() {
        let spec = DriftSpec::piecewise_power(
            1.0,
            0.5,
            1.0,
            0.5,
            1.0,
            2.0,
            MidSegment::SmoothBridge,
        )
        .unwrap();
        let config = SimConfig {
            n_paths: 4000,
            horizon: 0.5,
            ..SimConfig::default()
        };
        let direct = survival_probability(&spec, &config, 1.5).unwrap();
        let weighted = fk_survival(&spec, &config, 1.5).unwrap();
        assert!(
            (direct.value - weighted.value).abs()
                <= 3.5 * (direct.stderr + weighted.stderr) + 0.01,
            "direct {d} vs weighted {w}",
            d = direct.value,
            w = weighted.value
        );
        assert!(weighted.stderr > 0.0);
    }

    #[test]
    fn fk_estimator_rejects_kinked_drifts() {
        let spec = DriftSpec::piecewise_power(
            1.0,
            0.5,
            1.0,
            0.5,
            1.0,
            2.0,
            MidSegment::Constant(0.0),
        )
        .unwrap();
        assert!(matches!(
            fk_survival(&spec, &SimConfig::default(), 1.0),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn estimator_argument_validation() {
        let spec = DriftSpec::pure_power(1.0, 0.5).unwrap();
        assert!(two_sided_exit_mc(&spec, &SimConfig::default(), 1.0, 1.5, 2.0).is_err());
        assert!(two_sided_exit_mc(&spec, &SimConfig::default(), 3.0, 0.5, 2.0).is_err());
        assert!(survival_probability(&spec, &SimConfig::default(), -1.0).is_err());
    }
}
