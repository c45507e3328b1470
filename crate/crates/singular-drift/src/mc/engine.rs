//! The Euler–Maruyama engine: one step recipe shared by every estimator.
//!
//! ```text
//! dt   = clamp(DT_SCALE · X², dt_floor, dt_max), never past the horizon
//! X'   = X + cap(b(X)·dt) + √dt · Z,   Z ~ N(0, 1)
//! ```
//!
//! The quadratic step keeps both the singular drift increment and the
//! Feynman–Kac potential increment bounded as X → 0 (|b·dt| ≍ X^{2−q},
//! |V·dt| ≍ X^{2−2q}); the cap at ±DRIFT_CAP_SIGMAS·√dt is a stability
//! guard for coarse fixed-dt runs and its firing rate is reported, not
//! hidden. Absorption at `absorb_at` is detected on the grid and,
//! optionally, between grid points by the Brownian bridge crossing
//! probability exp(−2(X−a)(X′−a)/dt), which removes the leading
//! discretization bias of grid-only detection.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::drift::DriftSpec;
use crate::error::{Error, Result};

/// dt ≈ DT_SCALE · X² near the origin: the step shrinks quadratically so
/// singular drift increments stay bounded.
pub const DT_SCALE: f64 = 0.1;

/// Drift increments are capped at ±DRIFT_CAP_SIGMAS · √dt, i.e. at a
/// fixed number of noise standard deviations per step.
pub const DRIFT_CAP_SIGMAS: f64 = 10.0;

/// Simulation configuration shared by all Monte Carlo estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Time horizon of each path.
    pub horizon: f64,
    /// Largest admissible step.
    pub dt_max: f64,
    /// Smallest admissible step (the quadratic rule is clamped here).
    pub dt_floor: f64,
    /// Absorption level standing in for the origin.
    pub absorb_at: f64,
    /// Whether to apply the Brownian-bridge sub-step absorption test.
    pub bridge: bool,
    /// Number of independent paths.
    pub n_paths: usize,
    /// Base seed; path i uses stream i of this seed.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            horizon: 1.0,
            dt_max: 1e-3,
            dt_floor: 1e-9,
            absorb_at: 1e-6,
            bridge: true,
            n_paths: 10_000,
            seed: 1,
        }
    }
}

impl SimConfig {
    /// Check internal consistency; every public entry point calls this.
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::Domain {
                arg: "horizon",
                value: self.horizon,
                constraint: "horizon must be positive and finite",
            });
        }
        if !(self.dt_floor > 0.0) || !(self.dt_max >= self.dt_floor) || !self.dt_max.is_finite() {
            return Err(Error::Domain {
                arg: "dt_max",
                value: self.dt_max,
                constraint: "steps must satisfy 0 < dt_floor <= dt_max",
            });
        }
        if !(self.absorb_at >= 0.0) || !self.absorb_at.is_finite() {
            return Err(Error::Domain {
                arg: "absorb_at",
                value: self.absorb_at,
                constraint: "absorption level must be nonnegative",
            });
        }
        if self.n_paths == 0 {
            return Err(Error::Usage("n_paths must be positive".into()));
        }
        Ok(())
    }
}

/// What one simulated path produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    /// Grid time at which absorption was detected, if it was.
    pub hit_time: Option<f64>,
    /// Final position: the horizon value for survivors, the absorption
    /// level for absorbed paths.
    pub endpoint: f64,
    /// Number of Euler steps taken.
    pub steps: usize,
    /// How many of those steps had their drift increment capped.
    pub capped_steps: usize,
    /// (t, X_t) samples at every grid point when recording was requested,
    /// `None` otherwise (recording a default-config path stores on the
    /// order of horizon/dt_max points).
    pub trajectory: Option<Vec<(f64, f64)>>,
}

impl PathRecord {
    pub fn survived(&self) -> bool {
        self.hit_time.is_none()
    }
}

/// The adaptive step at position x with `remaining` time to the horizon.
pub(crate) fn adaptive_dt(x: f64, remaining: f64, config: &SimConfig) -> f64 {
    (DT_SCALE * x * x)
        .clamp(config.dt_floor, config.dt_max)
        .min(remaining)
}

/// Capped drift increment and whether the cap fired.
pub(crate) fn capped_drift(b: f64, dt: f64) -> (f64, bool) {
    let drift = b * dt;
    let cap = DRIFT_CAP_SIGMAS * dt.sqrt();
    if drift.abs() > cap {
        (cap.copysign(drift), true)
    } else {
        (drift, false)
    }
}

/// Probability that a Brownian bridge from `x_old` to `x_new` over time
/// `dt` dips to `level`; both endpoints must be above the level.
pub(crate) fn bridge_crossing_prob(x_old: f64, x_new: f64, level: f64, dt: f64) -> f64 {
    (-2.0 * (x_old - level) * (x_new - level) / dt).exp()
}

/// Simulate one path of dX = dB + b(X) dt from x0 under `config`, using
/// the caller's RNG (one StandardNormal per step, plus one uniform per
/// step when the bridge test is enabled).
pub fn simulate_path(
    spec: &DriftSpec,
    config: &SimConfig,
    x0: f64,
    rng: &mut ChaCha8Rng,
    record_trajectory: bool,
) -> PathRecord {
    let mut x = x0;
    let mut t = 0.0f64;
    let mut steps = 0usize;
    let mut capped_steps = 0usize;
    let mut trajectory = if record_trajectory {
        Some(vec![(0.0, x0)])
    } else {
        None
    };

    loop {
        let remaining = config.horizon - t;
        if remaining <= 0.0 {
            break;
        }
        let dt = adaptive_dt(x, remaining, config);
        let z: f64 = rng.sample(StandardNormal);
        let (drift, capped) = capped_drift(spec.eval_unchecked(x), dt);
        if capped {
            capped_steps += 1;
        }
        let x_new = x + drift + dt.sqrt() * z;
        t += dt;
        steps += 1;

        if x_new <= config.absorb_at {
            return PathRecord {
                hit_time: Some(t),
                endpoint: config.absorb_at,
                steps,
                capped_steps,
                trajectory,
            };
        }
        if config.bridge {
            let u: f64 = rng.gen();
            if u < bridge_crossing_prob(x, x_new, config.absorb_at, dt) {
                return PathRecord {
                    hit_time: Some(t),
                    endpoint: config.absorb_at,
                    steps,
                    capped_steps,
                    trajectory,
                };
            }
        }
        x = x_new;
        if let Some(traj) = trajectory.as_mut() {
            traj.push((t, x));
        }
    }

    PathRecord {
        hit_time: None,
        endpoint: x,
        steps,
        capped_steps,
        trajectory,
    }
}

/// Simulate `config.n_paths` independent paths in parallel. Path i uses
/// stream i of the base seed, and the returned records are in path-index
/// order regardless of scheduling, so downstream statistics are
/// deterministic.
pub fn run_paths(
    spec: &DriftSpec,
    config: &SimConfig,
    x0: f64,
    record_trajectories: bool,
) -> Result<Vec<PathRecord>> {
    config.validate()?;
    if !(x0 > config.absorb_at) || !x0.is_finite() {
        return Err(Error::Domain {
            arg: "x0",
            value: x0,
            constraint: "start must lie strictly above the absorption level",
        });
    }
    spec.eval(x0)?;
    Ok((0..config.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            simulate_path(spec, config, x0, &mut rng, record_trajectories)
        })
        .collect())
}
