//! Drift families for one-dimensional diffusions dX_t = dB_t + b(X_t) dt
//! on (0, ∞) whose drift is a negative power near the origin and near
//! infinity, together with slowly varying perturbations, Potter-bound
//! verification, and the power-law envelope pair ("sandwich drifts") that
//! squeezes a slowly varying drift between two piecewise-power ones.
//!
//! The central family is
//!
//! ```text
//!        ⎧ −α x^{−q},          0 < x ≤ M1
//! b(x) = ⎨ bounded mid segment, M1 < x < M2
//!        ⎩ −β x^{−p},          M2 ≤ x
//! ```
//!
//! with 0 < p, q < 1 and β > 0, plus a pure-power variant −β x^{−p} valid
//! on all of (0, ∞) (admitting p = 1 for validation against a closed-form
//! survival law) and a slowly-varying variant whose segments are
//! −α(x)·x^{−q}·ℓ₁(x) near zero and −β(x)·x^{−p}·ℓ₂(x) near infinity.
//! Regular variation of index −q (resp. −p), i.e. negative exponents,
//! is used consistently for the slowly-varying family; see the README for
//! the sign-convention note.

use crate::error::{Error, Result};

/// Log-spaced grid size used by every finite verification in this module
/// (Potter checks, sandwich checks, ordering guards). All structure here
/// is multiplicative, so log spacing probes each decade equally.
pub const SCAN_GRID_POINTS: usize = 1000;

/// Multiplicative span of the verification grids: checks "above M" sample
/// [M, M·SPAN] and checks "below M" sample [M/SPAN, M], four decades.
pub const SCAN_SPAN: f64 = 1e4;

/// How many times the sandwich construction may halve M1 (and double M2)
/// while hunting for thresholds where the slowly-varying bounds hold.
const SANDWICH_SEARCH_STEPS: usize = 60;

/// The bounded drift segment on (M1, M2).
#[derive(Debug, Clone, PartialEq)]
pub enum MidSegment {
    /// Constant level, the classical "bounded measurable" stand-in.
    Constant(f64),
    /// Affine interpolation between the one-sided segment values at M1 and
    /// M2; gives a continuous (but generally not C¹) drift.
    LinearBridge,
    /// Cubic Hermite interpolation matching both one-sided values and
    /// one-sided slopes at M1 and M2; gives a globally C¹ drift, as the
    /// Feynman–Kac transform requires.
    SmoothBridge,
}

/// Whether a slowly varying function is normalized for behaviour at the
/// origin or at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VaryDomain {
    AtZero,
    AtInfinity,
}

#[derive(Debug, Clone, PartialEq)]
enum SlowVaryKind {
    /// ℓ ≡ 1.
    One,
    /// (log x)^r at infinity, (log 1/x)^r at zero, clamped so the logarithm
    /// never drops below 1 (which keeps ℓ positive and defined on all of
    /// (0, ∞) while agreeing with the textbook form for x > e, resp.
    /// x < 1/e).
    LogPower(f64),
    /// log log x at infinity (resp. log log 1/x at zero), clamped to 1
    /// below e^e; varies even more slowly than any LogPower.
    IterLog,
    /// Tabulated positive samples (x_i, ℓ_i), interpolated linearly in
    /// log-log coordinates and extrapolated with the end-segment slopes.
    /// Log-log interpolation reproduces exact power laws from two points,
    /// which makes the table the natural vehicle for deliberately
    /// non-slowly-varying counterexamples.
    UserTable(Vec<(f64, f64)>),
}

/// A slowly varying function together with its evaluation-domain marker.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowVaryFn {
    kind: SlowVaryKind,
    domain: VaryDomain,
}

impl SlowVaryFn {
    /// The constant function 1.
    pub fn one(domain: VaryDomain) -> Self {
        SlowVaryFn {
            kind: SlowVaryKind::One,
            domain,
        }
    }

    /// (log x)^r (at infinity) or (log 1/x)^r (at zero), clamped as
    /// documented on the variant.
    pub fn log_power(r: f64, domain: VaryDomain) -> Self {
        SlowVaryFn {
            kind: SlowVaryKind::LogPower(r),
            domain,
        }
    }

    /// Iterated logarithm.
    pub fn iter_log(domain: VaryDomain) -> Self {
        SlowVaryFn {
            kind: SlowVaryKind::IterLog,
            domain,
        }
    }

    /// Tabulated function; points must have strictly increasing positive
    /// abscissae and positive values.
    pub fn user_table(points: Vec<(f64, f64)>, domain: VaryDomain) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Usage(
                "user table needs at least two points".into(),
            ));
        }
        for w in points.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::Usage(
                    "user table abscissae must be strictly increasing".into(),
                ));
            }
        }
        for &(x, v) in &points {
            if !(x > 0.0) || !(v > 0.0) || !x.is_finite() || !v.is_finite() {
                return Err(Error::Usage(
                    "user table entries must be finite and positive".into(),
                ));
            }
        }
        Ok(SlowVaryFn {
            kind: SlowVaryKind::UserTable(points),
            domain,
        })
    }

    /// Which end of (0, ∞) this function is normalized for.
    pub fn domain(&self) -> VaryDomain {
        self.domain
    }

    /// Evaluate at x > 0. Always strictly positive.
    pub fn eval(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0);
        // The logarithmic kinds read "distance from the relevant end":
        // ln x at infinity, ln 1/x at zero.
        let log_arg = match self.domain {
            VaryDomain::AtInfinity => x.ln(),
            VaryDomain::AtZero => -x.ln(),
        };
        match &self.kind {
            SlowVaryKind::One => 1.0,
            SlowVaryKind::LogPower(r) => log_arg.max(1.0).powf(*r),
            SlowVaryKind::IterLog => log_arg.max(1.0).ln().max(1.0),
            SlowVaryKind::UserTable(points) => {
                let lx = x.ln();
                // Locate the interpolation segment; clamp to the end
                // segments outside the table (log-log extrapolation).
                let seg = match points.binary_search_by(|&(px, _)| px.partial_cmp(&x).unwrap()) {
                    Ok(i) => i.min(points.len() - 2),
                    Err(i) => i.clamp(1, points.len() - 1) - 1,
                };
                let (x0, v0) = points[seg];
                let (x1, v1) = points[seg + 1];
                let t = (lx - x0.ln()) / (x1.ln() - x0.ln());
                (v0.ln() + t * (v1.ln() - v0.ln())).exp()
            }
        }
    }
}

/// Bounded coefficient function for the slowly-varying drift family: the
/// multipliers α(·), β(·) in −α(x) x^{−q} ℓ₁(x) and −β(x) x^{−p} ℓ₂(x).
#[derive(Debug, Clone, PartialEq)]
pub enum CoefFn {
    /// Constant coefficient.
    Constant(f64),
    /// limit + amplitude·exp(−x/scale): approaches `limit + amplitude` at
    /// the origin and `limit` at infinity, monotonically in between.
    ExpApproach {
        limit: f64,
        amplitude: f64,
        scale: f64,
    },
}

impl CoefFn {
    /// Evaluate at x > 0.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            CoefFn::Constant(c) => c,
            CoefFn::ExpApproach {
                limit,
                amplitude,
                scale,
            } => limit + amplitude * (-x / scale).exp(),
        }
    }

    /// Limit as x → 0⁺.
    pub fn limit_at_zero(&self) -> f64 {
        match *self {
            CoefFn::Constant(c) => c,
            CoefFn::ExpApproach {
                limit, amplitude, ..
            } => limit + amplitude,
        }
    }

    /// Limit as x → ∞.
    pub fn limit_at_infinity(&self) -> f64 {
        match *self {
            CoefFn::Constant(c) => c,
            CoefFn::ExpApproach { limit, .. } => limit,
        }
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        match *self {
            CoefFn::Constant(c) => {
                if !c.is_finite() {
                    return Err(Error::Domain {
                        arg: name,
                        value: c,
                        constraint: "coefficient must be finite",
                    });
                }
            }
            CoefFn::ExpApproach {
                limit,
                amplitude,
                scale,
            } => {
                if !limit.is_finite() || !amplitude.is_finite() {
                    return Err(Error::Domain {
                        arg: name,
                        value: limit,
                        constraint: "coefficient parameters must be finite",
                    });
                }
                if !(scale > 0.0) {
                    return Err(Error::Domain {
                        arg: name,
                        value: scale,
                        constraint: "coefficient scale must be positive",
                    });
                }
            }
        }
        Ok(())
    }
}

/// A drift field b(·) on (0, ∞).
#[derive(Debug, Clone, PartialEq)]
pub enum DriftSpec {
    /// Power law near 0 and near ∞ with a bounded mid segment.
    PiecewisePower {
        alpha: f64,
        q: f64,
        beta: f64,
        p: f64,
        m1: f64,
        m2: f64,
        mid: MidSegment,
    },
    /// −β x^{−p} on all of (0, ∞); p = 1 admitted for validation against
    /// the closed-form survival law of that boundary case. β may carry
    /// either sign (a tiny β serves as a driftless proxy).
    PurePower { beta: f64, p: f64 },
    /// Slowly-varying-perturbed power laws near 0 and ∞; the mid segment
    /// is the affine bridge between the two one-sided segment values.
    SlowlyVarying {
        alpha_fn: CoefFn,
        beta_fn: CoefFn,
        q: f64,
        p: f64,
        ell1: SlowVaryFn,
        ell2: SlowVaryFn,
        m1: f64,
        m2: f64,
    },
}

fn check_unit_interval(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::Domain {
            arg: name,
            value: v,
            constraint: "exponent must lie in (0, 1)",
        });
    }
    Ok(())
}

fn check_thresholds(m1: f64, m2: f64) -> Result<()> {
    if !(m1 > 0.0 && m1.is_finite()) {
        return Err(Error::Domain {
            arg: "m1",
            value: m1,
            constraint: "0 < M1 < M2",
        });
    }
    if !(m2 > m1 && m2.is_finite()) {
        return Err(Error::Domain {
            arg: "m2",
            value: m2,
            constraint: "0 < M1 < M2",
        });
    }
    Ok(())
}

impl DriftSpec {
    /// Validated constructor for the piecewise power family.
    pub fn piecewise_power(
        alpha: f64,
        q: f64,
        beta: f64,
        p: f64,
        m1: f64,
        m2: f64,
        mid: MidSegment,
    ) -> Result<Self> {
        check_unit_interval("q", q)?;
        check_unit_interval("p", p)?;
        if !(beta > 0.0) {
            return Err(Error::Domain {
                arg: "beta",
                value: beta,
                constraint: "beta > 0",
            });
        }
        if !alpha.is_finite() {
            return Err(Error::Domain {
                arg: "alpha",
                value: alpha,
                constraint: "alpha must be finite",
            });
        }
        check_thresholds(m1, m2)?;
        if let MidSegment::Constant(c) = mid {
            if !c.is_finite() {
                return Err(Error::Domain {
                    arg: "mid",
                    value: c,
                    constraint: "constant mid level must be finite",
                });
            }
        }
        Ok(DriftSpec::PiecewisePower {
            alpha,
            q,
            beta,
            p,
            m1,
            m2,
            mid,
        })
    }

    /// Validated constructor for the pure power family (p = 1 admitted).
    pub fn pure_power(beta: f64, p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Domain {
                arg: "p",
                value: p,
                constraint: "exponent must lie in (0, 1]",
            });
        }
        if !beta.is_finite() {
            return Err(Error::Domain {
                arg: "beta",
                value: beta,
                constraint: "beta must be finite",
            });
        }
        Ok(DriftSpec::PurePower { beta, p })
    }

    /// Validated constructor for the slowly varying family.
    #[allow(clippy::too_many_arguments)]
    pub fn slowly_varying(
        alpha_fn: CoefFn,
        beta_fn: CoefFn,
        q: f64,
        p: f64,
        ell1: SlowVaryFn,
        ell2: SlowVaryFn,
        m1: f64,
        m2: f64,
    ) -> Result<Self> {
        check_unit_interval("q", q)?;
        check_unit_interval("p", p)?;
        check_thresholds(m1, m2)?;
        alpha_fn.validate("alpha_fn")?;
        beta_fn.validate("beta_fn")?;
        if ell1.domain() != VaryDomain::AtZero {
            return Err(Error::Usage(
                "ell1 must be a slowly varying function at zero".into(),
            ));
        }
        if ell2.domain() != VaryDomain::AtInfinity {
            return Err(Error::Usage(
                "ell2 must be a slowly varying function at infinity".into(),
            ));
        }
        Ok(DriftSpec::SlowlyVarying {
            alpha_fn,
            beta_fn,
            q,
            p,
            ell1,
            ell2,
            m1,
            m2,
        })
    }

    /// The tail exponent p governing the drift at infinity.
    pub fn far_exponent(&self) -> f64 {
        match self {
            DriftSpec::PiecewisePower { p, .. }
            | DriftSpec::PurePower { p, .. }
            | DriftSpec::SlowlyVarying { p, .. } => *p,
        }
    }

    /// Whether the drift is C¹ on all of (0, ∞), the smoothness the
    /// Feynman–Kac transform needs.
    pub fn is_c1(&self) -> bool {
        match self {
            DriftSpec::PurePower { .. } => true,
            DriftSpec::PiecewisePower { mid, .. } => matches!(mid, MidSegment::SmoothBridge),
            DriftSpec::SlowlyVarying { .. } => false,
        }
    }

    /// Checked evaluation of b(x).
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain {
                arg: "x",
                value: x,
                constraint: "drift is defined for x > 0",
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Unchecked evaluation for hot loops; the caller guarantees x > 0.
    pub fn eval_unchecked(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0);
        match self {
            DriftSpec::PurePower { beta, p } => -beta * x.powf(-p),
            DriftSpec::PiecewisePower {
                alpha,
                q,
                beta,
                p,
                m1,
                m2,
                mid,
            } => {
                if x <= *m1 {
                    -alpha * x.powf(-q)
                } else if x >= *m2 {
                    -beta * x.powf(-p)
                } else {
                    let b1 = -alpha * m1.powf(-q);
                    let b2 = -beta * m2.powf(-p);
                    match mid {
                        MidSegment::Constant(c) => *c,
                        MidSegment::LinearBridge => {
                            b1 + (b2 - b1) * (x - m1) / (m2 - m1)
                        }
                        MidSegment::SmoothBridge => {
                            let s1 = alpha * q * m1.powf(-q - 1.0);
                            let s2 = beta * p * m2.powf(-p - 1.0);
                            hermite_value(*m1, *m2, b1, s1, b2, s2, x)
                        }
                    }
                }
            }
            DriftSpec::SlowlyVarying {
                alpha_fn,
                beta_fn,
                q,
                p,
                ell1,
                ell2,
                m1,
                m2,
            } => {
                if x <= *m1 {
                    -alpha_fn.eval(x) * x.powf(-q) * ell1.eval(x)
                } else if x >= *m2 {
                    -beta_fn.eval(x) * x.powf(-p) * ell2.eval(x)
                } else {
                    let b1 = -alpha_fn.eval(*m1) * m1.powf(-q) * ell1.eval(*m1);
                    let b2 = -beta_fn.eval(*m2) * m2.powf(-p) * ell2.eval(*m2);
                    b1 + (b2 - b1) * (x - m1) / (m2 - m1)
                }
            }
        }
    }

    /// Supremum of |b| over the mid interval [M1, M2], the "stored bound"
    /// certifying boundedness of the mid segment. `None` for the pure
    /// power family, which has no mid segment.
    pub fn mid_bound(&self) -> Option<f64> {
        match self {
            DriftSpec::PurePower { .. } => None,
            DriftSpec::PiecewisePower {
                alpha,
                q,
                beta,
                p,
                m1,
                m2,
                mid,
            } => {
                let b1 = -alpha * m1.powf(-q);
                let b2 = -beta * m2.powf(-p);
                Some(match mid {
                    MidSegment::Constant(c) => c.abs().max(b1.abs()).max(b2.abs()),
                    MidSegment::LinearBridge => b1.abs().max(b2.abs()),
                    MidSegment::SmoothBridge => {
                        // A cubic's extrema need not sit at the endpoints;
                        // scan densely and pad by a hair for the gaps.
                        let mut sup: f64 = b1.abs().max(b2.abs());
                        for i in 0..=SCAN_GRID_POINTS {
                            let x = m1 + (m2 - m1) * i as f64 / SCAN_GRID_POINTS as f64;
                            sup = sup.max(self.eval_unchecked(x).abs());
                        }
                        sup * (1.0 + 1e-6)
                    }
                })
            }
            DriftSpec::SlowlyVarying { m1, m2, .. } => {
                // Affine bridge: extrema at the endpoints.
                let b1 = self.eval_unchecked(*m1);
                let b2 = self.eval_unchecked(*m2);
                Some(b1.abs().max(b2.abs()))
            }
        }
    }

    /// One-sided drift derivative b′(x), defined piecewise (used by the
    /// potential of the Feynman–Kac transform). At the junction points the
    /// segment containing x per the piecewise definition wins.
    pub(crate) fn derivative_unchecked(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0);
        match self {
            DriftSpec::PurePower { beta, p } => beta * p * x.powf(-p - 1.0),
            DriftSpec::PiecewisePower {
                alpha,
                q,
                beta,
                p,
                m1,
                m2,
                mid,
            } => {
                if x <= *m1 {
                    alpha * q * x.powf(-q - 1.0)
                } else if x >= *m2 {
                    beta * p * x.powf(-p - 1.0)
                } else {
                    let b1 = -alpha * m1.powf(-q);
                    let b2 = -beta * m2.powf(-p);
                    match mid {
                        MidSegment::Constant(_) => 0.0,
                        MidSegment::LinearBridge => (b2 - b1) / (m2 - m1),
                        MidSegment::SmoothBridge => {
                            let s1 = alpha * q * m1.powf(-q - 1.0);
                            let s2 = beta * p * m2.powf(-p - 1.0);
                            hermite_derivative(*m1, *m2, b1, s1, b2, s2, x)
                        }
                    }
                }
            }
            DriftSpec::SlowlyVarying { .. } => {
                unreachable!("derivative is only requested for C1 drift families")
            }
        }
    }
}

/// Cubic Hermite interpolant on [m1, m2] through (m1, v1) with slope s1
/// and (m2, v2) with slope s2.
fn hermite_value(m1: f64, m2: f64, v1: f64, s1: f64, v2: f64, s2: f64, x: f64) -> f64 {
    let h = m2 - m1;
    let t = (x - m1) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    v1 * (2.0 * t3 - 3.0 * t2 + 1.0)
        + s1 * h * (t3 - 2.0 * t2 + t)
        + v2 * (-2.0 * t3 + 3.0 * t2)
        + s2 * h * (t3 - t2)
}

/// Derivative in x of [`hermite_value`].
fn hermite_derivative(m1: f64, m2: f64, v1: f64, s1: f64, v2: f64, s2: f64, x: f64) -> f64 {
    let h = m2 - m1;
    let t = (x - m1) / h;
    let t2 = t * t;
    v1 * (6.0 * t2 - 6.0 * t) / h
        + s1 * (3.0 * t2 - 4.0 * t + 1.0)
        + v2 * (6.0 * t - 6.0 * t2) / h
        + s2 * (3.0 * t2 - 2.0 * t)
}

/// Antiderivative of the mid segment: ∫_{m1}^{x} mid(y) dy for
/// x ∈ [m1, m2], in closed form per segment kind. `pub(crate)` because the
/// h-transform and scale function assemble exact drift antiderivatives
/// from it.
pub(crate) fn mid_antiderivative(spec: &DriftSpec, x: f64) -> f64 {
    match spec {
        DriftSpec::PurePower { .. } => unreachable!("pure power drift has no mid segment"),
        DriftSpec::PiecewisePower {
            alpha,
            q,
            beta,
            p,
            m1,
            m2,
            mid,
        } => {
            let b1 = -alpha * m1.powf(-q);
            let b2 = -beta * m2.powf(-p);
            let h = m2 - m1;
            let t = (x - m1) / h;
            match mid {
                MidSegment::Constant(c) => c * (x - m1),
                MidSegment::LinearBridge => b1 * (x - m1) + 0.5 * (b2 - b1) * h * t * t,
                MidSegment::SmoothBridge => {
                    let s1 = alpha * q * m1.powf(-q - 1.0);
                    let s2 = beta * p * m2.powf(-p - 1.0);
                    let t2 = t * t;
                    let t3 = t2 * t;
                    let t4 = t3 * t;
                    h * (b1 * (0.5 * t4 - t3 + t)
                        + s1 * h * (0.25 * t4 - 2.0 / 3.0 * t3 + 0.5 * t2)
                        + b2 * (-0.5 * t4 + t3)
                        + s2 * h * (0.25 * t4 - t3 / 3.0))
                }
            }
        }
        DriftSpec::SlowlyVarying { m1, m2, .. } => {
            let b1 = spec.eval_unchecked(*m1);
            let b2 = spec.eval_unchecked(*m2);
            let h = m2 - m1;
            let t = (x - m1) / h;
            b1 * (x - m1) + 0.5 * (b2 - b1) * h * t * t
        }
    }
}

/// Result of a Potter-bound verification: whether
/// ℓ(y) ≤ A·ℓ(x)·max((y/x)^δ, (y/x)^{−δ}) held on every sampled pair, and
/// the worst observed value of ℓ(y) / (A·ℓ(x)·max(...)), which is ≤ 1
/// exactly when the bound holds. The grid fields record what was sampled:
/// this is a finite verification, not a proof.
#[derive(Debug, Clone, PartialEq)]
pub struct PotterReport {
    pub holds: bool,
    pub worst_ratio: f64,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
}

/// Log-spaced grid of `n` points on [lo, hi].
fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            let t = if n == 1 {
                0.0
            } else {
                i as f64 / (n - 1) as f64
            };
            (llo + t * (lhi - llo)).exp()
        })
        .collect()
}

/// Verify the Potter bound for `ell` with constant `A` and exponent
/// `delta` on a deterministic log-spaced grid of roughly `sample_pairs`
/// ordered pairs: pairs are drawn from [M, M·SPAN] for a function at
/// infinity and from [M/SPAN, M] for a function at zero.
pub fn potter_check(
    ell: &SlowVaryFn,
    a: f64,
    delta: f64,
    m: f64,
    sample_pairs: usize,
) -> Result<PotterReport> {
    if !(a > 1.0) {
        return Err(Error::Domain {
            arg: "a",
            value: a,
            constraint: "Potter constant must satisfy A > 1",
        });
    }
    if !(delta > 0.0) {
        return Err(Error::Domain {
            arg: "delta",
            value: delta,
            constraint: "Potter exponent must satisfy delta > 0",
        });
    }
    if !(m > 0.0) {
        return Err(Error::Domain {
            arg: "m",
            value: m,
            constraint: "threshold must satisfy M > 0",
        });
    }
    if sample_pairs == 0 {
        return Err(Error::Usage("empty Potter sample set".into()));
    }
    let n = ((sample_pairs as f64).sqrt().ceil() as usize).max(2);
    let (lo, hi) = match ell.domain() {
        VaryDomain::AtInfinity => (m, m * SCAN_SPAN),
        VaryDomain::AtZero => (m / SCAN_SPAN, m),
    };
    let grid = log_grid(lo, hi, n);
    let values: Vec<f64> = grid.iter().map(|&x| ell.eval(x)).collect();
    let mut worst = f64::MIN;
    for (i, &x) in grid.iter().enumerate() {
        for (j, &y) in grid.iter().enumerate() {
            let r = y / x;
            let envelope = r.powf(delta).max(r.powf(-delta));
            let ratio = values[j] / (a * values[i] * envelope);
            if ratio > worst {
                worst = ratio;
            }
        }
    }
    Ok(PotterReport {
        holds: worst <= 1.0,
        worst_ratio: worst,
        grid_min: lo,
        grid_max: hi,
        grid_points: n,
    })
}

/// Result of a power-envelope check on a slowly varying function.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub holds: bool,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
}

/// Check the power sandwich for a slowly varying function: at infinity,
/// x^{−δ} ≤ ℓ(x) ≤ x^{δ} on a log grid over [M, M·SPAN]; at zero,
/// x^{δ} ≤ ℓ(x) ≤ x^{−δ} on [M/SPAN, M].
pub fn sandwich_bounds(ell: &SlowVaryFn, delta: f64, m: f64) -> Result<SandwichReport> {
    if !(delta > 0.0) {
        return Err(Error::Domain {
            arg: "delta",
            value: delta,
            constraint: "sandwich exponent must satisfy delta > 0",
        });
    }
    if !(m > 0.0) {
        return Err(Error::Domain {
            arg: "m",
            value: m,
            constraint: "threshold must satisfy M > 0",
        });
    }
    let (lo, hi) = match ell.domain() {
        VaryDomain::AtInfinity => (m, m * SCAN_SPAN),
        VaryDomain::AtZero => (m / SCAN_SPAN, m),
    };
    let grid = log_grid(lo, hi, SCAN_GRID_POINTS);
    let holds = grid.iter().all(|&x| {
        let v = ell.eval(x);
        let (lo_bound, hi_bound) = match ell.domain() {
            VaryDomain::AtInfinity => (x.powf(-delta), x.powf(delta)),
            VaryDomain::AtZero => (x.powf(delta), x.powf(-delta)),
        };
        lo_bound <= v && v <= hi_bound
    });
    Ok(SandwichReport {
        holds,
        grid_min: lo,
        grid_max: hi,
        grid_points: SCAN_GRID_POINTS,
    })
}

/// Construct the piecewise-power envelope pair (lower, upper) around a
/// slowly varying drift: lower ≤ b ≤ upper pointwise, with the envelopes'
/// power exponents displaced by ±delta and multipliers displaced by ±eps
/// around the limiting coefficients. The thresholds are moved (M1 down,
/// M2 up) until both the slowly-varying sandwich and the coefficient
/// proximity hold on the verification grids; the final pointwise ordering
/// is re-verified on a log grid spanning [M1/100, M2·100].
///
/// Envelope mid segments are constant levels at the grid extrema of the
/// original drift over the (possibly widened) mid interval, except in the
/// fully degenerate case delta = eps = 0 with unmoved thresholds, where
/// both envelopes reduce to the original drift pointwise and a linear
/// bridge reproduces it exactly.
pub fn sandwich_drifts(spec: &DriftSpec, delta: f64, eps: f64) -> Result<(DriftSpec, DriftSpec)> {
    let DriftSpec::SlowlyVarying {
        alpha_fn,
        beta_fn,
        q,
        p,
        ell1,
        ell2,
        m1,
        m2,
    } = spec
    else {
        return Err(Error::Usage(
            "sandwich envelopes are defined for the slowly varying drift family".into(),
        ));
    };
    let (q, p, m1, m2) = (*q, *p, *m1, *m2);
    if !(delta >= 0.0) || q - delta <= 0.0 || q + delta >= 1.0 || p - delta <= 0.0 || p + delta >= 1.0
    {
        return Err(Error::Domain {
            arg: "delta",
            value: delta,
            constraint: "envelope exponents q±delta and p±delta must stay in (0, 1)",
        });
    }
    let alpha0 = alpha_fn.limit_at_zero();
    let beta0 = beta_fn.limit_at_infinity();
    if !(eps >= 0.0) || !(beta0 - eps > 0.0) {
        return Err(Error::Domain {
            arg: "eps",
            value: eps,
            constraint: "multiplier slack must satisfy 0 <= eps < beta0",
        });
    }

    // Widen the thresholds until the slowly-varying sandwich and the
    // coefficient proximity both hold on their verification grids.
    let coef_tol = eps + 1e-12;
    let mut m1w = m1;
    let mut found_m1 = false;
    for _ in 0..=SANDWICH_SEARCH_STEPS {
        let ell_ok = if delta == 0.0 {
            log_grid(m1w / SCAN_SPAN, m1w, SCAN_GRID_POINTS)
                .iter()
                .all(|&x| ell1.eval(x) == 1.0)
        } else {
            sandwich_bounds(ell1, delta, m1w)?.holds
        };
        let coef_ok = log_grid(m1w / SCAN_SPAN, m1w, SCAN_GRID_POINTS)
            .iter()
            .all(|&x| (alpha_fn.eval(x) - alpha0).abs() <= coef_tol);
        if ell_ok && coef_ok {
            found_m1 = true;
            break;
        }
        m1w *= 0.5;
    }
    let mut m2w = m2;
    let mut found_m2 = false;
    for _ in 0..=SANDWICH_SEARCH_STEPS {
        let ell_ok = if delta == 0.0 {
            log_grid(m2w, m2w * SCAN_SPAN, SCAN_GRID_POINTS)
                .iter()
                .all(|&x| ell2.eval(x) == 1.0)
        } else {
            sandwich_bounds(ell2, delta, m2w)?.holds
        };
        let coef_ok = log_grid(m2w, m2w * SCAN_SPAN, SCAN_GRID_POINTS)
            .iter()
            .all(|&x| (beta_fn.eval(x) - beta0).abs() <= coef_tol);
        if ell_ok && coef_ok {
            found_m2 = true;
            break;
        }
        m2w *= 2.0;
    }
    if !found_m1 || !found_m2 {
        return Err(Error::NonConvergence {
            what: "sandwich envelope threshold search",
            iterations: SANDWICH_SEARCH_STEPS,
        });
    }

    // Near-origin envelope coefficients. With coefficient a ∈ [a_lo, a_hi]
    // and ℓ₁ ∈ [x^δ, x^{−δ}] for x ≤ M1 (where x^δ ≤ 1 ≤ x^{−δ}), the most
    // negative value of −a·x^{−q}·ℓ₁ pairs the largest a with the larger
    // ℓ-bound when a ≥ 0 and with the smaller one when a < 0, and dually
    // for the least negative value.
    let a_hi = alpha0 + eps;
    let a_lo = alpha0 - eps;
    let q_low = if a_hi >= 0.0 { q + delta } else { q - delta };
    let q_up = if a_lo >= 0.0 { q - delta } else { q + delta };
    // At infinity x^{−δ} ≤ 1 ≤ x^δ and both multiplier bounds are
    // positive, so the pairing is fixed.
    let c_hi = beta0 + eps;
    let c_lo = beta0 - eps;
    let p_low = p - delta;
    let p_up = p + delta;

    let degenerate = delta == 0.0 && eps == 0.0 && m1w == m1 && m2w == m2;
    let (mid_low, mid_up) = if degenerate {
        (MidSegment::LinearBridge, MidSegment::LinearBridge)
    } else {
        // Envelope mid levels: grid extrema of the original drift over the
        // widened mid interval, padded so values between grid points stay
        // enclosed.
        let grid = log_grid(m1w, m2w, SCAN_GRID_POINTS);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &x in grid.iter().chain([m1w, m2w].iter()) {
            let v = spec.eval_unchecked(x);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let guard = 1e-6 * (1.0 + lo.abs().max(hi.abs()));
        (
            MidSegment::Constant(lo - guard),
            MidSegment::Constant(hi + guard),
        )
    };

    let lower = DriftSpec::piecewise_power(a_hi, q_low, c_hi, p_low, m1w, m2w, mid_low)?;
    let upper = DriftSpec::piecewise_power(a_lo, q_up, c_lo, p_up, m1w, m2w, mid_up)?;

    // Final guard: pointwise ordering on a wide log grid. The construction
    // guarantees this; the check catches grid-resolution surprises.
    let tol = if degenerate { 1e-12 } else { 0.0 };
    for &x in log_grid(m1w / 100.0, m2w * 100.0, SCAN_GRID_POINTS).iter() {
        let b = spec.eval_unchecked(x);
        let lo = lower.eval_unchecked(x);
        let hi = upper.eval_unchecked(x);
        if lo > b + tol || b > hi + tol {
            return Err(Error::NonConvergence {
                what: "sandwich envelope ordering guard",
                iterations: SCAN_GRID_POINTS,
            });
        }
    }
    Ok((lower, upper))
}
