//! Scalar special functions: log-gamma, the regularized lower incomplete
//! gamma function, and the error function.
//!
//! `ln_gamma` uses the Lanczos approximation with g = 7 and nine
//! coefficients, which delivers close to machine precision (relative error
//! around 1e-15) on the argument range exercised by this crate, (0, 100].
//! Arguments below 1/2 go through the reflection formula
//! Γ(x)Γ(1−x) = π/sin(πx).
//!
//! The regularized lower incomplete gamma function
//!
//! ```text
//! P(a, x) = γ(a, x) / Γ(a) = (1/Γ(a)) ∫₀ˣ s^{a−1} e^{−s} ds
//! ```
//!
//! switches between the classical power series (for x < a + 1) and the
//! modified Lentz continued fraction for the upper complement (for
//! x ≥ a + 1), the standard regime split that keeps both expansions fast
//! and well conditioned.
//!
//! `erf` is the special case erf(x) = P(1/2, x²) for x ≥ 0, extended to
//! negative arguments by oddness.

use std::f64::consts::PI;

/// Lanczos shift parameter paired with [`LANCZOS_COEF`].
const LANCZOS_G: f64 = 7.0;

/// Nine-term Lanczos coefficient table for g = 7.
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Convergence guard for the incomplete-gamma expansions. Both the series
/// and the continued fraction reach 1e-16 relative accuracy in well under
/// a hundred terms on this crate's argument range; the cap only protects
/// against pathological inputs.
const INCOMPLETE_GAMMA_MAX_ITERS: usize = 500;

/// Natural logarithm of the gamma function for x > 0 (any non-integer
/// x < 0 is also accepted through the reflection formula, though the crate
/// only calls it with positive arguments).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: ln Γ(x) = ln(π / sin(πx)) − ln Γ(1 − x).
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
    }
}

/// Regularized lower incomplete gamma function P(a, x) for a > 0, x ≥ 0.
pub fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0, "shape parameter must be positive");
    debug_assert!(x >= 0.0, "integration endpoint must be non-negative");
    if x == 0.0 {
        return 0.0;
    }
    // Common normalizing prefactor x^a e^{−x} / Γ(a), kept in log form.
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // Power series: P(a,x) = x^a e^{−x}/Γ(a) · Σ_{k≥0} x^k / (a(a+1)⋯(a+k)).
        let mut ap = a;
        let mut term = 1.0 / a;
        let mut sum = term;
        for _ in 0..INCOMPLETE_GAMMA_MAX_ITERS {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        (sum * log_prefactor.exp()).clamp(0.0, 1.0)
    } else {
        // Modified Lentz continued fraction for Q(a,x); return P = 1 − Q.
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..INCOMPLETE_GAMMA_MAX_ITERS {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (1.0 - log_prefactor.exp() * h).clamp(0.0, 1.0)
    }
}

/// Error function, erf(x) = (2/√π) ∫₀ˣ e^{−s²} ds.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        -erf(-x)
    } else {
        reg_lower_gamma(0.5, x * x)
    }
}
