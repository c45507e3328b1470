//! Stretched-exponential tail fitting. Survival samples
//! (t_i, log p̂_i, stderr_i) are fitted to log p(t) ≈ −c·tᵃ by weighted
//! least squares: for fixed a the model is linear in c,
//!   c(a) = −Σ wᵢ xᵢ yᵢ / Σ wᵢ xᵢ²,  xᵢ = tᵢᵃ,  yᵢ = log p̂ᵢ,
//! and when the exponent is free the outer one-dimensional profile
//! a ↦ SSE(a) is minimized by a coarse scan plus golden-section
//! refinement. A caller who trusts a far-field power p may instead pin
//! the exponent to (1−p)/(1+p) and fit only the rate. Weights are
//! 1/stderr² on the log scale; if any sample reports a non-positive
//! standard error the fit falls back to uniform weights for all points.

use crate::error::{Error, Result};

/// Result of a stretched-exponential fit log p(t) ≈ −rate · t^exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub exponent: f64,
    pub rate: f64,
    /// Unweighted root-mean-square of the log-space residuals.
    pub residual_rms: f64,
    /// Samples that survived filtering. Callers that need to warn about
    /// dropped samples (p̂ = 0 gives log p̂ = −∞ and is discarded)
    /// compare this against the input length.
    pub points_used: usize,
}

const GOLDEN_ITERS: usize = 80;
const SCAN_LO: f64 = 0.02;
const SCAN_HI: f64 = 0.98;
const SCAN_POINTS: usize = 97;

/// Profile sum of squares at exponent `a` together with the optimal
/// rate c(a). `pts` holds (t, log p, weight).
fn profile_sse(pts: &[(f64, f64, f64)], a: f64) -> (f64, f64) {
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for &(t, y, w) in pts {
        let x = t.powf(a);
        sxy += w * x * y;
        sxx += w * x * x;
    }
    let c = if sxx > 0.0 { -sxy / sxx } else { 0.0 };
    let mut sse = 0.0;
    for &(t, y, w) in pts {
        let r = y + c * t.powf(a);
        sse += w * r * r;
    }
    (sse, c)
}

fn golden_min(pts: &[(f64, f64, f64)], mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = profile_sse(pts, x1).0;
    let mut f2 = profile_sse(pts, x2).0;
    for _ in 0..GOLDEN_ITERS {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = profile_sse(pts, x1).0;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = profile_sse(pts, x2).0;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Fit log p(t) ≈ −c·tᵃ to samples `(t, log_p_hat, stderr_of_log)`.
/// Samples with non-finite log p̂ (in particular p̂ = 0), non-positive
/// or non-finite t, or non-finite stderr are dropped. With `p_hint`
/// the exponent is fixed to a = (1−p)/(1+p) and only the rate is
/// fitted; otherwise the exponent is searched over (0, 1).
pub fn fit_tail_exponent(samples: &[(f64, f64, f64)], p_hint: Option<f64>) -> Result<TailFit> {
    if let Some(p) = p_hint {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Usage(format!(
                "far-field power hint {p} must lie strictly inside (0, 1)"
            )));
        }
    }
    let valid: Vec<(f64, f64, f64)> = samples
        .iter()
        .filter(|&&(t, y, se)| t.is_finite() && t > 0.0 && y.is_finite() && se.is_finite())
        .copied()
        .collect();
    let mut distinct: Vec<f64> = valid.iter().map(|s| s.0).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if valid.len() < 3 || distinct.len() < 3 {
        return Err(Error::Usage(format!(
            "tail fit needs at least 3 valid samples at 3 distinct times, got {} at {}",
            valid.len(),
            distinct.len()
        )));
    }
    let uniform = valid.iter().any(|&(_, _, se)| se <= 0.0);
    let pts: Vec<(f64, f64, f64)> = valid
        .iter()
        .map(|&(t, y, se)| {
            let w = if uniform { 1.0 } else { 1.0 / (se * se) };
            (t, y, w)
        })
        .collect();
    let (a, c) = match p_hint {
        Some(p) => {
            let a = (1.0 - p) / (1.0 + p);
            let (_, c) = profile_sse(&pts, a);
            (a, c)
        }
        None => {
            let mut best_a = SCAN_LO;
            let mut best_sse = f64::INFINITY;
            for k in 0..SCAN_POINTS {
                let a = SCAN_LO + (SCAN_HI - SCAN_LO) * k as f64 / (SCAN_POINTS - 1) as f64;
                let (sse, _) = profile_sse(&pts, a);
                if sse < best_sse {
                    best_sse = sse;
                    best_a = a;
                }
            }
            let step = (SCAN_HI - SCAN_LO) / (SCAN_POINTS - 1) as f64;
            let a = golden_min(
                &pts,
                (best_a - step).max(SCAN_LO),
                (best_a + step).min(SCAN_HI),
            );
            let (_, c) = profile_sse(&pts, a);
            (a, c)
        }
    };
    let mut rss = 0.0;
    for &(t, y, _) in &pts {
        let r = y + c * t.powf(a);
        rss += r * r;
    }
    Ok(TailFit {
        exponent: a,
        rate: c,
        residual_rms: (rss / pts.len() as f64).sqrt(),
        points_used: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn synthetic(rate: f64, exponent: f64, se_log: f64) -> Vec<(f64, f64, f64)> {
        (1..=8)
            .map(|k| {
                let t = (2.0f64).powi(k);
                (t, -rate * t.powf(exponent), se_log)
            })
            .collect()
    }

    #[test]
    fn recovers_a_clean_stretched_exponential() {
        let fit = fit_tail_exponent(&synthetic(2.5, 1.0 / 3.0, 1e-6), None).unwrap();
        assert!((fit.exponent - 1.0 / 3.0).abs() < 1e-4, "a = {}", fit.exponent);
        assert!((fit.rate - 2.5).abs() < 1e-3, "c = {}", fit.rate);
        assert!(fit.residual_rms < 1e-6);
        assert_eq!(fit.points_used, 8);
    }

    #[test]
    fn square_root_model_on_four_points() {
        // log p = −2·t^{1/2} at t ∈ {1, 4, 9, 16}.
        let samples: Vec<(f64, f64, f64)> = [1.0f64, 4.0, 9.0, 16.0]
            .iter()
            .map(|&t| (t, -2.0 * t.sqrt(), 1e-3))
            .collect();
        let fit = fit_tail_exponent(&samples, None).unwrap();
        assert!((fit.exponent - 0.5).abs() < 1e-8, "a = {}", fit.exponent);
        assert!((fit.rate - 2.0).abs() < 1e-8, "c = {}", fit.rate);
    }

    #[test]
    fn pinned_exponent_fits_only_the_rate() {
        // p = 0.6 pins a = (1−p)/(1+p) = 0.25 exactly.
        let samples = synthetic(1.2, 0.25, 1e-6);
        let pinned = fit_tail_exponent(&samples, Some(0.6)).unwrap();
        assert_eq!(pinned.exponent, 0.25);
        assert!((pinned.rate - 1.2).abs() < 1e-10);
        let free = fit_tail_exponent(&samples, None).unwrap();
        assert!((free.exponent - pinned.exponent).abs() < 1e-6);
        assert!((free.rate - pinned.rate).abs() < 1e-6);
    }

    #[test]
    fn pinned_exponent_absorbs_model_error_into_the_rate() {
        // Data generated at a = 0.4 but pinned to a = 1/3: the fit must
        // still return the weighted-least-squares rate for the imposed
        // model, with a visible residual.
        let samples = synthetic(2.0, 0.4, 0.01);
        let fit = fit_tail_exponent(&samples, Some(0.5)).unwrap();
        assert!((fit.exponent - 1.0 / 3.0).abs() < 1e-15);
        assert!(fit.rate > 2.0, "rate {r} must inflate to compensate", r = fit.rate);
        assert!(fit.residual_rms > 0.1);
    }

    #[test]
    fn tolerates_seeded_multiplicative_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let samples: Vec<(f64, f64, f64)> = synthetic(2.5, 1.0 / 3.0, 0.01)
            .into_iter()
            .map(|(t, y, se)| {
                let z: f64 = rng.sample(StandardNormal);
                (t, y + 0.01 * z, se)
            })
            .collect();
        let fit = fit_tail_exponent(&samples, None).unwrap();
        assert!((fit.exponent - 1.0 / 3.0).abs() < 0.05, "a = {}", fit.exponent);
        assert!((fit.rate - 2.5).abs() < 0.3, "c = {}", fit.rate);
    }

    #[test]
    fn large_stderr_downweights_an_outlier() {
        let mut samples = synthetic(2.5, 1.0 / 3.0, 1e-4);
        // Corrupt one point badly but mark it as very uncertain.
        samples[5].1 += 2.3;
        samples[5].2 = 10.0;
        let fit = fit_tail_exponent(&samples, None).unwrap();
        assert!((fit.exponent - 1.0 / 3.0).abs() < 0.02, "a = {}", fit.exponent);
    }

    #[test]
    fn non_positive_stderr_falls_back_to_uniform_weights() {
        let mut samples = synthetic(2.5, 0.4, 1e-4);
        samples[0].2 = 0.0;
        let fit = fit_tail_exponent(&samples, None).unwrap();
        // Exact data: uniform weights still recover the model.
        assert!((fit.exponent - 0.4).abs() < 1e-4);
    }

    #[test]
    fn zero_probability_samples_are_dropped() {
        let mut samples = synthetic(1.5, 0.3, 1e-3);
        samples.push((512.0, f64::NEG_INFINITY, 1e-3));
        let fit = fit_tail_exponent(&samples, None).unwrap();
        assert_eq!(fit.points_used, 8);
        assert!((fit.exponent - 0.3).abs() < 1e-4);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(matches!(
            fit_tail_exponent(&[(1.0, -0.5, 0.01), (2.0, -0.9, 0.01)], None),
            Err(Error::Usage(_))
        ));
        let same_t = [(4.0, -0.5, 0.01), (4.0, -0.6, 0.01), (4.0, -0.7, 0.01)];
        assert!(matches!(
            fit_tail_exponent(&same_t, None),
            Err(Error::Usage(_))
        ));
        let two_good = [
            (1.0, -0.5, 0.01),
            (2.0, f64::NEG_INFINITY, 0.01),
            (f64::NAN, -0.2, 0.01),
            (4.0, -1.2, 0.01),
        ];
        assert!(fit_tail_exponent(&two_good, None).is_err());
        assert!(fit_tail_exponent(&synthetic(1.0, 0.5, 1e-3), Some(1.5)).is_err());
        assert!(fit_tail_exponent(&synthetic(1.0, 0.5, 1e-3), Some(0.0)).is_err());
    }
}
