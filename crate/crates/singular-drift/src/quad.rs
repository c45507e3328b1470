//! One-dimensional quadrature used by the closed-form survival laws and
//! the scale function.
//!
//! Two integrators cover the crate's needs:
//!
//! * [`adaptive_simpson`]: recursive Simpson with Richardson acceptance,
//!   driven by a *locally relative* tolerance. The scale-function integrand
//!   grows like exp(c·zᵃ) and spans dozens of orders of magnitude, so a
//!   globally absolute budget would either oversample the tiny region or
//!   under-resolve the dominant one; accepting each panel relative to its
//!   own contribution handles the dynamic range naturally.
//! * [`gauss_kronrod`]: globally adaptive Gauss–Kronrod (G7, K15) with a
//!   worst-interval-first refinement queue and an absolute error budget,
//!   used for the probability-scale survival integrals where "absolute
//!   error 1e-12" is the meaningful contract.

use crate::error::{Error, Result};

/// Maximum bisection depth for [`adaptive_simpson`] before reporting
/// non-convergence. 50 halvings shrink an O(1) interval below 1e-15 of its
/// original width, past the point where f64 abscissae can still move.
const SIMPSON_MAX_DEPTH: usize = 50;

/// Interval budget for [`gauss_kronrod`]. Every refinement splits the
/// current worst interval in two, so this bounds both work and memory.
const GK_MAX_INTERVALS: usize = 4000;

/// Kronrod abscissae (absolute values) for the 15-point rule on [-1, 1].
/// Odd-indexed entries are the embedded 7-point Gauss nodes.
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];

/// Kronrod weights matching [`GK_NODES`].
const GK_WEIGHTS_K15: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];

/// Gauss weights for the embedded 7-point rule (nodes 1, 3, 5, 7 of
/// [`GK_NODES`]).
const GK_WEIGHTS_G7: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// Adaptive Simpson integration of `f` over `[a, b]` with locally relative
/// tolerance `rel_tol`. Returns a domain error for a reversed interval and
/// non-convergence if the recursion depth limit is reached anywhere.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(b >= a) {
        return Err(Error::Domain {
            arg: "b",
            value: b,
            constraint: "integration bounds must satisfy a <= b",
        });
    }
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson_panel(a, b, fa, fm, fb);
    simpson_recurse(f, a, b, fa, fm, fb, whole, rel_tol, SIMPSON_MAX_DEPTH)
}

fn simpson_panel(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    rel_tol: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_panel(a, m, fa, flm, fm);
    let right = simpson_panel(m, b, fm, frm, fb);
    let refined = left + right;
    let err = refined - whole;
    // Accept when the Richardson error estimate err/15 is small relative to
    // this panel's own contribution; the 1e-300 floor keeps panels whose
    // true value is zero from recursing forever.
    if err.abs() <= 15.0 * (rel_tol * refined.abs() + 1e-300) {
        return Ok(refined + err / 15.0);
    }
    if depth == 0 {
        return Err(Error::NonConvergence {
            what: "adaptive Simpson quadrature",
            iterations: SIMPSON_MAX_DEPTH,
        });
    }
    let l = simpson_recurse(f, a, m, fa, flm, fm, left, rel_tol, depth - 1)?;
    let r = simpson_recurse(f, m, b, fm, frm, fb, right, rel_tol, depth - 1)?;
    Ok(l + r)
}

/// One Gauss–Kronrod (G7, K15) evaluation over `[a, b]`; returns the K15
/// value and the |K15 − G7| error estimate.
fn gk15_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut k15 = 0.0;
    let mut g7 = 0.0;
    for (i, (&x, &wk)) in GK_NODES.iter().zip(GK_WEIGHTS_K15.iter()).enumerate() {
        let (fp, fm) = if x == 0.0 {
            let v = f(mid);
            // The central node contributes once; halve so the sum below
            // (which adds fp + fm) counts it with a single weight.
            (0.5 * v, 0.5 * v)
        } else {
            (f(mid + half * x), f(mid - half * x))
        };
        k15 += wk * (fp + fm);
        if i % 2 == 1 || x == 0.0 {
            let wg = GK_WEIGHTS_G7[i / 2];
            g7 += wg * (fp + fm);
        }
    }
    (half * k15, half * (k15 - g7).abs())
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]` to
/// absolute tolerance `abs_tol`.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if !(b >= a) {
        return Err(Error::Domain {
            arg: "b",
            value: b,
            constraint: "integration bounds must satisfy a <= b",
        });
    }
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15_panel(f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total_err: f64 = intervals.iter().map(|&(_, _, _, e)| e).sum();
        if total_err <= abs_tol {
            return Ok(intervals.iter().map(|&(_, _, v, _)| v).sum());
        }
        if intervals.len() >= GK_MAX_INTERVALS {
            return Err(Error::NonConvergence {
                what: "adaptive Gauss-Kronrod quadrature",
                iterations: intervals.len(),
            });
        }
        // Split the interval with the largest error estimate.
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.partial_cmp(&b.1 .3).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // The interval is below f64 resolution; keep its value and
            // stop refining it by re-inserting with zero error.
            let (v, _) = gk15_panel(f, lo, hi);
            intervals.push((lo, hi, v, 0.0));
            continue;
        }
        let (lv, le) = gk15_panel(f, lo, mid);
        let (rv, re) = gk15_panel(f, mid, hi);
        intervals.push((lo, mid, lv, le));
        intervals.push((mid, hi, rv, re));
    }
}
