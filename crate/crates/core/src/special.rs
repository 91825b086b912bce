//! Numerically careful kernels behind the logarithmic and Stolarsky means.

use crate::error::{MeanError, Result};

/// Below this `|b/a - 1|` the logarithmic mean switches to its power series.
pub const LOG_SERIES_BAND: f64 = 1e-4;

/// Stolarsky means fall back to the guarded evaluation when two arguments
/// are closer than this (relative to the larger one).
pub const STOLARSKY_GUARD_GAP: f64 = 1e-6;

/// Relative size of the four perturbations averaged by the guarded path.
/// The averaging cancels first-order terms, so the error is of order
/// `STOLARSKY_GUARD_STEP^2`, well inside 1e-8 relative.
pub const STOLARSKY_GUARD_STEP: f64 = 1e-5;

/// `(b - a) / (ln b - ln a)` for positive `a`, `b`.
///
/// Near the diagonal `t / ln(1 + t)` is summed as a series in
/// `t = b/a - 1`; elsewhere `ln_1p` keeps the denominator accurate.
pub fn log_mean(a: f64, b: f64) -> f64 {
    if a == b {
        return a;
    }
    let t = (b - a) / a;
    if t.abs() < LOG_SERIES_BAND {
        // t/ln(1+t) = 1 + t/2 - t^2/12 + t^3/24 - 19 t^4/720 + O(t^5)
        a * (1.0 + t * (0.5 + t * (-1.0 / 12.0 + t * (1.0 / 24.0 - t * (19.0 / 720.0)))))
    } else {
        (b - a) / t.ln_1p()
    }
}

/// First divided difference of `ln`: `(ln b - ln a) / (b - a)`.
fn dd1_log(a: f64, b: f64) -> f64 {
    1.0 / log_mean(a, b)
}

/// First divided difference of `x ln x`.
fn dd1_xlogx(a: f64, b: f64) -> f64 {
    // (b ln b - a ln a)/(b - a) = ln a + b (ln b - ln a)/(b - a)
    a.ln() + b / log_mean(a, b)
}

/// Second divided difference of `g` given its first divided difference.
/// The arguments are sorted so the final division is by the widest gap.
fn dd2(first: fn(f64, f64) -> f64, x: [f64; 3]) -> f64 {
    let mut s = x;
    s.sort_by(f64::total_cmp);
    (first(s[0], s[1]) - first(s[1], s[2])) / (s[0] - s[2])
}

/// Smallest pairwise gap relative to the larger member of the pair.
pub fn min_relative_gap(x: [f64; 3]) -> f64 {
    let gap = |p: f64, q: f64| (p - q).abs() / p.max(q);
    gap(x[0], x[1]).min(gap(x[0], x[2])).min(gap(x[1], x[2]))
}

fn u0_direct(x: [f64; 3]) -> Option<f64> {
    let d = dd2(dd1_log, x);
    (d < 0.0).then(|| (-0.5 / d).sqrt())
}

fn u1_direct(x: [f64; 3]) -> Option<f64> {
    let d = dd2(dd1_xlogx, x);
    (d > 0.0).then(|| 0.5 / d)
}

fn guarded(name: &str, direct: fn([f64; 3]) -> Option<f64>, x: [f64; 3]) -> Result<f64> {
    let fail = || MeanError::DegenerateLimit(name.to_string());
    if min_relative_gap(x) >= STOLARSKY_GUARD_GAP {
        return direct(x).filter(|v| v.is_finite()).ok_or_else(fail);
    }
    let mut s = x;
    s.sort_by(f64::total_cmp);
    let h = STOLARSKY_GUARD_STEP;
    // zero-sum sign patterns on the sorted triple; each keeps every pair at
    // least ~h apart
    const PATTERNS: [[f64; 3]; 4] = [[-1.0, 0.0, 1.0], [1.0, 0.0, -1.0], [0.0, -1.0, 1.0], [0.0, 1.0, -1.0]];
    let mut sum = 0.0;
    for pat in PATTERNS {
        let p = [
            s[0] * (1.0 + pat[0] * h),
            s[1] * (1.0 + pat[1] * h),
            s[2] * (1.0 + pat[2] * h),
        ];
        match direct(p) {
            Some(v) if v.is_finite() => sum += v,
            _ => return Err(fail()),
        }
    }
    Ok(sum / 4.0)
}

/// Stolarsky's `U0`: `sqrt(-1 / (2 [a,b,c] ln))`.
pub fn stolarsky_u0(a: f64, b: f64, c: f64) -> Result<f64> {
    guarded("U0", u0_direct, [a, b, c])
}

/// Stolarsky's `U1`: `1 / (2 [a,b,c] x ln x)`.
pub fn stolarsky_u1(a: f64, b: f64, c: f64) -> Result<f64> {
    guarded("U1", u1_direct, [a, b, c])
}

#[cfg(test)]
mod tests {
    use super::*;

    // the formulas exactly as written with raw logarithms
    fn u0_naive(a: f64, b: f64, c: f64) -> f64 {
        let num = 0.5 * (a - c) * (b - c) * (a - b);
        let den = a * b.ln() - a * c.ln() + a.ln() * c - b.ln() * c - a.ln() * b + c.ln() * b;
        (num / den).sqrt()
    }

    fn u1_naive(a: f64, b: f64, c: f64) -> f64 {
        0.5 * (b - c) * (a - c) * (a - b) / (a * (b - c) * a.ln() - b * (a - c) * b.ln() + c * (a - b) * c.ln())
    }

    #[test]
    fn log_mean_matches_reciprocal_ln2() {
        let v = log_mean(1.0, 2.0);
        assert!((v - 1.0 / std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(log_mean(3.0, 3.0), 3.0);
    }

    #[test]
    fn log_mean_series_is_continuous_across_band() {
        for a in [0.37, 1.0, 8.5] {
            let below = log_mean(a, a * (1.0 + LOG_SERIES_BAND * (1.0 - 1e-9)));
            let above = log_mean(a, a * (1.0 + LOG_SERIES_BAND * (1.0 + 1e-9)));
            assert!(((above - below) / a).abs() < 1e-12, "{a}: {below} vs {above}");
        }
    }

    #[test]
    fn log_mean_near_diagonal_precision() {
        // reference: the series carried two more terms, 3t^5/160 - 863t^6/60480
        for t in [1e-5f64, -3e-5, 9e-5, 2e-8] {
            let exact =
                1.0 + t / 2.0 - t * t / 12.0 + t.powi(3) / 24.0 - 19.0 * t.powi(4) / 720.0 + 3.0 * t.powi(5) / 160.0;
            let v = log_mean(1.0, 1.0 + t);
            assert!(((v - exact) / exact).abs() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn stolarsky_match_written_formulas_off_diagonal() {
        for (a, b, c) in [(1.0, 2.0, 3.0), (0.2, 5.0, 9.0), (7.0, 0.5, 1.1)] {
            let u0 = stolarsky_u0(a, b, c).unwrap();
            let u1 = stolarsky_u1(a, b, c).unwrap();
            assert!(((u0 - u0_naive(a, b, c)) / u0).abs() < 1e-12);
            assert!(((u1 - u1_naive(a, b, c)) / u1).abs() < 1e-12);
        }
    }

    #[test]
    fn stolarsky_reference_values() {
        // sqrt(1/(2 ln 2 - ln 3)) and 1/(3 ln 3 - 4 ln 2)
        let u0 = (1.0 / (2.0 * 2f64.ln() - 3f64.ln())).sqrt();
        let u1 = 1.0 / (3.0 * 3f64.ln() - 4.0 * 2f64.ln());
        assert!((stolarsky_u0(1.0, 2.0, 3.0).unwrap() - u0).abs() < 1e-14);
        assert!((stolarsky_u1(1.0, 2.0, 3.0).unwrap() - u1).abs() < 1e-14);
        // commonly quoted six-digit approximations
        assert!((u1 - 1.911137).abs() < 5e-6);
        assert!((u0 - 1.864415).abs() < 5e-6);
    }

    #[test]
    fn stolarsky_ties_are_handled() {
        // two equal arguments: stable formula and guarded path agree
        let direct = u1_direct([2.0, 2.0, 5.0]).unwrap();
        let guarded = stolarsky_u1(2.0, 2.0, 5.0).unwrap();
        assert!(((direct - guarded) / direct).abs() < 1e-8);
        let direct = u0_direct([2.0, 2.0, 5.0]).unwrap();
        let guarded = stolarsky_u0(2.0, 2.0, 5.0).unwrap();
        assert!(((direct - guarded) / direct).abs() < 1e-8);
    }

    #[test]
    fn stolarsky_near_diagonal_is_close_to_center() {
        let x = 1.7;
        for f in [stolarsky_u0, stolarsky_u1] {
            let v = f(x, x * (1.0 + 1e-9), x * (1.0 - 2e-9)).unwrap();
            assert!(((v - x) / x).abs() < 1e-8);
        }
    }
}
