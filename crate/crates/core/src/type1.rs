//! Type-1 invariance: `M(m(a,c), m(a,b), m(b,c)) = M(a,b,c)`.
//!
//! The invariant mean of a strict, isotone, symmetric `m` is the common
//! limit of the triple recursion
//!
//! ```text
//! a' = m(a, c),   b' = m(c, b),   c' = m(a, b)
//! ```
//!
//! This module builds it, checks candidate pairs, and provides the
//! `phi`-map tools and the two-point candidate extraction used to show that
//! a given `M` is not invariant for any `m`.

use serde::Serialize;

use crate::error::{MeanError, Result};
use crate::mean::{Mean2, Mean3, MeanFlags};

/// Stopping rule for the iterations in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToleranceConfig {
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Record every state of the iteration, not just the limit.
    pub trace_states: bool,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            rel_tol: 1e-14,
            max_iter: 200,
            trace_states: false,
        }
    }
}

impl ToleranceConfig {
    /// Defaults for the scalar type-2 fixed point, which may contract slowly.
    pub fn fixed_point() -> Self {
        ToleranceConfig {
            max_iter: 500,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(MeanError::InvalidParameter(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(MeanError::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// States of the triple recursion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleTrace {
    /// Initial state first; empty unless `trace_states` was requested.
    pub states: Vec<[f64; 3]>,
    pub converged: bool,
    pub iterations: usize,
    /// Final `c` component.
    pub limit: f64,
    pub tol: f64,
}

/// One step of the recursion.
pub fn step_triple(m: &Mean2, s: [f64; 3]) -> Result<[f64; 3]> {
    let [a, b, c] = s;
    Ok([m.eval(a, c)?, m.eval(c, b)?, m.eval(a, b)?])
}

fn spread(s: [f64; 3]) -> f64 {
    let hi = s[0].max(s[1]).max(s[2]);
    let lo = s[0].min(s[1]).min(s[2]);
    hi / lo - 1.0
}

/// Runs the recursion from `start` until the relative spread of the triple
/// falls below `cfg.rel_tol`.
pub fn run_triple(m: &Mean2, start: [f64; 3], cfg: &ToleranceConfig) -> Result<TripleTrace> {
    for x in start {
        if !(x > 0.0 && x.is_finite()) {
            return Err(MeanError::NonPositiveInput(x));
        }
    }
    let mut s = start;
    let mut states = Vec::new();
    if cfg.trace_states {
        states.push(s);
    }
    let mut iterations = 0;
    while spread(s) >= cfg.rel_tol {
        if iterations == cfg.max_iter {
            return Err(MeanError::NoConvergence {
                iterations,
                spread: spread(s),
            });
        }
        s = step_triple(m, s)?;
        iterations += 1;
        if cfg.trace_states {
            states.push(s);
        }
    }
    Ok(TripleTrace {
        states,
        converged: true,
        iterations,
        limit: s[2],
        tol: cfg.rel_tol,
    })
}

const TYPE1_BASE: MeanFlags = MeanFlags {
    symmetric: true,
    strict: true,
    isotone: true,
    homogeneous: false,
    analytic: false,
};

/// The invariant mean of `m`, evaluated by running the recursion.
///
/// Requires `m` to be strict, isotone and symmetric.
pub fn construct_invariant(m: &Mean2, cfg: &ToleranceConfig) -> Result<Mean3> {
    require(m, TYPE1_BASE)?;
    build(m, cfg)
}

/// As [`construct_invariant`] but without the isotonicity requirement.
///
/// The recursion still converges for some non-isotone means (Lehmer means
/// with `p > 1` on moderate boxes); the result is only as trustworthy as
/// the convergence check.
pub fn construct_invariant_unchecked(m: &Mean2, cfg: &ToleranceConfig) -> Result<Mean3> {
    require(
        m,
        MeanFlags {
            isotone: false,
            ..TYPE1_BASE
        },
    )?;
    build(m, cfg)
}

fn require(m: &Mean2, need: MeanFlags) -> Result<()> {
    let missing = m.flags().missing(need);
    if missing.is_empty() {
        Ok(())
    } else {
        Err(MeanError::InvalidBaseMean {
            id: m.id().to_string(),
            missing: missing.join(", "),
        })
    }
}

fn build(m: &Mean2, cfg: &ToleranceConfig) -> Result<Mean3> {
    cfg.validate()?;
    let flags = MeanFlags {
        symmetric: true,
        strict: true,
        isotone: true,
        homogeneous: m.flags().homogeneous,
        analytic: m.flags().analytic,
    };
    let base = m.clone();
    let cfg = ToleranceConfig {
        trace_states: false,
        ..*cfg
    };
    Ok(Mean3::try_new(format!("inv:{}", m.id()), flags, move |a, b, c| {
        run_triple(&base, [a, b, c], &cfg).map(|t| t.limit)
    })
    .iterated(true))
}

/// `M(m(a,c), m(a,b), m(b,c)) - M(a,b,c)`.
pub fn check_type1(big: &Mean3, m: &Mean2, p: [f64; 3]) -> Result<f64> {
    let [a, b, c] = p;
    let lhs = big.eval(m.eval(a, c)?, m.eval(a, b)?, m.eval(b, c)?)?;
    Ok(lhs - big.eval(a, b, c)?)
}

/// `phi(N)(a,b,c) = N(m(a,c), m(a,b), m(c,b))`.
pub fn phi_apply(n: &Mean3, m: &Mean2) -> Mean3 {
    let (outer, inner) = (n.clone(), m.clone());
    let flags = MeanFlags {
        symmetric: n.flags().symmetric && m.flags().symmetric,
        ..n.flags().and(m.flags())
    };
    Mean3::try_new(format!("phi[{};{}]", n.id(), m.id()), flags, move |a, b, c| {
        let s = step_triple(&inner, [a, b, c])?;
        outer.eval(s[0], s[2], s[1])
    })
    .iterated(n.is_iterated())
}

/// Values `phi^[k](N)(p)` for `k = 1, 2, ...`.
///
/// Since `phi^[k](N)(p) = N(T^k p)` with `T(a,b,c) = (m(a,c), m(a,b), m(c,b))`,
/// this iterates `T` once and evaluates `N` along the orbit. Stops when successive
/// values agree to `rel_tol` and the triple itself has collapsed to within
/// `10 rel_tol`, so a momentary plateau of `N` does not end the sequence.
pub fn phi_iterate(n: &Mean3, m: &Mean2, p: [f64; 3], cfg: &ToleranceConfig) -> Result<Vec<f64>> {
    require(m, TYPE1_BASE)?;
    cfg.validate()?;
    let mut s = p;
    let mut values: Vec<f64> = Vec::new();
    for _ in 0..cfg.max_iter {
        let t = step_triple(m, s)?;
        s = [t[0], t[2], t[1]];
        let v = n.eval_at(s)?;
        if let Some(&prev) = values.last() {
            let settled = (v - prev).abs() < cfg.rel_tol * v.abs();
            values.push(v);
            if settled && spread(s) < 10.0 * cfg.rel_tol {
                return Ok(values);
            }
        } else {
            values.push(v);
        }
    }
    Err(MeanError::NoConvergence {
        iterations: cfg.max_iter,
        spread: spread(s),
    })
}

/// Sign of `phi(N) - N` over a sample set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EnvelopeSign {
    /// `phi(N) <= N` everywhere (so the invariant mean lies below `N`).
    #[serde(rename = "<=")]
    Below,
    /// `phi(N) >= N` everywhere.
    #[serde(rename = ">=")]
    Above,
    /// Every residual is within the noise threshold.
    #[serde(rename = "=")]
    Equal,
    #[serde(rename = "mixed")]
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub sign: EnvelopeSign,
    /// For `Mixed`, one point of each sign (negative first).
    pub witnesses: Vec<([f64; 3], f64)>,
    pub samples: usize,
    pub max_abs_residual: f64,
}

/// Classifies `N(m(a,c), m(a,b), m(c,b)) - N(a,b,c)` over `samples`.
/// Residuals within `noise` (relative to `N(a,b,c)`) count as zero.
pub fn envelope_test(n: &Mean3, m: &Mean2, samples: &[[f64; 3]], noise: f64) -> Result<EnvelopeReport> {
    let phi = phi_apply(n, m);
    let mut neg: Option<([f64; 3], f64)> = None;
    let mut pos: Option<([f64; 3], f64)> = None;
    let mut max_abs: f64 = 0.0;
    for &p in samples {
        let base = n.eval_at(p)?;
        let r = phi.eval_at(p)? - base;
        max_abs = max_abs.max(r.abs());
        let thresh = noise * base.abs();
        if r < -thresh && neg.is_none() {
            neg = Some((p, r));
        } else if r > thresh && pos.is_none() {
            pos = Some((p, r));
        }
    }
    let (sign, witnesses) = match (neg, pos) {
        (Some(a), Some(b)) => (EnvelopeSign::Mixed, vec![a, b]),
        (Some(a), None) => (EnvelopeSign::Below, vec![a]),
        (None, Some(b)) => (EnvelopeSign::Above, vec![b]),
        (None, None) => (EnvelopeSign::Equal, vec![]),
    };
    Ok(EnvelopeReport {
        sign,
        witnesses,
        samples: samples.len(),
        max_abs_residual: max_abs,
    })
}

/// Relative width at which the candidate bisection stops.
pub const CANDIDATE_TOL: f64 = 1e-13;
const CANDIDATE_MAX_ITER: usize = 200;

/// The only value `m(a, b)` can take if `M` is type-1 invariant for `m`.
///
/// Invariance at `(a, b, b)` gives `M(x, x, b) = M(a, b, b)` with
/// `x = m(a, b)`; for strictly isotone `M` the left side is strictly
/// increasing in `x`, so `x` is found by bisection on `[min, max]`.
pub fn necessary_candidate_m(big: &Mean3, a: f64, b: f64) -> Result<f64> {
    let target = big.eval(a, b, b)?;
    if a == b {
        return Ok(a);
    }
    let f = |x: f64| -> Result<f64> { Ok(big.eval(x, x, b)? - target) };
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let (mut flo, fhi) = (f(lo)?, f(hi)?);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(MeanError::NoBracket { lo, hi });
    }
    for _ in 0..CANDIDATE_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= CANDIDATE_TOL * hi || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(MeanError::NoConvergence {
        iterations: CANDIDATE_MAX_ITER,
        spread: (hi - lo) / hi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonInvarianceCertificate {
    pub point: [f64; 3],
    /// Candidates for `m(a,c)`, `m(a,b)`, `m(b,c)`.
    pub candidates: [f64; 3],
    /// The same pairs solved with the roles of the two arguments swapped.
    /// An invariant `M` gives identical values.
    pub swapped_candidates: [f64; 3],
    pub composed: f64,
    pub direct: f64,
    pub gap: f64,
    /// `|gap|` exceeds ten times the bisection tolerance.
    pub certified: bool,
}

/// Builds the candidate `m` pairwise and measures how far `M` is from being
/// invariant for it at `p`. A certified nonzero gap proves `M` is not
/// type-1 invariant for any mean.
pub fn noninvariance_certificate(big: &Mean3, p: [f64; 3]) -> Result<NonInvarianceCertificate> {
    let [a, b, c] = p;
    let cand = [
        necessary_candidate_m(big, a, c)?,
        necessary_candidate_m(big, a, b)?,
        necessary_candidate_m(big, b, c)?,
    ];
    let swapped = [
        necessary_candidate_m(big, c, a)?,
        necessary_candidate_m(big, b, a)?,
        necessary_candidate_m(big, c, b)?,
    ];
    let composed = big.eval(cand[0], cand[1], cand[2])?;
    let direct = big.eval(a, b, c)?;
    let gap = composed - direct;
    Ok(NonInvarianceCertificate {
        point: p,
        candidates: cand,
        swapped_candidates: swapped,
        composed,
        direct,
        gap,
        certified: gap.abs() > 10.0 * CANDIDATE_TOL * direct.abs().max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn step_examples() {
        let a2 = catalog::arithmetic2();
        assert_eq!(step_triple(&a2, [1.0, 2.0, 3.0]).unwrap(), [2.0, 2.5, 1.5]);
        assert_eq!(step_triple(&a2, [4.0, 4.0, 4.0]).unwrap(), [4.0, 4.0, 4.0]);
        let g = step_triple(&catalog::geometric2(), [1.0, 4.0, 2.0]).unwrap();
        assert!((g[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!((g[1] - 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(g[2], 2.0);
    }

    #[test]
    fn constructs_closed_forms() {
        let a = construct_invariant(&catalog::arithmetic2(), &cfg()).unwrap();
        assert!((a.eval(1.0, 2.0, 3.0).unwrap() - 2.0).abs() < 1e-13);
        let g = construct_invariant(&catalog::geometric2(), &cfg()).unwrap();
        assert!((g.eval(1.0, 2.0, 3.0).unwrap() - 6f64.cbrt()).abs() < 1e-12);
        let h = construct_invariant(&catalog::harmonic2(), &cfg()).unwrap();
        assert!((h.eval(1.0, 2.0, 3.0).unwrap() - 18.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn log_mean_invariant_value() {
        let t = run_triple(&catalog::logarithmic(), [1.0, 2.0, 3.0], &cfg()).unwrap();
        // 1.87917297369658276 from a 50-digit run of the same recursion
        assert!((t.limit - 1.879_172_973_696_582_8).abs() < 1e-14);
        assert!(t.iterations <= 60);
    }

    #[test]
    fn trace_ordering() {
        let c = ToleranceConfig {
            trace_states: true,
            ..cfg()
        };
        // a0 <= c0 <= b0
        let t = run_triple(&catalog::logarithmic(), [0.3, 7.0, 2.0], &c).unwrap();
        assert_eq!(t.states.len(), t.iterations + 1);
        for w in t.states.windows(2) {
            let [a, b, c] = w[0];
            assert!(a <= c && c <= b);
            assert!(w[1][0] >= a && w[1][1] <= b);
        }
        assert!(t.limit >= 0.3 && t.limit <= 7.0);
    }

    #[test]
    fn refuses_bad_bases() {
        let err = construct_invariant(&catalog::minimum2(), &cfg()).unwrap_err();
        assert!(matches!(err, MeanError::InvalidBaseMean { .. }));
        let lh2 = catalog::lehmer2(2.0).unwrap();
        assert!(construct_invariant(&lh2, &cfg()).is_err());
        assert!(construct_invariant_unchecked(&lh2, &cfg()).is_ok());
        let w = catalog::weighted_arithmetic2(0.25).unwrap();
        assert!(construct_invariant_unchecked(&w, &cfg()).is_err());
    }

    #[test]
    fn no_convergence_is_reported() {
        let tight = ToleranceConfig { max_iter: 3, ..cfg() };
        let m = construct_invariant(&catalog::logarithmic(), &tight).unwrap();
        assert!(matches!(
            m.eval(1.0, 2.0, 3.0),
            Err(MeanError::NoConvergence { iterations: 3, .. })
        ));
    }

    #[test]
    fn check_type1_examples() {
        let r = check_type1(&catalog::arithmetic3(), &catalog::arithmetic2(), [1.0, 2.0, 3.0]).unwrap();
        assert!(r.abs() < 1e-14);
        let lh3 = catalog::lehmer3(2.0).unwrap();
        let lh2 = catalog::lehmer2(2.0).unwrap();
        // lh2 of (1,3), (1,2), (2,3) is 5/2, 5/3, 13/5; LH2(1,2,3) = 7/3
        let oracle = {
            let (x, y, z) = (2.5f64, 5.0 / 3.0, 2.6);
            (x * x + y * y + z * z) / (x + y + z) - 7.0 / 3.0
        };
        let r = check_type1(&lh3, &lh2, [1.0, 2.0, 3.0]).unwrap();
        assert!((r - oracle).abs() < 1e-15);
        assert!(r < -1e-5);
    }

    #[test]
    fn phi_examples() {
        let a2 = catalog::arithmetic2();
        let p = [1.0, 2.0, 3.0];
        assert_eq!(phi_apply(&catalog::minimum3(), &a2).eval_at(p).unwrap(), 1.5);
        assert_eq!(phi_apply(&catalog::maximum3(), &a2).eval_at(p).unwrap(), 2.5);
        let a3 = catalog::arithmetic3();
        assert!((phi_apply(&a3, &a2).eval_at(p).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn phi_iterate_from_min_and_max() {
        let a2 = catalog::arithmetic2();
        let p = [1.0, 2.0, 3.0];
        let lo = phi_iterate(&catalog::minimum3(), &a2, p, &cfg()).unwrap();
        let hi = phi_iterate(&catalog::maximum3(), &a2, p, &cfg()).unwrap();
        assert!(lo.windows(2).all(|w| w[1] >= w[0]));
        assert!(hi.windows(2).all(|w| w[1] <= w[0]));
        assert!((lo.last().unwrap() - 2.0).abs() < 1e-13);
        assert!((hi.last().unwrap() - 2.0).abs() < 1e-13);
        let flat = phi_iterate(&catalog::arithmetic3(), &a2, p, &cfg()).unwrap();
        assert!(flat.iter().all(|v| (v - 2.0).abs() < 1e-15));
    }

    #[test]
    fn candidates() {
        let q = catalog::qroot();
        let x = necessary_candidate_m(&q, 1.0, 2.0).unwrap();
        assert!((x - (12f64.sqrt() - 2.0)).abs() < 1e-12);
        let x = necessary_candidate_m(&catalog::arithmetic3(), 1.0, 2.0).unwrap();
        assert!((x - 1.5).abs() < 1e-12);
        let x = necessary_candidate_m(&catalog::geometric3(), 1.0, 4.0).unwrap();
        assert!((x - 2.0).abs() < 1e-12);
        assert_eq!(necessary_candidate_m(&q, 3.0, 3.0).unwrap(), 3.0);
    }

    #[test]
    fn no_bracket_for_decreasing_map() {
        // 1/(a+b+c) decreases in every argument, so both ends have the same sign
        let anti = Mean3::new("anti", MeanFlags::CLASSICAL, |a, b, c| 1.0 / (a + b + c));
        let err = necessary_candidate_m(&anti, 1.0, 2.0).unwrap_err();
        assert!(matches!(err, MeanError::NoBracket { .. }));
    }

    #[test]
    fn certificate_for_qroot() {
        let c = noninvariance_certificate(&catalog::qroot(), [1.0, 2.0, 3.0]).unwrap();
        // candidates -b + sqrt(2(b^2 + ab)) for (1,3), (1,2), (2,3)
        let cand = |a: f64, b: f64| -b + (2.0 * (b * b + a * b)).sqrt();
        let (x, y, z) = (cand(1.0, 3.0), cand(1.0, 2.0), cand(2.0, 3.0));
        let composed = ((x * y + x * z + y * z) / 3.0).sqrt();
        assert!((c.composed - composed).abs() < 1e-12);
        assert!((c.direct - (11.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(c.certified && c.gap > 0.009);
        assert!((c.candidates[1] - c.swapped_candidates[1]).abs() > 1e-3);
        for m in [catalog::arithmetic3(), catalog::geometric3()] {
            let c = noninvariance_certificate(&m, [1.0, 2.0, 3.0]).unwrap();
            assert!(c.gap.abs() < 1e-12 && !c.certified);
        }
    }

    #[test]
    fn envelope_signs() {
        let pts = [[1.0, 2.0, 3.0], [0.2, 5.0, 9.0], [4.0, 4.1, 0.5]];
        let l = catalog::logarithmic();
        let above = envelope_test(&catalog::power3(1.0 / 3.0).unwrap(), &l, &pts, 1e-13).unwrap();
        assert_eq!(above.sign, EnvelopeSign::Below);
        let below = envelope_test(&catalog::geometric3(), &l, &pts, 1e-13).unwrap();
        assert_eq!(below.sign, EnvelopeSign::Above);
        let eq = envelope_test(&catalog::arithmetic3(), &catalog::arithmetic2(), &pts, 1e-13).unwrap();
        assert_eq!(eq.sign, EnvelopeSign::Equal);
    }
}
