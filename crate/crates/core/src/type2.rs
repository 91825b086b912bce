//! Type-2 invariance: `M(a, b, m(a,b)) = m(a,b)`.
//!
//! Given a symmetric isotone `M`, `m(a,b)` is the limit of the scalar
//! iteration `c_{k+1} = M(a, b, c_k)`. Conversely any symmetric `m` has a
//! symmetric type-2 partner built piecewise from an arbitrary `n`.

use serde::Serialize;

use crate::deriv::fd_partial3;
use crate::error::{MeanError, Result};
use crate::mean::{Mean2, Mean3, MeanFlags};
use crate::type1::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
    Constant,
}

/// Steps against the recorded direction smaller than this many ulps are
/// treated as rounding noise rather than a loss of monotonicity.
const MONOTONE_SLACK_ULPS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointTrace {
    /// `c_0, c_1, ...`; always recorded (the sequence is short).
    pub values: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub limit: f64,
    pub monotone_direction: Direction,
    /// `M_z(a, b, limit)` by finite differences; only for smooth `M`.
    pub contraction_at_limit: Option<f64>,
}

/// Runs `c_{k+1} = M(a, b, c_k)` from `c_0 = seed(a, b)`.
///
/// `M` must be symmetric. Isotonicity is what makes the sequence monotone;
/// it is checked along the way rather than trusted from the flags, and a
/// reversal is reported as [`MeanError::NonIsotoneM`].
pub fn extract_m(big: &Mean3, a: f64, b: f64, seed: &Mean2, cfg: &ToleranceConfig) -> Result<FixedPointTrace> {
    cfg.validate()?;
    if !big.flags().symmetric {
        return Err(MeanError::InvalidBaseMean {
            id: big.id().to_string(),
            missing: "symmetric".into(),
        });
    }
    let c0 = seed.eval(a, b)?;
    let mut values = vec![c0];
    let mut direction = Direction::Constant;
    let mut c = c0;
    let mut converged = false;
    for k in 0..cfg.max_iter {
        let next = big.eval(a, b, c)?;
        let step = next - c;
        let slack = MONOTONE_SLACK_ULPS * f64::EPSILON * c.abs();
        if direction == Direction::Constant && step.abs() > slack {
            direction = if step > 0.0 {
                Direction::Increasing
            } else {
                Direction::Decreasing
            };
        }
        let reversed = match direction {
            Direction::Increasing => step < -slack,
            Direction::Decreasing => step > slack,
            Direction::Constant => false,
        };
        if reversed {
            return Err(MeanError::NonIsotoneM { step: k + 1 });
        }
        values.push(next);
        c = next;
        if step.abs() < cfg.rel_tol * c.abs() || step == 0.0 {
            converged = true;
            break;
        }
    }
    if !converged {
        let n = values.len();
        return Err(MeanError::NoConvergence {
            iterations: cfg.max_iter,
            spread: (values[n - 1] - values[n - 2]).abs() / c.abs(),
        });
    }
    let contraction_at_limit = if big.flags().analytic {
        fd_partial3(big, [0, 0, 1], [a, b, c]).ok()
    } else {
        None
    };
    Ok(FixedPointTrace {
        iterations: values.len() - 1,
        values,
        converged,
        limit: c,
        monotone_direction: direction,
        contraction_at_limit,
    })
}

/// `M(a, b, m(a,b)) - m(a,b)`.
pub fn check_type2(big: &Mean3, m: &Mean2, a: f64, b: f64) -> Result<f64> {
    let v = m.eval(a, b)?;
    Ok(big.eval(a, b, v)? - v)
}

/// The symmetric type-2 partner of `m` built from `n`:
///
/// ```text
/// n(m(a,b), c)  if c lies between a and b
/// n(m(a,c), b)  if b lies between a and c
/// n(m(c,b), a)  if a lies between b and c
/// ```
///
/// Ties take the first matching row. The result is symmetric whatever `n`
/// is, and `M(a, b, m(a,b)) = m(a,b)` holds by the first row.
pub fn extend_m(m: &Mean2, n: &Mean2) -> Mean3 {
    let (m, n) = (m.clone(), n.clone());
    let between = |lo: f64, x: f64, hi: f64| (lo <= x && x <= hi) || (hi <= x && x <= lo);
    let flags = MeanFlags {
        symmetric: true,
        strict: m.flags().strict && n.flags().strict,
        isotone: m.flags().isotone && n.flags().isotone,
        homogeneous: m.flags().homogeneous && n.flags().homogeneous,
        // only piecewise smooth across the tie planes
        analytic: false,
    };
    let id = format!("ext[{};{}]", m.id(), n.id());
    Mean3::try_new(id, flags, move |a, b, c| {
        if between(a, c, b) {
            n.eval(m.eval(a, b)?, c)
        } else if between(a, b, c) {
            n.eval(m.eval(a, c)?, b)
        } else {
            n.eval(m.eval(c, b)?, a)
        }
    })
}

/// Relative type-2 residual tolerated by [`implicit_derivative`].
pub const TYPE2_MATCH_TOL: f64 = 1e-9;

/// `d/db m(a, b)` from the implicit relation, `M_y / (1 - M_z)` at
/// `(a, b, m(a,b))`.
pub fn implicit_derivative(big: &Mean3, m: &Mean2, a: f64, b: f64) -> Result<f64> {
    let v = m.eval(a, b)?;
    let r = big.eval(a, b, v)? - v;
    if r.abs() > TYPE2_MATCH_TOL * v.abs().max(1.0) {
        return Err(MeanError::Type2Mismatch(r));
    }
    let my = fd_partial3(big, [0, 1, 0], [a, b, v])?;
    let mz = fd_partial3(big, [0, 0, 1], [a, b, v])?;
    if mz >= 1.0 - 1e-9 {
        return Err(MeanError::ContractionViolation(mz));
    }
    Ok(my / (1.0 - mz))
}
