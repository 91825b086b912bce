//! The catalog of classical means and the string ids used to name them.
//!
//! | id            | arity | mean                                        |
//! |---------------|-------|---------------------------------------------|
//! | `A2`, `A3`    | 2, 3  | arithmetic                                  |
//! | `G2`, `G3`    | 2, 3  | geometric                                   |
//! | `H2`, `H3`    | 2, 3  | harmonic                                    |
//! | `Ap:<p>`      | 2, 3  | power mean of order `p` (`p != 0`, `|p| <= 20`) |
//! | `A12`         | 2, 3  | power mean of order 1/2                     |
//! | `lh:<p>`      | 2     | Lehmer mean                                 |
//! | `LH:<p>`      | 3     | Lehmer mean                                 |
//! | `L`           | 2     | logarithmic mean                            |
//! | `U0`, `U1`    | 3     | Stolarsky's divided-difference means        |
//! | `Qroot`       | 3     | `sqrt((ab + ac + bc) / 3)`                  |
//! | `min`, `max`  | 2, 3  |                                             |
//! | `W:<w>`       | 2     | `w a + (1 - w) b`                           |
//! | `WG:<w>`      | 2     | `a^w b^(1 - w)`                             |
//! | `W3:<u>,<v>`  | 3     | `u a + v b + (1 - u - v) c`                 |
//! | `L3`          | 3     | invariant mean of `L`                       |
//! | `inv:<id>`    | 3     | invariant mean of the two-variable `<id>`   |
//!
//! Parameters accept integers, fractions (`1/3`) or decimals.

use num_rational::Rational64;
use num_traits::{FromPrimitive, Num};

use crate::error::{MeanError, Result};
use crate::mean::{DiagonalDerivatives2, Domain, Mean2, Mean3, MeanFlags};
use crate::special;
use crate::type1::{self, ToleranceConfig};

/// Largest `|p|` accepted for power and Lehmer means.
pub const MAX_EXPONENT: f64 = 20.0;

/// A parsed numeric parameter, kept exact when the text was a fraction,
/// an integer or a short decimal.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub value: f64,
    pub exact: Option<Rational64>,
    pub text: String,
}

impl Param {
    pub fn parse(text: &str) -> Result<Param> {
        let text = text.trim();
        let bad = || MeanError::InvalidParameter(format!("cannot parse parameter {text:?}"));
        let exact = if let Some((n, d)) = text.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Some(Rational64::new(n, d))
        } else {
            parse_decimal(text)
        };
        let value = match exact {
            Some(r) => r.to_f64_checked(),
            None => text.parse::<f64>().map_err(|_| bad())?,
        };
        if !value.is_finite() {
            return Err(bad());
        }
        Ok(Param {
            value,
            exact,
            text: text.to_string(),
        })
    }

    fn exact_or_float(value: f64) -> Param {
        Param {
            value,
            exact: None,
            text: format!("{value}"),
        }
    }
}

trait ToF64Checked {
    fn to_f64_checked(&self) -> f64;
}

impl ToF64Checked for Rational64 {
    fn to_f64_checked(&self) -> f64 {
        crate::mean::ratio_to_f64(*self)
    }
}

fn parse_decimal(text: &str) -> Option<Rational64> {
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty()
        || !int.bytes().all(|c| c.is_ascii_digit())
        || !frac.bytes().all(|c| c.is_ascii_digit())
        || int.len() + frac.len() > 15
    {
        return None;
    }
    let digits: i64 = format!("{int}{frac}").parse().ok()?;
    let r = Rational64::new(digits, 10i64.pow(frac.len() as u32));
    Some(if neg { -r } else { r })
}

fn q<T: Num + FromPrimitive>(n: i64, d: i64) -> T {
    T::from_i64(n).unwrap() / T::from_i64(d).unwrap()
}

/// `f''(1)` and `f''''(1)` for `f(x) = A_p(1, x)`.
pub fn power_diagonal<T: Num + FromPrimitive + Clone>(p: T) -> (T, T) {
    let p2 = p.clone() * p.clone();
    let p3 = p2.clone() * p.clone();
    let d2 = (p.clone() - T::one()) * q(1, 4);
    let d4 = p3 * q(-1, 8) + p2 * q(3, 16) + p * q(7, 8) - q(15, 16);
    (d2, d4)
}

/// `f''(1)` and `f''''(1)` for `f(x) = lh_p(1, x)`.
pub fn lehmer_diagonal<T: Num + FromPrimitive + Clone>(p: T) -> (T, T) {
    let p2 = p.clone() * p.clone();
    let p3 = p2.clone() * p.clone();
    let d2 = (p.clone() - T::one()) * q(1, 2);
    let d4 = p3 * q(-1, 2) + p2 * q(3, 2) + p * q(1, 2) - q(3, 2);
    (d2, d4)
}

fn diagonal_from(
    param: &Param,
    f: impl Fn(Rational64) -> (Rational64, Rational64),
    g: impl Fn(f64) -> (f64, f64),
) -> DiagonalDerivatives2 {
    match param.exact {
        Some(r) => {
            let (d2, d4) = f(r);
            DiagonalDerivatives2::exact(d2, d4)
        }
        None => {
            let (d2, d4) = g(param.value);
            DiagonalDerivatives2::new(d2, d4)
        }
    }
}

fn rational(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

pub fn arithmetic2() -> Mean2 {
    Mean2::new("A2", MeanFlags::CLASSICAL, |a, b| 0.5 * (a + b))
        .with_domain(Domain::Real)
        .with_diagonal(DiagonalDerivatives2::exact(rational(0, 1), rational(0, 1)))
}

pub fn arithmetic3() -> Mean3 {
    Mean3::new("A3", MeanFlags::CLASSICAL, |a, b, c| (a + b + c) / 3.0).with_domain(Domain::Real)
}

pub fn geometric2() -> Mean2 {
    Mean2::new("G2", MeanFlags::CLASSICAL, |a, b| a.sqrt() * b.sqrt())
        .with_diagonal(DiagonalDerivatives2::exact(rational(-1, 4), rational(-15, 16)))
}

pub fn geometric3() -> Mean3 {
    Mean3::new("G3", MeanFlags::CLASSICAL, |a, b, c| a.cbrt() * b.cbrt() * c.cbrt())
}

pub fn harmonic2() -> Mean2 {
    Mean2::new("H2", MeanFlags::CLASSICAL, |a, b| 2.0 * a * b / (a + b))
        .with_diagonal(DiagonalDerivatives2::exact(rational(-1, 2), rational(-3, 2)))
}

pub fn harmonic3() -> Mean3 {
    Mean3::new("H3", MeanFlags::CLASSICAL, |a, b, c| {
        3.0 * a * b * c / (a * b + a * c + b * c)
    })
}

fn check_exponent(p: &Param, allow_zero: bool) -> Result<()> {
    if (!allow_zero && p.value == 0.0) || p.value.abs() > MAX_EXPONENT {
        return Err(MeanError::InvalidParameter(format!(
            "exponent {} outside the supported range (0 < |p| <= {MAX_EXPONENT})",
            p.text
        )));
    }
    Ok(())
}

/// `((x_1^p + ... + x_n^p) / n)^(1/p)`, scaled so no power overflows.
fn power_mean(p: f64, xs: &[f64]) -> f64 {
    let scale = if p > 0.0 {
        xs.iter().copied().fold(f64::MIN, f64::max)
    } else {
        xs.iter().copied().fold(f64::MAX, f64::min)
    };
    let avg = xs.iter().map(|x| (x / scale).powf(p)).sum::<f64>() / xs.len() as f64;
    scale * avg.powf(1.0 / p)
}

fn lehmer_mean(p: f64, xs: &[f64]) -> f64 {
    let scale = xs.iter().copied().fold(f64::MIN, f64::max);
    let num: f64 = xs.iter().map(|x| (x / scale).powf(p)).sum();
    let den: f64 = xs.iter().map(|x| (x / scale).powf(p - 1.0)).sum();
    scale * num / den
}

pub fn power2_param(p: Param) -> Result<Mean2> {
    check_exponent(&p, false)?;
    let diag = diagonal_from(&p, power_diagonal, power_diagonal);
    let v = p.value;
    Ok(Mean2::new(format!("Ap:{}", p.text), MeanFlags::CLASSICAL, move |a, b| {
        power_mean(v, &[a, b])
    })
    .with_diagonal(diag))
}

pub fn power3_param(p: Param) -> Result<Mean3> {
    check_exponent(&p, false)?;
    let v = p.value;
    Ok(Mean3::new(
        format!("Ap:{}", p.text),
        MeanFlags::CLASSICAL,
        move |a, b, c| power_mean(v, &[a, b, c]),
    ))
}

/// Power mean `A_p` in two variables.
pub fn power2(p: f64) -> Result<Mean2> {
    power2_param(Param::exact_or_float(p))
}

pub fn power3(p: f64) -> Result<Mean3> {
    power3_param(Param::exact_or_float(p))
}

/// `A_{1/2}`, the power mean of order one half.
pub fn a12_2() -> Mean2 {
    power2_param(Param::parse("1/2").unwrap()).unwrap().with_id("A12")
}

pub fn a12_3() -> Mean3 {
    power3_param(Param::parse("1/2").unwrap()).unwrap().with_id("A12")
}

/// Lehmer means are isotone exactly when `0 <= p <= 1`.
fn lehmer_flags(p: f64) -> MeanFlags {
    MeanFlags {
        isotone: (0.0..=1.0).contains(&p),
        ..MeanFlags::CLASSICAL
    }
}

pub fn lehmer2_param(p: Param) -> Result<Mean2> {
    check_exponent(&p, true)?;
    let diag = diagonal_from(&p, lehmer_diagonal, lehmer_diagonal);
    let v = p.value;
    Ok(Mean2::new(format!("lh:{}", p.text), lehmer_flags(v), move |a, b| {
        lehmer_mean(v, &[a, b])
    })
    .with_diagonal(diag))
}

pub fn lehmer3_param(p: Param) -> Result<Mean3> {
    check_exponent(&p, true)?;
    let v = p.value;
    Ok(Mean3::new(format!("LH:{}", p.text), lehmer_flags(v), move |a, b, c| {
        lehmer_mean(v, &[a, b, c])
    }))
}

/// Lehmer mean `lh_p(a, b) = (a^p + b^p) / (a^(p-1) + b^(p-1))`.
pub fn lehmer2(p: f64) -> Result<Mean2> {
    lehmer2_param(Param::exact_or_float(p))
}

pub fn lehmer3(p: f64) -> Result<Mean3> {
    lehmer3_param(Param::exact_or_float(p))
}

/// The logarithmic mean `(b - a) / (ln b - ln a)`.
pub fn logarithmic() -> Mean2 {
    Mean2::new("L", MeanFlags::CLASSICAL, special::log_mean).with_diagonal(logmean_diagonal_data())
}

/// `f''(1) = -1/6`, `f''''(1) = -19/30` for `f(x) = (x - 1) / ln x`.
pub fn logmean_diagonal_data() -> DiagonalDerivatives2 {
    DiagonalDerivatives2::exact(rational(-1, 6), rational(-19, 30))
}

/// Stolarsky means are isotone and smooth, but the near-diagonal guard makes
/// their evaluation non-smooth at the 1e-10 level, so they are not offered
/// to finite-difference consumers as analytic.
const STOLARSKY_FLAGS: MeanFlags = MeanFlags {
    analytic: false,
    ..MeanFlags::CLASSICAL
};

pub fn stolarsky_u0() -> Mean3 {
    Mean3::try_new("U0", STOLARSKY_FLAGS, special::stolarsky_u0)
}

pub fn stolarsky_u1() -> Mean3 {
    Mean3::try_new("U1", STOLARSKY_FLAGS, special::stolarsky_u1)
}

/// `sqrt((ab + ac + bc) / 3)`.
pub fn qroot() -> Mean3 {
    Mean3::new("Qroot", MeanFlags::CLASSICAL, |a, b, c| {
        ((a * b + a * c + b * c) / 3.0).sqrt()
    })
}

const ORDER_FLAGS: MeanFlags = MeanFlags {
    symmetric: true,
    strict: false,
    isotone: true,
    homogeneous: true,
    analytic: false,
};

pub fn minimum2() -> Mean2 {
    Mean2::new("min", ORDER_FLAGS, f64::min)
}

pub fn maximum2() -> Mean2 {
    Mean2::new("max", ORDER_FLAGS, f64::max)
}

pub fn minimum3() -> Mean3 {
    Mean3::new("min", ORDER_FLAGS, |a, b, c| a.min(b).min(c))
}

pub fn maximum3() -> Mean3 {
    Mean3::new("max", ORDER_FLAGS, |a, b, c| a.max(b).max(c))
}

fn weight_flags(ws: &[f64]) -> MeanFlags {
    MeanFlags {
        symmetric: ws.windows(2).all(|w| w[0] == w[1]),
        strict: ws.iter().all(|&w| w > 0.0),
        isotone: true,
        homogeneous: true,
        analytic: true,
    }
}

fn check_weights(ws: &[f64]) -> Result<()> {
    if ws.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(MeanError::InvalidParameter(format!(
            "weights {ws:?} must lie in [0, 1]"
        )));
    }
    Ok(())
}

/// `w a + (1 - w) b`; symmetric only for `w = 1/2`.
pub fn weighted_arithmetic2(w: f64) -> Result<Mean2> {
    check_weights(&[w, 1.0 - w])?;
    Ok(Mean2::new(format!("W:{w}"), weight_flags(&[w, 1.0 - w]), move |a, b| {
        w * a + (1.0 - w) * b
    })
    .with_domain(Domain::Real))
}

/// `u a + v b + (1 - u - v) c`.
pub fn weighted_arithmetic3(u: f64, v: f64) -> Result<Mean3> {
    let w = 1.0 - u - v;
    check_weights(&[u, v, w])?;
    Ok(
        Mean3::new(format!("W3:{u},{v}"), weight_flags(&[u, v, w]), move |a, b, c| {
            u * a + v * b + w * c
        })
        .with_domain(Domain::Real),
    )
}

/// `a^w b^(1 - w)`.
pub fn weighted_geometric2(w: f64) -> Result<Mean2> {
    check_weights(&[w, 1.0 - w])?;
    Ok(Mean2::new(
        format!("WG:{w}"),
        weight_flags(&[w, 1.0 - w]),
        move |a, b| a.powf(w) * b.powf(1.0 - w),
    ))
}

/// Options used when an id names a constructed mean.
#[derive(Debug, Clone, Default)]
pub struct ResolveOptions {
    pub tolerance: ToleranceConfig,
    /// Let `inv:<id>` accept a base mean that is not flagged isotone.
    pub allow_non_isotone: bool,
}

/// Resolves a two-variable catalog id.
pub fn mean2(id: &str) -> Result<Mean2> {
    let id = id.trim();
    let unknown = || MeanError::UnknownMean(id.to_string());
    Ok(match id {
        "A2" => arithmetic2(),
        "G2" => geometric2(),
        "H2" => harmonic2(),
        "L" => logarithmic(),
        "A12" => a12_2(),
        "min" => minimum2(),
        "max" => maximum2(),
        _ => {
            let (kind, arg) = id.split_once(':').ok_or_else(unknown)?;
            match kind {
                "Ap" => power2_param(Param::parse(arg)?)?,
                "lh" => lehmer2_param(Param::parse(arg)?)?,
                "W" => weighted_arithmetic2(Param::parse(arg)?.value)?,
                "WG" => weighted_geometric2(Param::parse(arg)?.value)?,
                _ => return Err(unknown()),
            }
        }
    })
}

/// Resolves a three-variable catalog id with default options.
pub fn mean3(id: &str) -> Result<Mean3> {
    mean3_with(id, &ResolveOptions::default())
}

pub fn mean3_with(id: &str, opts: &ResolveOptions) -> Result<Mean3> {
    let id = id.trim();
    let unknown = || MeanError::UnknownMean(id.to_string());
    Ok(match id {
        "A3" => arithmetic3(),
        "G3" => geometric3(),
        "H3" => harmonic3(),
        "U0" => stolarsky_u0(),
        "U1" => stolarsky_u1(),
        "Qroot" => qroot(),
        "A12" => a12_3(),
        "min" => minimum3(),
        "max" => maximum3(),
        "L3" => type1::construct_invariant(&logarithmic(), &opts.tolerance)?.with_id("L3"),
        _ => {
            let (kind, arg) = id.split_once(':').ok_or_else(unknown)?;
            match kind {
                "Ap" => power3_param(Param::parse(arg)?)?,
                "LH" => lehmer3_param(Param::parse(arg)?)?,
                "W3" => {
                    let (u, v) = arg.split_once(',').ok_or_else(unknown)?;
                    weighted_arithmetic3(Param::parse(u)?.value, Param::parse(v)?.value)?
                }
                "inv" => {
                    let base = mean2(arg)?;
                    if opts.allow_non_isotone {
                        type1::construct_invariant_unchecked(&base, &opts.tolerance)?
                    } else {
                        type1::construct_invariant(&base, &opts.tolerance)?
                    }
                }
                _ => return Err(unknown()),
            }
        }
    })
}

/// Ids of the fixed (parameter-free) two-variable entries.
pub const FIXED_IDS2: &[&str] = &["A2", "G2", "H2", "L", "A12", "min", "max"];

/// Ids of the fixed three-variable entries.
pub const FIXED_IDS3: &[&str] = &["A3", "G3", "H3", "U0", "U1", "Qroot", "A12", "min", "max", "L3"];

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn log_mean_value() {
        let l = mean2("L").unwrap();
        // L(1,2) = 1/ln 2
        assert!(close(l.eval(1.0, 2.0).unwrap(), std::f64::consts::LOG2_E, 1e-14));
    }

    #[test]
    fn lehmer_two_at_one_two() {
        let lh = mean2("lh:2").unwrap();
        assert!(close(lh.eval(1.0, 2.0).unwrap(), 5.0 / 3.0, 1e-15));
        assert!(!lh.flags().isotone);
        assert!(mean2("lh:1/2").unwrap().flags().isotone);
    }

    #[test]
    fn power_third_at_one_two_three() {
        let a = mean3("Ap:1/3").unwrap();
        assert!((a.eval(1.0, 2.0, 3.0).unwrap() - 1.87934).abs() < 5e-6);
    }

    #[test]
    fn stolarsky_entries() {
        let u1 = 1.0 / (3.0 * 3f64.ln() - 4.0 * 2f64.ln());
        let u0 = (1.0 / (2.0 * 2f64.ln() - 3f64.ln())).sqrt();
        assert!(close(mean3("U1").unwrap().eval(1.0, 2.0, 3.0).unwrap(), u1, 1e-14));
        assert!(close(mean3("U0").unwrap().eval(1.0, 2.0, 3.0).unwrap(), u0, 1e-14));
    }

    #[test]
    fn every_fixed_id_resolves() {
        for id in FIXED_IDS2 {
            assert_eq!(mean2(id).unwrap().id(), *id);
        }
        for id in FIXED_IDS3 {
            assert_eq!(mean3(id).unwrap().id(), *id);
        }
    }

    #[test]
    fn parameterised_ids() {
        assert_eq!(mean2("Ap:1/3").unwrap().id(), "Ap:1/3");
        assert_eq!(mean3("LH:3").unwrap().id(), "LH:3");
        assert!(mean2("W:2/3").is_ok());
        assert!(mean3("W3:4/7,2/7").is_ok());
        assert!(matches!(mean2("Ap:0"), Err(MeanError::InvalidParameter(_))));
        assert!(matches!(mean2("Ap:25"), Err(MeanError::InvalidParameter(_))));
        assert!(matches!(mean2("nope"), Err(MeanError::UnknownMean(_))));
        assert!(matches!(mean2("A3"), Err(MeanError::UnknownMean(_))));
        assert!(matches!(mean3("Ap:x"), Err(MeanError::InvalidParameter(_))));
    }

    #[test]
    fn constructed_ids() {
        let l3 = mean3("L3").unwrap();
        assert!((l3.eval(1.0, 2.0, 3.0).unwrap() - 1.87917).abs() < 5e-5);
        assert!(l3.is_iterated());
        assert!(matches!(mean3("inv:lh:2"), Err(MeanError::InvalidBaseMean { .. })));
        let opts = ResolveOptions {
            allow_non_isotone: true,
            ..Default::default()
        };
        assert!(mean3_with("inv:lh:2", &opts).is_ok());
    }

    #[test]
    fn params_parse_exactly() {
        assert_eq!(Param::parse("1/3").unwrap().exact, Some(Rational64::new(1, 3)));
        assert_eq!(Param::parse("0.25").unwrap().exact, Some(Rational64::new(1, 4)));
        assert_eq!(Param::parse("-2").unwrap().exact, Some(Rational64::new(-2, 1)));
        assert_eq!(Param::parse("1e-3").unwrap().exact, None);
        assert!(Param::parse("1/0").is_err());
    }

    #[test]
    fn diagonal_data_of_families() {
        // p -> 0 is the geometric mean, p = -1 harmonic
        let (d2, d4) = power_diagonal(Rational64::from_integer(0));
        assert_eq!((d2, d4), (Rational64::new(-1, 4), Rational64::new(-15, 16)));
        let (d2, d4) = power_diagonal(Rational64::from_integer(-1));
        assert_eq!((d2, d4), (Rational64::new(-1, 2), Rational64::new(-3, 2)));
        // lh_1 is arithmetic
        let (d2, d4) = lehmer_diagonal(Rational64::from_integer(1));
        assert_eq!((d2, d4), (Rational64::from_integer(0), Rational64::from_integer(0)));
        // lh_0 is harmonic
        let (d2, d4) = lehmer_diagonal(Rational64::from_integer(0));
        assert_eq!((d2, d4), (Rational64::new(-1, 2), Rational64::new(-3, 2)));
    }

    #[test]
    fn extreme_exponents_stay_finite() {
        let a = mean2("Ap:20").unwrap();
        let v = a.eval(0.1, 10.0).unwrap();
        assert!(v > 0.1 && v < 10.0);
        let a = mean2("Ap:-20").unwrap();
        assert!(a.eval(0.1, 10.0).unwrap().is_finite());
        let lh = mean2("lh:-20").unwrap();
        assert!(lh.eval(0.1, 10.0).unwrap().is_finite());
    }
}
