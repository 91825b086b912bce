//! Two- and three-variable mean descriptors.
//!
//! A descriptor bundles a pure evaluator with the structural properties the
//! algorithms in this crate rely on (symmetry, strictness, isotonicity,
//! homogeneity, smoothness). Descriptors are cheap to clone and immutable;
//! the evaluator sits behind an `Arc` so a descriptor can be shared freely
//! across worker threads.

use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;

use crate::error::{MeanError, Result};

pub type Eval2 = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;
pub type Eval3 = Arc<dyn Fn(f64, f64, f64) -> Result<f64> + Send + Sync>;

/// Structural properties of a mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MeanFlags {
    pub symmetric: bool,
    pub strict: bool,
    pub isotone: bool,
    pub homogeneous: bool,
    pub analytic: bool,
}

impl MeanFlags {
    /// All properties set: the arithmetic, geometric and harmonic families.
    pub const CLASSICAL: MeanFlags = MeanFlags {
        symmetric: true,
        strict: true,
        isotone: true,
        homogeneous: true,
        analytic: true,
    };

    /// Lists the flags required by `need` that `self` lacks.
    pub fn missing(&self, need: MeanFlags) -> Vec<&'static str> {
        let mut out = Vec::new();
        if need.symmetric && !self.symmetric {
            out.push("symmetric");
        }
        if need.strict && !self.strict {
            out.push("strict");
        }
        if need.isotone && !self.isotone {
            out.push("isotone");
        }
        if need.homogeneous && !self.homogeneous {
            out.push("homogeneous");
        }
        if need.analytic && !self.analytic {
            out.push("analytic");
        }
        out
    }

    pub fn and(self, other: MeanFlags) -> MeanFlags {
        MeanFlags {
            symmetric: self.symmetric && other.symmetric,
            strict: self.strict && other.strict,
            isotone: self.isotone && other.isotone,
            homogeneous: self.homogeneous && other.homogeneous,
            analytic: self.analytic && other.analytic,
        }
    }
}

/// Where the evaluator is defined. Every mean accepts positive reals; a few
/// (the affine ones) extend to the whole real line, which matters when they
/// are the inner mean of a conjugation such as `exp(A(log a, log b))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Positive,
    Real,
}

impl Domain {
    fn admits(self, x: f64) -> bool {
        match self {
            Domain::Positive => x > 0.0 && x.is_finite(),
            Domain::Real => x.is_finite(),
        }
    }
}

/// Diagonal derivatives of `f(x) = m(1, x)` at `x = 1`.
///
/// For a smooth symmetric homogeneous mean `f'(1) = 1/2` and
/// `f'''(1) = -3/2 f''(1)`, so `f''(1)` and `f''''(1)` carry all the
/// information needed through fourth order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalDerivatives2 {
    pub d2: f64,
    pub d4: f64,
    /// The same values as exact rationals, when known.
    pub exact: Option<(Rational64, Rational64)>,
}

impl DiagonalDerivatives2 {
    pub fn new(d2: f64, d4: f64) -> Self {
        DiagonalDerivatives2 { d2, d4, exact: None }
    }

    pub fn exact(d2: Rational64, d4: Rational64) -> Self {
        DiagonalDerivatives2 {
            d2: ratio_to_f64(d2),
            d4: ratio_to_f64(d4),
            exact: Some((d2, d4)),
        }
    }

    /// `f'''(1)`, forced by homogeneity.
    pub fn d3(&self) -> f64 {
        -1.5 * self.d2
    }
}

pub(crate) fn ratio_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// A mean in two variables.
#[derive(Clone)]
pub struct Mean2 {
    id: String,
    flags: MeanFlags,
    domain: Domain,
    diagonal: Option<DiagonalDerivatives2>,
    eval: Eval2,
}

impl Mean2 {
    /// Wraps an infallible formula.
    pub fn new<F>(id: impl Into<String>, flags: MeanFlags, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::try_new(id, flags, move |a, b| Ok(f(a, b)))
    }

    pub fn try_new<F>(id: impl Into<String>, flags: MeanFlags, f: F) -> Self
    where
        F: Fn(f64, f64) -> Result<f64> + Send + Sync + 'static,
    {
        Mean2 {
            id: id.into(),
            flags,
            domain: Domain::Positive,
            diagonal: None,
            eval: Arc::new(f),
        }
    }

    pub fn with_diagonal(mut self, d: DiagonalDerivatives2) -> Self {
        self.diagonal = Some(d);
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn flags(&self) -> MeanFlags {
        self.flags
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn diagonal(&self) -> Option<DiagonalDerivatives2> {
        self.diagonal
    }

    /// Evaluates `m(a, b)`.
    ///
    /// Inputs must be positive and finite, the diagonal returns `a`
    /// exactly, and a non-finite result becomes [`MeanError::NumericOverflow`].
    pub fn eval(&self, a: f64, b: f64) -> Result<f64> {
        self.eval_within(Domain::Positive, a, b)
    }

    /// Evaluates on the mean's natural domain, which may extend past the
    /// positive reals. Used when the mean is the inner part of a conjugation.
    pub fn eval_extended(&self, a: f64, b: f64) -> Result<f64> {
        self.eval_within(self.domain, a, b)
    }

    fn eval_within(&self, domain: Domain, a: f64, b: f64) -> Result<f64> {
        for x in [a, b] {
            if !domain.admits(x) {
                return Err(MeanError::NonPositiveInput(x));
            }
        }
        if a == b {
            return Ok(a);
        }
        let v = (self.eval)(a, b)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(MeanError::NumericOverflow(self.id.clone()))
        }
    }
}

impl fmt::Debug for Mean2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mean2")
            .field("id", &self.id)
            .field("flags", &self.flags)
            .field("diagonal", &self.diagonal)
            .finish()
    }
}

/// A mean in three variables.
#[derive(Clone)]
pub struct Mean3 {
    id: String,
    flags: MeanFlags,
    domain: Domain,
    /// True when the value comes from an iteration rather than a closed form.
    iterated: bool,
    eval: Eval3,
}

impl Mean3 {
    pub fn new<F>(id: impl Into<String>, flags: MeanFlags, f: F) -> Self
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::try_new(id, flags, move |a, b, c| Ok(f(a, b, c)))
    }

    pub fn try_new<F>(id: impl Into<String>, flags: MeanFlags, f: F) -> Self
    where
        F: Fn(f64, f64, f64) -> Result<f64> + Send + Sync + 'static,
    {
        Mean3 {
            id: id.into(),
            flags,
            domain: Domain::Positive,
            iterated: false,
            eval: Arc::new(f),
        }
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub(crate) fn iterated(mut self, yes: bool) -> Self {
        self.iterated = yes;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn flags(&self) -> MeanFlags {
        self.flags
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Whether values are limits of an iteration (and so carry its tolerance).
    pub fn is_iterated(&self) -> bool {
        self.iterated
    }

    /// Evaluates `M(a, b, c)` with the same guarantees as [`Mean2::eval`].
    pub fn eval(&self, a: f64, b: f64, c: f64) -> Result<f64> {
        self.eval_within(Domain::Positive, a, b, c)
    }

    pub fn eval_extended(&self, a: f64, b: f64, c: f64) -> Result<f64> {
        self.eval_within(self.domain, a, b, c)
    }

    fn eval_within(&self, domain: Domain, a: f64, b: f64, c: f64) -> Result<f64> {
        for x in [a, b, c] {
            if !domain.admits(x) {
                return Err(MeanError::NonPositiveInput(x));
            }
        }
        if a == b && b == c {
            return Ok(a);
        }
        let v = (self.eval)(a, b, c)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(MeanError::NumericOverflow(self.id.clone()))
        }
    }

    pub fn eval_at(&self, p: [f64; 3]) -> Result<f64> {
        self.eval(p[0], p[1], p[2])
    }
}

impl fmt::Debug for Mean3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mean3")
            .field("id", &self.id)
            .field("flags", &self.flags)
            .field("iterated", &self.iterated)
            .finish()
    }
}

/// A strictly monotone map of `(0, inf)` together with its inverse.
#[derive(Clone)]
pub struct Conjugator {
    name: String,
    forward: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    inverse: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Conjugator {
    pub fn new<F, G>(name: impl Into<String>, forward: F, inverse: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Conjugator {
            name: name.into(),
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
        }
    }

    pub fn identity() -> Self {
        Self::new("id", |x| x, |y| y)
    }

    pub fn log() -> Self {
        Self::new("log", f64::ln, f64::exp)
    }

    pub fn square() -> Self {
        Self::new("sq", |x| x * x, f64::sqrt)
    }

    pub fn reciprocal() -> Self {
        Self::new("recip", |x| 1.0 / x, |y| 1.0 / y)
    }

    /// `x -> x^p` for `p != 0`.
    pub fn power(p: f64) -> Self {
        Self::new(format!("pow{p}"), move |x| x.powf(p), move |y| y.powf(1.0 / p))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, x: f64) -> f64 {
        (self.forward)(x)
    }

    pub fn invert(&self, y: f64) -> f64 {
        (self.inverse)(y)
    }

    fn lift(&self, x: f64, mean: &str, domain: Domain) -> Result<f64> {
        let y = self.apply(x);
        if domain.admits(y) {
            Ok(y)
        } else {
            Err(MeanError::DomainError {
                mean: mean.to_string(),
                value: y,
            })
        }
    }
}

impl fmt::Debug for Conjugator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Conjugator").field(&self.name).finish()
    }
}

/// Conjugated flags: monotone reparametrisation keeps symmetry, strictness,
/// isotonicity and smoothness but not homogeneity in general.
fn conjugated_flags(flags: MeanFlags) -> MeanFlags {
    MeanFlags {
        homogeneous: false,
        ..flags
    }
}

/// `h^{-1}(m(h(a), h(b)))`.
pub fn conjugate2(h: &Conjugator, m: &Mean2) -> Mean2 {
    let (h, inner) = (h.clone(), m.clone());
    let id = format!("conj[{};{}]", h.name(), m.id());
    Mean2::try_new(id, conjugated_flags(m.flags()), move |a, b| {
        let ha = h.lift(a, inner.id(), inner.domain())?;
        let hb = h.lift(b, inner.id(), inner.domain())?;
        Ok(h.invert(inner.eval_extended(ha, hb)?))
    })
}

/// `h^{-1}(M(h(a), h(b), h(c)))`.
pub fn conjugate3(h: &Conjugator, m: &Mean3) -> Mean3 {
    let (h, inner) = (h.clone(), m.clone());
    let id = format!("conj[{};{}]", h.name(), m.id());
    Mean3::try_new(id, conjugated_flags(m.flags()), move |a, b, c| {
        let ha = h.lift(a, inner.id(), inner.domain())?;
        let hb = h.lift(b, inner.id(), inner.domain())?;
        let hc = h.lift(c, inner.id(), inner.domain())?;
        Ok(h.invert(inner.eval_extended(ha, hb, hc)?))
    })
    .iterated(m.is_iterated())
}
