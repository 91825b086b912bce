//! Taylor expansion of a symmetric invariant mean about `Q = (1, 1, 1)`.
//!
//! By symmetry every partial derivative at `Q` equals the one obtained by
//! sorting its variables, so each order has only a handful of distinct
//! values (one per partition of the order). For a type-1 invariant mean of a
//! homogeneous `m` they are all determined by `f''(1)` and `f''''(1)` where
//! `f(x) = m(1, x)`.
//!
//! Everything is generic over the scalar so the same formulas run in exact
//! rational arithmetic and in `f64`.

use num_rational::Rational64;
use num_traits::{FromPrimitive, Num};
use serde::Serialize;

use crate::deriv::fd_partial2;
use crate::error::{MeanError, Result};
use crate::mean::{DiagonalDerivatives2, Mean2};

/// Scalar types the formulas can run in.
pub trait Scalar: Num + FromPrimitive + Copy {}
impl<T: Num + FromPrimitive + Copy> Scalar for T {}

fn q<T: Scalar>(n: i64, d: i64) -> T {
    T::from_i64(n).unwrap() / T::from_i64(d).unwrap()
}

/// One partial derivative of `M` at `Q` per symmetry class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagonalPartials<T> {
    pub m_x: T,
    pub m_xx: T,
    pub m_xy: T,
    pub m_xxx: T,
    pub m_xxy: T,
    pub m_xyz: T,
    pub m_xxxx: T,
    pub m_xxxy: T,
    pub m_xxyy: T,
    pub m_xxyz: T,
}

/// The partials of the type-1 invariant mean of `m`, from `f2 = f''(1)` and
/// `f4 = f''''(1)` of `f(x) = m(1, x)`.
pub fn partials_type1<T: Scalar>(f2: T, f4: T) -> DiagonalPartials<T> {
    let f2_2 = f2 * f2;
    let f2_3 = f2_2 * f2;
    let m_xx = q::<T>(8, 9) * f2;
    let m_xy = T::zero() - m_xx / q(2, 1);
    let m_xxx = q::<T>(32, 27) * (f2_2 - f2);
    let m_xxy = q::<T>(-4, 27) * (q::<T>(4, 1) * f2_2 - f2);
    let m_xyz = q::<T>(4, 27) * (q::<T>(8, 1) * f2_2 + f2);
    let m_xxxy = q::<T>(-16, 45) * f4 + q::<T>(-64, 135) * f2_3 + q::<T>(448, 405) * f2_2 + q::<T>(464, 405) * f2;
    let two: T = q(2, 1);
    let m_xxxx = T::zero() - two * m_xxxy - two * m_xxx;
    let m_xxyy = T::zero() - m_xxxy - two * m_xxy + q::<T>(2, 3) * m_xyz;
    let m_xxyz = q::<T>(-2, 3) * m_xyz;
    DiagonalPartials {
        m_x: q(1, 3),
        m_xx,
        m_xy,
        m_xxx,
        m_xxy,
        m_xyz,
        m_xxxx,
        m_xxxy,
        m_xxyy,
        m_xxyz,
    }
}

impl<T: Scalar> DiagonalPartials<T> {
    /// Residuals of the linear relations every smooth symmetric homogeneous
    /// mean satisfies at `Q`. All are zero for consistent data.
    pub fn relation_residuals(&self) -> Vec<(&'static str, T)> {
        let two: T = q(2, 1);
        let half: T = q(1, 2);
        vec![
            ("m_x - 1/3", self.m_x - q(1, 3)),
            ("m_xy + m_xx/2", self.m_xy + half * self.m_xx),
            (
                "m_xyz + (m_xxx + 6 m_xxy)/2",
                self.m_xyz + half * (self.m_xxx + q::<T>(6, 1) * self.m_xxy),
            ),
            (
                "m_xxxx + 8 m_xxxy + 6 m_xxyy + 12 m_xxyz",
                self.m_xxxx + q::<T>(8, 1) * self.m_xxxy + q::<T>(6, 1) * self.m_xxyy + q::<T>(12, 1) * self.m_xxyz,
            ),
            ("m_xx + m_xxx + 2 m_xxy", self.m_xx + self.m_xxx + two * self.m_xxy),
            (
                "m_xxx + (m_xxxx + 2 m_xxxy)/2",
                self.m_xxx + half * (self.m_xxxx + two * self.m_xxxy),
            ),
            (
                "m_xxy + (m_xxyy + m_xxxy + m_xxyz)/2",
                self.m_xxy + half * (self.m_xxyy + self.m_xxxy + self.m_xxyz),
            ),
            ("m_xyz + 3/2 m_xxyz", self.m_xyz + q::<T>(3, 2) * self.m_xxyz),
        ]
    }
}

impl DiagonalPartials<Rational64> {
    pub fn to_f64(&self) -> DiagonalPartials<f64> {
        let f = crate::mean::ratio_to_f64;
        DiagonalPartials {
            m_x: f(self.m_x),
            m_xx: f(self.m_xx),
            m_xy: f(self.m_xy),
            m_xxx: f(self.m_xxx),
            m_xxy: f(self.m_xxy),
            m_xyz: f(self.m_xyz),
            m_xxxx: f(self.m_xxxx),
            m_xxxy: f(self.m_xxxy),
            m_xxyy: f(self.m_xxyy),
            m_xxyz: f(self.m_xxyz),
        }
    }
}

/// Coefficient of each monomial class in the expansion in `d = p - Q`.
///
/// `squares` multiplies every `d_i^2`, `cross` every `d_i d_j` with
/// `i < j`, `square_linear` every `d_i^2 d_j` with `i != j`, and so on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassCoefficients<T> {
    pub linear: T,
    pub squares: T,
    pub cross: T,
    pub cubes: T,
    pub square_linear: T,
    pub triple: T,
    pub quartics: T,
    pub cube_linear: T,
    pub square_square: T,
    pub square_pair: T,
}

impl<T: Copy> ClassCoefficients<T> {
    /// Class names with their coefficients, lowest degree first.
    pub fn named(&self) -> Vec<(&'static str, T)> {
        vec![
            ("linear", self.linear),
            ("squares", self.squares),
            ("cross", self.cross),
            ("cubes", self.cubes),
            ("square_linear", self.square_linear),
            ("triple", self.triple),
            ("quartics", self.quartics),
            ("cube_linear", self.cube_linear),
            ("square_square", self.square_square),
            ("square_pair", self.square_pair),
        ]
    }
}

/// Divides each partial by the factorial weight of its class.
pub fn class_coefficients<T: Scalar>(p: &DiagonalPartials<T>) -> ClassCoefficients<T> {
    ClassCoefficients {
        linear: p.m_x,
        squares: p.m_xx / q(2, 1),
        cross: p.m_xy,
        cubes: p.m_xxx / q(6, 1),
        square_linear: p.m_xxy / q(2, 1),
        triple: p.m_xyz,
        quartics: p.m_xxxx / q(24, 1),
        cube_linear: p.m_xxxy / q(6, 1),
        square_square: p.m_xxyy / q(4, 1),
        square_pair: p.m_xxyz / q(2, 1),
    }
}

/// `T_k` about `(1, 1, 1)` for `k` in 2..=4.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorPolynomial {
    pub order: usize,
    pub center: [f64; 3],
    pub coefficients: ClassCoefficients<f64>,
    /// The same coefficients as exact rationals, when the input was exact.
    #[serde(skip)]
    pub exact: Option<ClassCoefficients<Rational64>>,
}

impl TaylorPolynomial {
    pub fn new(order: usize, partials: &DiagonalPartials<f64>) -> Result<Self> {
        if !(2..=4).contains(&order) {
            return Err(MeanError::InvalidParameter(format!(
                "Taylor order must be 2, 3 or 4, got {order}"
            )));
        }
        Ok(TaylorPolynomial {
            order,
            center: [1.0; 3],
            coefficients: class_coefficients(partials),
            exact: None,
        })
    }

    pub fn exact(order: usize, partials: &DiagonalPartials<Rational64>) -> Result<Self> {
        let mut t = Self::new(order, &partials.to_f64())?;
        t.exact = Some(class_coefficients(partials));
        Ok(t)
    }

    /// `T_k` of the invariant mean of `m`, using its diagonal data (exact when
    /// the catalog knows it) or finite differences otherwise.
    pub fn for_base(order: usize, m: &Mean2) -> Result<Self> {
        let d = diagonal_data(m)?;
        match d.exact {
            Some((f2, f4)) => Self::exact(order, &partials_type1(f2, f4)),
            None => Self::new(order, &partials_type1(d.d2, d.d4)),
        }
    }
}

/// `f''(1)` and `f''''(1)` for `f(x) = m(1, x)`.
pub fn diagonal_data(m: &Mean2) -> Result<DiagonalDerivatives2> {
    if let Some(d) = m.diagonal() {
        return Ok(d);
    }
    let d2 = fd_partial2(m, [0, 2], [1.0, 1.0])?;
    let d4 = fd_partial2(m, [0, 4], [1.0, 1.0])?;
    Ok(DiagonalDerivatives2::new(d2, d4))
}

/// Diagonal data of the logarithmic mean: `f''(1) = -1/6`, `f''''(1) = -19/30`.
pub fn logmean_diagonal_data() -> DiagonalDerivatives2 {
    crate::catalog::logmean_diagonal_data()
}

/// Evaluates `T_k` at `p`.
pub fn taylor_eval(t: &TaylorPolynomial, p: [f64; 3]) -> f64 {
    let c = &t.coefficients;
    let d = [p[0] - 1.0, p[1] - 1.0, p[2] - 1.0];
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let ordered = [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)];

    let mut v = 1.0 + c.linear * (d[0] + d[1] + d[2]);
    let sq: f64 = d.iter().map(|x| x * x).sum();
    let cross: f64 = pairs.iter().map(|&(i, j)| d[i] * d[j]).sum();
    v += c.squares * sq + c.cross * cross;
    if t.order >= 3 {
        let cubes: f64 = d.iter().map(|x| x.powi(3)).sum();
        let sl: f64 = ordered.iter().map(|&(i, j)| d[i] * d[i] * d[j]).sum();
        v += c.cubes * cubes + c.square_linear * sl + c.triple * d[0] * d[1] * d[2];
    }
    if t.order >= 4 {
        let quartics: f64 = d.iter().map(|x| x.powi(4)).sum();
        let cl: f64 = ordered.iter().map(|&(i, j)| d[i].powi(3) * d[j]).sum();
        let ss: f64 = pairs.iter().map(|&(i, j)| d[i] * d[i] * d[j] * d[j]).sum();
        let sp = d[0] * d[1] * d[2] * (d[0] + d[1] + d[2]);
        v += c.quartics * quartics + c.cube_linear * cl + c.square_square * ss + c.square_pair * sp;
    }
    v
}

/// Moves `p` onto the plane `x + y + z = 3` by homogeneity, evaluates there,
/// and scales back. Only meaningful for homogeneous means.
pub fn homogeneous_rescale_eval(t: &TaylorPolynomial, p: [f64; 3]) -> f64 {
    let k = 3.0 / (p[0] + p[1] + p[2]);
    taylor_eval(t, [k * p[0], k * p[1], k * p[2]]) / k
}

/// The `f''(1)` any type-2 partner of `M` must have: `9/8 M_xx(Q)`.
pub fn type2_constraint_f2<T: Scalar>(p: &DiagonalPartials<T>) -> T {
    q::<T>(9, 8) * p.m_xx
}

/// `M_xxxy(Q)` forced on a mean that is both type-1 and type-2 invariant for
/// an `m` with the given `f''(1)`, `f''''(1)`.
pub fn both_types_mxxxy<T: Scalar>(f2: T, f4: T) -> T {
    let f2_2 = f2 * f2;
    let inner = q::<T>(2, 3) * f4 + q::<T>(8, 3) * f2_2 * f2 - q::<T>(4, 9) * f2_2 - q::<T>(20, 9) * f2;
    q::<T>(-8, 9) * inner
}
