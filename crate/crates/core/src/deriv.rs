//! Finite-difference partial derivatives of means.
//!
//! Tensor-product central stencils, one stencil per coordinate, with a
//! per-coordinate step `h_i = eps^(1/(K+4)) |x_i|` where `K` is the total
//! order, followed by a single Richardson step `(4 D(h/2) - D(h)) / 3`.
//! The extrapolated error is `O(h^4)` against `O(eps / h^K)` from rounding,
//! which sets the exponent. The estimates are accurate to roughly 1e-5
//! relative for orders up to two and 1e-3 for orders three and four, also
//! for iterated means whose values carry noise near 1e-14.

use crate::error::{MeanError, Result};
use crate::mean::{Mean2, Mean3};

/// Highest total order supported.
pub const MAX_ORDER: usize = 4;

/// (offset, weight) pairs of the second-order accurate central stencil for
/// each derivative order.
fn stencil(order: usize) -> &'static [(f64, f64)] {
    match order {
        0 => &[(0.0, 1.0)],
        1 => &[(-1.0, -0.5), (1.0, 0.5)],
        2 => &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
        3 => &[(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)],
        4 => &[(-2.0, 1.0), (-1.0, -4.0), (0.0, 6.0), (1.0, -4.0), (2.0, 1.0)],
        _ => unreachable!("order checked by caller"),
    }
}

fn central<F>(f: &F, orders: &[usize], x: &[f64], h: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let n = x.len();
    let stencils: Vec<&[(f64, f64)]> = orders.iter().map(|&k| stencil(k)).collect();
    let mut idx = vec![0usize; n];
    let mut sum = 0.0;
    let mut p = vec![0.0; n];
    loop {
        let mut w = 1.0;
        for i in 0..n {
            let (off, wi) = stencils[i][idx[i]];
            p[i] = x[i] + off * h[i];
            w *= wi;
        }
        sum += w * f(&p)?;

        // odometer increment over the stencil product
        let mut i = 0;
        loop {
            if i == n {
                let scale: f64 = (0..n).map(|j| h[j].powi(orders[j] as i32)).product();
                return Ok(sum / scale);
            }
            idx[i] += 1;
            if idx[i] < stencils[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Estimates the mixed partial of `f` at `x`; `orders[i]` is the number of
/// differentiations in coordinate `i`.
pub fn fd_partial_fn<F>(f: F, orders: &[usize], x: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    assert_eq!(orders.len(), x.len(), "one order per coordinate");
    let total: usize = orders.iter().sum();
    if total > MAX_ORDER {
        return Err(MeanError::InvalidParameter(format!(
            "derivative order {total} exceeds {MAX_ORDER}"
        )));
    }
    if total == 0 {
        return f(x);
    }
    let base = f64::EPSILON.powf(1.0 / (total as f64 + 4.0));
    let mut h = vec![0.0; x.len()];
    for i in 0..x.len() {
        if orders[i] == 0 {
            continue;
        }
        let raw = base * x[i].abs();
        // representable step, so x + h - x == h exactly
        let hi = (x[i] + raw) - x[i];
        if !(x[i] > 0.0) || !(x[i] - 2.0 * hi > 0.0) || hi == 0.0 {
            return Err(MeanError::StepUnderflow(x.to_vec()));
        }
        h[i] = hi;
    }
    let coarse = central(&f, orders, x, &h)?;
    let half: Vec<f64> = h.iter().map(|v| v / 2.0).collect();
    let fine = central(&f, orders, x, &half)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Partial derivative of a two-variable mean; `orders = [i, j]` asks for
/// `d^(i+j) m / dx^i dy^j`.
pub fn fd_partial2(m: &Mean2, orders: [usize; 2], point: [f64; 2]) -> Result<f64> {
    fd_partial_fn(|p: &[f64]| m.eval(p[0], p[1]), &orders, &point)
}

/// Partial derivative of a three-variable mean.
pub fn fd_partial3(m: &Mean3, orders: [usize; 3], point: [f64; 3]) -> Result<f64> {
    fd_partial_fn(|p: &[f64]| m.eval(p[0], p[1], p[2]), &orders, &point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    #[test]
    fn arithmetic_first_partial() {
        let v = fd_partial2(&catalog::arithmetic2(), [1, 0], [3.0, 3.0]).unwrap();
        assert!(rel(v, 0.5) < 1e-10);
    }

    #[test]
    fn geometric_partials() {
        let g3 = catalog::geometric3();
        assert!(rel(fd_partial3(&g3, [1, 0, 0], [2.0, 2.0, 2.0]).unwrap(), 1.0 / 3.0) < 1e-6);
        let g2 = catalog::geometric2();
        assert!(rel(fd_partial2(&g2, [2, 0], [1.0, 1.0]).unwrap(), -0.25) < 1e-5);
        assert!(rel(fd_partial2(&g2, [1, 1], [1.0, 1.0]).unwrap(), 0.25) < 1e-5);
    }

    #[test]
    fn polynomial_oracle_all_orders() {
        // f = x^3 y + x y^2 z^2 at (1.3, 0.7, 2.1): derivatives by hand
        let f = |p: &[f64]| Ok(p[0].powi(3) * p[1] + p[0] * p[1].powi(2) * p[2].powi(2));
        let (x, y, z) = (1.3, 0.7, 2.1);
        let pt = [x, y, z];
        let cases: [([usize; 3], f64); 6] = [
            ([1, 0, 0], 3.0 * x * x * y + y * y * z * z),
            ([2, 0, 0], 6.0 * x * y),
            ([3, 0, 0], 6.0 * y),
            ([1, 1, 0], 3.0 * x * x + 2.0 * y * z * z),
            ([0, 2, 2], 4.0 * x),
            ([1, 1, 2], 4.0 * y),
        ];
        for (ord, want) in cases {
            let got = fd_partial_fn(f, &ord, &pt).unwrap();
            let tol = if ord.iter().sum::<usize>() <= 2 { 1e-5 } else { 1e-3 };
            assert!(rel(got, want) < tol, "{ord:?}: {got} vs {want}");
        }
    }

    #[test]
    fn fourth_order_log_mean() {
        // f(x) = L(1, x): f''''(1) = -19/30
        let l = catalog::logarithmic();
        let v = fd_partial2(&l, [0, 4], [1.0, 1.0]).unwrap();
        assert!(rel(v, -19.0 / 30.0) < 1e-3, "{v}");
    }

    #[test]
    fn rejects_bad_points_and_orders() {
        let a = catalog::arithmetic2();
        assert!(matches!(
            fd_partial2(&a, [1, 0], [0.0, 1.0]),
            Err(MeanError::StepUnderflow(_))
        ));
        assert!(matches!(
            fd_partial2(&a, [3, 2], [1.0, 1.0]),
            Err(MeanError::InvalidParameter(_))
        ));
    }
}
