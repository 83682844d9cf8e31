//! Phase portrait of the ancillary problem: equilibria of `f(u) = a`,
//! saddle/centre typing, the loop-breaking threshold `lambda_h(a)`, the
//! confinement values `u*`, `u**`, and the linearized-period diagnostic.

use crate::model::{bulk_primitive, BISTABLE_A_MAX};
use crate::{Error, Result};

/// The three rest points of the ancillary system for `|a| < 2/(3 sqrt 3)`:
/// two saddles flanking a centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriaTriple {
    /// Left saddle (`f'(left) < 0`).
    pub left: f64,
    /// Centre (`f'(centre) > 0`).
    pub centre: f64,
    /// Right saddle (`f'(right) < 0`).
    pub right: f64,
}

/// `a u - F(u)`, the potential part of the first integral.
#[inline]
fn phi(u: f64, a: f64) -> f64 {
    a * u - bulk_primitive(u)
}

/// The three real roots of `u - u^3 = a`, ordered. Closed-form trigonometric
/// roots of the depressed cubic, polished by three Newton steps (the
/// closed forms lose digits near the fold `|a| -> 2/(3 sqrt 3)`).
pub fn equilibria(a: f64) -> Result<EquilibriaTriple> {
    if a.is_nan() || a.abs() >= BISTABLE_A_MAX {
        return Err(Error::OutsideBistableRange(a));
    }
    // u^3 - u + a = 0: depressed cubic with p = -1, q = a
    let m = 2.0 / 3.0_f64.sqrt();
    let arg = (-3.0 * a / m).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let mut roots = [
        m * theta.cos(),
        m * (theta - 2.0 * std::f64::consts::PI / 3.0).cos(),
        m * (theta - 4.0 * std::f64::consts::PI / 3.0).cos(),
    ];
    for r in &mut roots {
        for _ in 0..3 {
            let fp = 1.0 - 3.0 * *r * *r;
            if fp != 0.0 {
                *r -= (*r - *r * *r * *r - a) / fp;
            }
        }
    }
    roots.sort_by(|x, y| x.partial_cmp(y).expect("finite roots"));
    Ok(EquilibriaTriple {
        left: roots[0],
        centre: roots[1],
        right: roots[2],
    })
}

/// Threshold where the homoclinic loop through the outer saddle breaks:
/// the unique lambda with `H(saddle, 0) = H(centre, -inf)`, in closed form
/// `1 / [a (c - u_r) + F(u_r) - F(c)]` (the condition is linear in lambda).
///
/// Computed from `|a|`, so `lambda_h(-a) = lambda_h(a)` holds exactly.
/// `a = 0` is the heteroclinic case, handled by [`heteroclinic_lambda`].
pub fn homoclinic_lambda(a: f64) -> Result<f64> {
    let aa = a.abs();
    if aa == 0.0 || aa >= BISTABLE_A_MAX {
        return Err(Error::OutsideBistableRange(a));
    }
    let eq = equilibria(aa)?;
    Ok(1.0 / (phi(eq.centre, aa) - phi(eq.right, aa)))
}

/// Breaking threshold of the heteroclinic loops at `a = 0`:
/// `H(1, 0) = H(0, inf)` gives `lambda = 1 / (F(1) - F(0)) = 4`.
pub fn heteroclinic_lambda() -> f64 {
    1.0 / (bulk_primitive(1.0) - bulk_primitive(0.0))
}

/// The loop-breaking threshold for any `|a| < 2/(3 sqrt 3)`: homoclinic for
/// `a != 0`, heteroclinic for `a = 0`.
pub fn loop_break_lambda(a: f64) -> Result<f64> {
    if a == 0.0 {
        Ok(heteroclinic_lambda())
    } else {
        homoclinic_lambda(a)
    }
}

/// Confinement values `(u*, u**)` for `lambda` past the loop-breaking
/// threshold: `u*` in `(u_l, c)` solves `H(u*, 0) = H(c, inf)` and `u**` in
/// `(c, u_r)` sits on the same level, `H(u**, 0) = H(u*, 0)`. Classical
/// orbits are confined to the region between the two.
pub fn confinement_values(lambda: f64, a: f64) -> Result<(f64, f64)> {
    if a < 0.0 {
        // mirror: u*(lambda, -|a|) = -u**(lambda, |a|) and vice versa
        let (us, uss) = confinement_values(lambda, -a)?;
        return Ok((-uss, -us));
    }
    let threshold = loop_break_lambda(a)?;
    if lambda.is_nan() || lambda <= threshold {
        return Err(Error::BelowHomoclinicThreshold { lambda, threshold });
    }
    let eq = equilibria(a)?;
    // 1 + lambda (phi(u) - phi(c)) is positive at c, negative at the left saddle
    let level = |u: f64| 1.0 + lambda * (phi(u, a) - phi(eq.centre, a));
    let u_star = crate::numeric::bisect(level, eq.left, eq.centre, 0.0);
    // phi(u) - phi(u*) changes sign between the centre and the right saddle
    let gap = |u: f64| phi(u, a) - phi(u_star, a);
    let u_star_star = crate::numeric::bisect(gap, eq.centre, eq.right, 0.0);
    Ok((u_star, u_star_star))
}

/// Period of the linearization about the centre: `2 pi / sqrt(lambda f'(c))`.
///
/// Advisory only: it drives the nonexistence contradiction for large lambda
/// but does not by itself locate the blow-up values; those come from the
/// time-map boundary.
pub fn linearized_period(lambda: f64, a: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidParams("lambda must be positive"));
    }
    let eq = equilibria(a)?;
    let fp = 1.0 - 3.0 * eq.centre * eq.centre;
    Ok(2.0 * std::f64::consts::PI / (lambda * fp).sqrt())
}
