//! The fixed double-well nonlinearity, saturating flux, potentials, first
//! integral and the ancillary phase-plane vector field.
//!
//! Everything here is a pure function of its arguments; all other modules
//! build on these closed forms. The nonlinearity is hard-coded to
//! `f(u) = u - u^3` so that the downstream classification and threshold
//! formulas stay exact.

use crate::{Error, Result};

/// Largest |a| for which `f(u) = a` has three solutions: `2/(3 sqrt 3)`,
/// the local maximum of `f` attained at `u = 1/sqrt(3)`.
pub const BISTABLE_A_MAX: f64 = 2.0 / (3.0 * 1.732_050_807_568_877_2);

/// Global problem instance: interval length, prescribed mean mass and the
/// bifurcation parameter `lambda = 1/epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub length: f64,
    pub mass: f64,
    pub lambda: f64,
}

impl ModelParams {
    /// Rejects non-positive `length` or `lambda` and non-finite `mass`.
    /// The mass carries no sign restriction: callers may exploit the
    /// `u -> -u` symmetry.
    pub fn new(length: f64, mass: f64, lambda: f64) -> Result<Self> {
        if length <= 0.0 || !length.is_finite() {
            return Err(Error::InvalidParams("interval length must be positive"));
        }
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidParams("lambda must be positive"));
        }
        if !mass.is_finite() {
            return Err(Error::InvalidParams("mass must be finite"));
        }
        Ok(Self {
            length,
            mass,
            lambda,
        })
    }
}

/// A point `(u, u_x)` of the first-order ancillary system.
///
/// Points with infinite slope are never stored; the energy of that limit is
/// exposed separately through [`energy_at_vertical`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub u: f64,
    pub v: f64,
}

impl PhasePoint {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }
}

/// Bulk force `f(u) = u - u^3`, the negative gradient of the double well.
#[inline]
pub fn bulk_force(u: f64) -> f64 {
    u - u * u * u
}

/// Derivatives of the bulk force: `1 - 3u^2`, `-6u` and `-6` for orders
/// 1, 2 and 3.
#[inline]
pub fn bulk_force_deriv(order: u32, u: f64) -> Result<f64> {
    match order {
        1 => Ok(1.0 - 3.0 * u * u),
        2 => Ok(-6.0 * u),
        3 => Ok(-6.0),
        other => Err(Error::InvalidDerivativeOrder(other)),
    }
}

/// Antiderivative `F(u) = u^2/2 - u^4/4` of the bulk force, with `F(0) = 0`.
#[inline]
pub fn bulk_primitive(u: f64) -> f64 {
    let u2 = u * u;
    u2 / 2.0 - u2 * u2 / 4.0
}

/// Saturating flux `psi(s) = s / sqrt(1 + s^2)`; bounded by +-1 and strictly
/// increasing.
#[inline]
pub fn flux(s: f64) -> f64 {
    s / (1.0 + s * s).sqrt()
}

/// Interface energy `Psi(s) = sqrt(1 + s^2) - 1`, the antiderivative of the
/// flux; non-negative and zero only at `s = 0`.
#[inline]
pub fn interface_energy(s: f64) -> f64 {
    // sqrt(1+s^2)-1 = s^2 / (sqrt(1+s^2)+1) avoids cancellation at small s.
    let s2 = s * s;
    s2 / ((1.0 + s2).sqrt() + 1.0)
}

/// First integral of the ancillary system:
/// `H(u, v) = 1/sqrt(1 + v^2) + lambda (a u - F(u))`.
///
/// `H` is constant along orbits of [`ancillary_rhs`]; its level sets are the
/// phase portrait.
#[inline]
pub fn first_integral(p: PhasePoint, lambda: f64, a: f64) -> f64 {
    1.0 / (1.0 + p.v * p.v).sqrt() + lambda * (a * p.u - bulk_primitive(p.u))
}

/// Energy of the vertical-slope limit `H(u, +-inf) = lambda (a u - F(u))`.
///
/// Used as a level constant when matching saddle levels against orbits that
/// reach infinite gradient; not representable as a [`PhasePoint`].
#[inline]
pub fn energy_at_vertical(u: f64, lambda: f64, a: f64) -> f64 {
    lambda * (a * u - bulk_primitive(u))
}

/// Right-hand side of the ancillary first-order system
/// `u' = v`, `v' = lambda (a - f(u)) (1 + v^2)^{3/2}`.
#[inline]
pub fn ancillary_rhs(p: PhasePoint, lambda: f64, a: f64) -> PhasePoint {
    let w = 1.0 + p.v * p.v;
    PhasePoint {
        u: p.v,
        v: lambda * (a - bulk_force(p.u)) * w * w.sqrt(),
    }
}
