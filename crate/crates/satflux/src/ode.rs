//! Fixed-step RK4 integration of the ancillary phase-plane system.
//!
//! Used for orbit sampling behind the CLI `phase --orbits` flag and as the
//! independent shooting route when cross-checking the time-map quadrature.
//! Never used inside the quadrature path itself.

use crate::model::{ancillary_rhs, PhasePoint};

/// Outcome of a fixed-step integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrbitEnd {
    /// Completed the requested x-span.
    SpanDone,
    /// |v| exceeded the cap (orbit heading to infinite slope).
    SlopeCap,
    /// A value became non-finite.
    NonFinite,
}

/// One classical RK4 step of the ancillary system.
#[inline]
pub fn rk4_step(p: PhasePoint, lambda: f64, a: f64, h: f64) -> PhasePoint {
    let k1 = ancillary_rhs(p, lambda, a);
    let k2 = ancillary_rhs(
        PhasePoint::new(p.u + 0.5 * h * k1.u, p.v + 0.5 * h * k1.v),
        lambda,
        a,
    );
    let k3 = ancillary_rhs(
        PhasePoint::new(p.u + 0.5 * h * k2.u, p.v + 0.5 * h * k2.v),
        lambda,
        a,
    );
    let k4 = ancillary_rhs(PhasePoint::new(p.u + h * k3.u, p.v + h * k3.v), lambda, a);
    PhasePoint::new(
        p.u + h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
        p.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
    )
}

/// Integrates from `start` over `span` in x with step `h`, recording every
/// `record_every`-th state as `(x, u, v)`. Halts early when |v| exceeds
/// `slope_cap` or a value goes non-finite.
pub fn integrate_orbit(
    start: PhasePoint,
    lambda: f64,
    a: f64,
    h: f64,
    span: f64,
    slope_cap: f64,
    record_every: usize,
) -> (Vec<(f64, f64, f64)>, OrbitEnd) {
    let steps = (span / h).ceil() as usize;
    let mut out = Vec::with_capacity(steps / record_every.max(1) + 2);
    let mut p = start;
    let mut x = 0.0;
    out.push((x, p.u, p.v));
    for i in 1..=steps {
        p = rk4_step(p, lambda, a, h);
        x = i as f64 * h;
        if !p.u.is_finite() || !p.v.is_finite() {
            return (out, OrbitEnd::NonFinite);
        }
        if p.v.abs() > slope_cap {
            out.push((x, p.u, p.v));
            return (out, OrbitEnd::SlopeCap);
        }
        if i % record_every.max(1) == 0 || i == steps {
            out.push((x, p.u, p.v));
        }
    }
    (out, OrbitEnd::SpanDone)
}
