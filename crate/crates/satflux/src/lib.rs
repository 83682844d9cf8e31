//! Stationary and time-dependent solutions of the mass-conserving bistable
//! equation with a saturating (mean-curvature) flux on an interval.
//!
//! The equation is the mass-constrained gradient flow
//!
//! ```text
//! u_t = (psi(u_x))_x + lambda f(u) - (lambda/L) \int_0^L f(u) dx,
//! u_x = 0 at x = 0, L,   (1/L) \int_0^L u dx = M,
//! ```
//!
//! with the double-well force `f(u) = u - u^3` and saturating flux
//! `psi(s) = s / sqrt(1 + s^2)`. The crate provides:
//!
//! * [`model`]: the fixed nonlinearity, flux, first integral and the
//!   ancillary phase-plane vector field;
//! * [`bifurcation`]: closed-form pitchfork classification of the
//!   bifurcations from the trivial solution `u = M` (onset values, critical
//!   length, cubic normal-form coefficients) plus a quadrature re-derivation
//!   of the reduction as a cross-check;
//! * [`phase_plane`]: equilibria, homoclinic/heteroclinic break-up
//!   thresholds and the confinement values of the ancillary system;
//! * [`time_map`]: classical stationary profiles by energy-level
//!   quadrature, branch continuation with gradient blow-up detection, and
//!   the blow-up boundary curve in the `(lambda, a)` plane;
//! * [`pde`]: an explicit finite-difference scheme for the time-dependent
//!   non-local equation that conserves the discrete mass exactly;
//! * [`ode`]: a fixed-step RK4 integrator for the ancillary system, used
//!   for orbit sampling and as an independent cross-check of the time map.
//!
//! Parameter sweeps (`time_map::boundary_curve`, `bifurcation::sample_onset_curve`)
//! run on rayon when the default `parallel` feature is enabled; with
//! `--no-default-features` they fall back to equivalent sequential loops
//! producing bit-identical output.

pub mod bifurcation;
mod error;
pub mod model;
pub mod numeric;
pub mod ode;
pub mod pde;
pub mod phase_plane;
pub mod time_map;

pub use error::{Error, Result};
pub use model::{ModelParams, PhasePoint};
