//! Classical stationary solutions by energy-level quadrature (the time map),
//! branch continuation with gradient blow-up detection, and the blow-up
//! boundary curve in the `(lambda, a)` plane.
//!
//! A monotone piece of a stationary solution lives on one energy level of the
//! ancillary system. Writing the level through `(u_min, 0)` as
//! `g(u) = 1 + lambda (phi(u_min) - phi(u))` with `phi(u) = a u - F(u)`, the
//! slope along the orbit is `v = sqrt(1 - g^2) / g`, so the length and mean of
//! the piece are integrals in `u` alone:
//!
//! ```text
//! length = \int_{u_min}^{u_max} g / sqrt(1 - g^2) du,
//! mass   = (1/length) \int_{u_min}^{u_max} u g / sqrt(1 - g^2) du.
//! ```
//!
//! The inverse-square-root endpoint singularities are absorbed exactly by the
//! substitution `u = mid - half cos(theta)`; the integrals are then evaluated
//! by Gauss-Legendre with order doubling. A classical piece requires
//! `g(c) > 0` at the centre; `g(c) <= 0` is gradient blow-up.

use crate::bifurcation::{bifurcation_lambda, classify, PitchforkKind};
use crate::model::{bulk_force, bulk_primitive, BISTABLE_A_MAX};
use crate::numeric::rule_ladder;
use crate::phase_plane::equilibria;
use crate::{Error, Result};

/// `a u - F(u)`: the potential part of the first integral.
#[inline]
fn phi(u: f64, a: f64) -> f64 {
    a * u - bulk_primitive(u)
}

/// `phi(u) - phi(u_min)` evaluated in factored form to avoid cancellation
/// near `u = u_min`: `(u - u_min) [a - (u + u_min)(2 - u^2 - u_min^2)/4]`.
#[inline]
fn phi_gap(u: f64, u_min: f64, a: f64) -> f64 {
    (u - u_min) * (a - (u + u_min) * (2.0 - u * u - u_min * u_min) / 4.0)
}

/// The level function `g(u) = 1/sqrt(1 + v^2)` along the orbit through
/// `(u_min, 0)`: `1 + lambda (a u_min - F(u_min)) - lambda (a u - F(u))`.
#[inline]
pub fn g_function(u: f64, lambda: f64, a: f64, u_min: f64) -> f64 {
    1.0 - lambda * phi_gap(u, u_min, a)
}

/// Why a piece evaluation failed (internal).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PieceFail {
    /// |a| outside the bistable range: no centre to encircle.
    NoCentre,
    /// `u_min` not strictly between the left saddle and the centre.
    OutOfRange,
    /// The level does not return to zero slope before the right saddle.
    Escape,
    /// `g(c) <= 0`: infinite gradient before the turning point.
    BlowUp,
}

#[derive(Debug, Clone, Copy)]
struct PieceEval {
    length: f64,
    mass: f64,
    u_max: f64,
}

/// Geometry shared by every piece evaluation at `(lambda, a, u_min)`.
fn piece_geometry(
    lambda: f64,
    a: f64,
    u_min: f64,
) -> std::result::Result<(f64, f64, f64), PieceFail> {
    if lambda.is_nan() || lambda <= 0.0 || u_min.is_nan() {
        return Err(PieceFail::OutOfRange);
    }
    let eq = equilibria(a).map_err(|_| PieceFail::NoCentre)?;
    if u_min <= eq.left || u_min >= eq.centre {
        return Err(PieceFail::OutOfRange);
    }
    // the level must close before the saddle: phi decreases on (c, u_r)
    if phi(eq.right, a) > phi(u_min, a) {
        return Err(PieceFail::Escape);
    }
    let g_centre = g_function(eq.centre, lambda, a, u_min);
    if g_centre <= 0.0 {
        return Err(PieceFail::BlowUp);
    }
    // u_max in (c, u_r]: root of phi(u) = phi(u_min), bracketed bisection
    let (mut lo, mut hi) = (eq.centre, eq.right);
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if phi_gap(mid, u_min, a) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * (1.0 + hi.abs()) {
            break;
        }
    }
    Ok((0.5 * (lo + hi), g_centre, eq.centre))
}

/// Length and mean of the monotone piece through `(u_min, 0)` by the cosine
/// substitution and Gauss-Legendre order doubling (relative change 1e-10).
fn eval_piece(lambda: f64, a: f64, u_min: f64) -> std::result::Result<PieceEval, PieceFail> {
    let (u_max, _g_centre, _c) = piece_geometry(lambda, a, u_min)?;
    let half = 0.5 * (u_max - u_min);
    if half <= 0.0 {
        return Err(PieceFail::OutOfRange);
    }
    // The quartic phi(u) - phi(u_min) has roots at both endpoints; in the
    // factored form (u - u_min)(u_max - u) W(u) / 4 the endpoint gaps come
    // straight from the substitution (2 half sin^2(t/2), 2 half cos^2(t/2)),
    // so the integrand keeps full precision at small amplitudes.
    let s = u_min + u_max;
    let kappa = s * s - u_min * u_max - 2.0;

    let mut prev: Option<(f64, f64)> = None;
    // ladder starts at 32 points; 2048 caps the refinement
    for rule in &rule_ladder()[1..] {
        let mut len = 0.0;
        let mut num = 0.0;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let theta = 0.5 * std::f64::consts::PI * (x + 1.0);
            let (sin_h, cos_h) = (0.5 * theta).sin_cos();
            let du = 2.0 * half * sin_h * sin_h;
            let umu = 2.0 * half * cos_h * cos_h;
            let u = u_min + du;
            let big_w = -((u + s) * u + kappa);
            if big_w <= 0.0 {
                return Err(PieceFail::Escape);
            }
            let d = 0.25 * lambda * du * umu * big_w;
            // 1 - g^2 = d (2 - d) with g = 1 - d; d in (0, 1) on the open piece
            let omg2 = d * (2.0 - d);
            if omg2 <= 0.0 {
                return Err(PieceFail::BlowUp);
            }
            let sin_t = 2.0 * sin_h * cos_h;
            let val = w * (1.0 - d) / omg2.sqrt() * half * sin_t;
            len += val;
            num += val * u;
        }
        len *= 0.5 * std::f64::consts::PI;
        num *= 0.5 * std::f64::consts::PI;
        if let Some((plen, pnum)) = prev {
            let tol_l = 1e-10 * len.abs().max(1.0);
            let tol_n = 1e-10 * num.abs().max(1.0);
            if (len - plen).abs() <= tol_l && (num - pnum).abs() <= tol_n {
                return Ok(PieceEval {
                    length: len,
                    mass: num / len,
                    u_max,
                });
            }
        }
        prev = Some((len, num));
    }
    let (len, num) = prev.expect("ladder is non-empty");
    Ok(PieceEval {
        length: len,
        mass: num / len,
        u_max,
    })
}

fn fail_to_error(f: PieceFail, lambda: f64) -> Error {
    match f {
        PieceFail::NoCentre => Error::OutsideBistableRange(f64::NAN),
        PieceFail::OutOfRange => {
            Error::InvalidParams("u_min must lie strictly between the left saddle and the centre")
        }
        PieceFail::Escape => Error::NoRoot("energy level escapes over the saddle before turning"),
        PieceFail::BlowUp => Error::BlowUp { lambda },
    }
}

/// Right endpoint `u_max > c` on the same energy level as `(u_min, 0)`, or
/// [`Error::BlowUp`] when the gradient reaches infinity first.
pub fn turning_point(lambda: f64, a: f64, u_min: f64) -> Result<f64> {
    let eq = equilibria(a)?;
    if u_min == eq.centre {
        // degenerate zero-amplitude piece
        return Ok(eq.centre);
    }
    piece_geometry(lambda, a, u_min)
        .map(|(u_max, _, _)| u_max)
        .map_err(|f| match f {
            PieceFail::NoCentre => Error::OutsideBistableRange(a),
            other => fail_to_error(other, lambda),
        })
}

/// Length and mean of the monotone piece, or the propagated blow-up.
pub fn piece_length_and_mass(lambda: f64, a: f64, u_min: f64) -> Result<(f64, f64)> {
    eval_piece(lambda, a, u_min)
        .map(|p| (p.length, p.mass))
        .map_err(|f| match f {
            PieceFail::NoCentre => Error::OutsideBistableRange(a),
            other => fail_to_error(other, lambda),
        })
}

// ---------------------------------------------------------------------------
// 2-variable damped Newton with finite-difference Jacobian
// ---------------------------------------------------------------------------

const NEWTON_TOL: f64 = 1e-9;
const NEWTON_ACCEPT: f64 = 1e-8;
const NEWTON_MAX_ITER: usize = 60;

struct NewtonFail {
    saw_blowup: bool,
    residual: f64,
    iterations: usize,
}

/// Solves `resid(x) = 0` for two unknowns. The residual map returns `Err`
/// outside its domain; steps backtrack until they land inside. Convergence is
/// declared below `NEWTON_TOL`; a stagnating iterate below `NEWTON_ACCEPT`
/// is accepted (quadrature noise floor).
fn newton2<F>(resid: F, start: [f64; 2]) -> std::result::Result<[f64; 2], NewtonFail>
where
    F: Fn([f64; 2]) -> std::result::Result<[f64; 2], PieceFail>,
{
    let mut saw_blowup = false;
    let mut track = |r: &std::result::Result<[f64; 2], PieceFail>| {
        if matches!(r, Err(PieceFail::BlowUp)) {
            saw_blowup = true;
        }
    };

    let mut x = start;
    let first = resid(x);
    track(&first);
    let mut r = match first {
        Ok(r) => r,
        Err(_) => {
            return Err(NewtonFail {
                saw_blowup,
                residual: f64::INFINITY,
                iterations: 0,
            })
        }
    };
    let mut best = r[0].abs().max(r[1].abs());
    let mut stale = 0usize;

    for it in 0..NEWTON_MAX_ITER {
        let norm = r[0].abs().max(r[1].abs());
        if norm <= NEWTON_TOL {
            return Ok(x);
        }
        if norm < 0.5 * best {
            best = norm;
            stale = 0;
        } else {
            stale += 1;
            if stale >= 5 && norm <= NEWTON_ACCEPT {
                return Ok(x);
            }
        }

        // forward-difference Jacobian, falling back to backward at domain walls
        let mut jac = [[0.0; 2]; 2];
        let mut ok = true;
        for j in 0..2 {
            let h = 1e-7 * x[j].abs().max(1e-3);
            let mut xp = x;
            xp[j] += h;
            let rp = resid(xp);
            track(&rp);
            match rp {
                Ok(rp) => {
                    jac[0][j] = (rp[0] - r[0]) / h;
                    jac[1][j] = (rp[1] - r[1]) / h;
                }
                Err(_) => {
                    xp[j] = x[j] - h;
                    let rm = resid(xp);
                    track(&rm);
                    match rm {
                        Ok(rm) => {
                            jac[0][j] = (r[0] - rm[0]) / h;
                            jac[1][j] = (r[1] - rm[1]) / h;
                        }
                        Err(_) => {
                            ok = false;
                        }
                    }
                }
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !ok || det.abs() < 1e-300 || !det.is_finite() {
            return Err(NewtonFail {
                saw_blowup,
                residual: norm,
                iterations: it,
            });
        }
        let dx = [
            (r[0] * jac[1][1] - r[1] * jac[0][1]) / det,
            (r[1] * jac[0][0] - r[0] * jac[1][0]) / det,
        ];

        // backtrack only as far as needed to stay inside the domain
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..45 {
            let cand = [x[0] - step * dx[0], x[1] - step * dx[1]];
            let rc = resid(cand);
            track(&rc);
            if let Ok(rc) = rc {
                accepted = Some((cand, rc));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((cand, rc)) => {
                x = cand;
                r = rc;
            }
            None => {
                return Err(NewtonFail {
                    saw_blowup,
                    residual: norm,
                    iterations: it,
                })
            }
        }
    }
    let norm = r[0].abs().max(r[1].abs());
    if norm <= NEWTON_ACCEPT {
        Ok(x)
    } else {
        Err(NewtonFail {
            saw_blowup,
            residual: norm,
            iterations: NEWTON_MAX_ITER,
        })
    }
}

/// Fixed-lambda solve: unknowns `(a, u_min)`, targets piece length and mass.
fn solve_fixed_lambda(
    lambda: f64,
    ell: f64,
    mass: f64,
    guess: [f64; 2],
) -> std::result::Result<[f64; 2], NewtonFail> {
    newton2(
        |x| eval_piece(lambda, x[0], x[1]).map(|p| [p.length - ell, p.mass - mass]),
        guess,
    )
}

/// Fixed-u_min solve: unknowns `(lambda, a)`.
fn solve_fixed_umin(
    u_min: f64,
    ell: f64,
    mass: f64,
    guess: [f64; 2],
) -> std::result::Result<[f64; 2], NewtonFail> {
    newton2(
        |x| eval_piece(x[0], x[1], u_min).map(|p| [p.length - ell, p.mass - mass]),
        guess,
    )
}

// ---------------------------------------------------------------------------
// Stationary profiles
// ---------------------------------------------------------------------------

/// One reconstructed sample of a stationary profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub x: f64,
    pub u: f64,
    pub v: f64,
}

/// A classical stationary solution of the mass-constrained problem: `n`
/// reflected copies of a monotone piece of length `L/n`, starting decreasing,
/// so `u(0) = u_max`.
#[derive(Debug, Clone)]
pub struct StationaryProfile {
    pub lambda: f64,
    /// The nonlocal constant `(1/L) \int f(u) dx`.
    pub a: f64,
    pub u_min: f64,
    pub u_max: f64,
    /// First-integral level `1 + lambda (a u_min - F(u_min))`.
    pub energy_c: f64,
    /// Length of one monotone piece (`L/n` after a successful solve).
    pub piece_length: f64,
    /// Mean of `u` over one piece (equals the mean over `(0, L)`).
    pub mass: f64,
    /// Number of interior inflection points of the tiled solution, i.e. `n`.
    pub inflections: u32,
    /// `(x, u, u_x)` on the reconstruction grid over `(0, L)`.
    pub samples: Vec<ProfileSample>,
    /// Max finite-difference residual of the stationary equation over the
    /// interior samples (a reconstruction diagnostic, not a solve criterion).
    pub fd_residual: f64,
}

impl StationaryProfile {
    /// `u_max - u_min`.
    pub fn amplitude(&self) -> f64 {
        self.u_max - self.u_min
    }
}

const SAMPLES_PER_PIECE: usize = 6144;

/// Builds the tiled profile from a converged `(lambda, a, u_min)`.
fn reconstruct_profile(lambda: f64, a: f64, u_min: f64, n: u32) -> Result<StationaryProfile> {
    let piece = eval_piece(lambda, a, u_min).map_err(|f| fail_to_error(f, lambda))?;
    let u_max = piece.u_max;
    let half = 0.5 * (u_max - u_min);
    let rule = &rule_ladder()[2]; // 64 points per panel
    let sq = u_min + u_max;
    let kappa = sq * sq - u_min * u_max - 2.0;
    // factored level gap, exactly zero at both endpoints
    let d_of = |theta: f64| {
        let (sin_h, cos_h) = (0.5 * theta).sin_cos();
        let du = 2.0 * half * sin_h * sin_h;
        let u = u_min + du;
        let umu = 2.0 * half * cos_h * cos_h;
        let big_w = (-((u + sq) * u + kappa)).max(0.0);
        (0.25 * lambda * du * umu * big_w, u)
    };

    // cumulative x(theta) on the ascending piece, theta_j = j pi / S
    let s = SAMPLES_PER_PIECE;
    let mut theta_grid = Vec::with_capacity(s + 1);
    let mut asc = Vec::with_capacity(s + 1);
    for j in 0..=s {
        theta_grid.push(std::f64::consts::PI * j as f64 / s as f64);
    }
    let integrand = |theta: f64| {
        let (d, _) = d_of(theta);
        let omg2 = (d * (2.0 - d)).max(0.0);
        if omg2 == 0.0 {
            // only possible at the endpoints where sin(theta) = 0
            0.0
        } else {
            (1.0 - d) / omg2.sqrt() * half * theta.sin()
        }
    };
    let mut x_acc = 0.0;
    for j in 0..=s {
        if j > 0 {
            x_acc += rule.integrate(theta_grid[j - 1], theta_grid[j], integrand);
        }
        let (d, u) = d_of(theta_grid[j]);
        let g = 1.0 - d;
        let omg2 = (d * (2.0 - d)).max(0.0);
        let v = if g > 0.0 {
            omg2.sqrt() / g
        } else {
            f64::INFINITY
        };
        asc.push((x_acc, u, v));
    }
    let ell = x_acc;

    // tile: piece p runs on [p ell, (p+1) ell], even pieces decreasing
    let mut samples = Vec::with_capacity(n as usize * s + 1);
    for p in 0..n as usize {
        let x0 = p as f64 * ell;
        let descending = p % 2 == 0;
        let skip = usize::from(p > 0);
        for j in skip..=s {
            let (xa, u, v) = if descending {
                let (xr, u, v) = asc[s - j];
                (ell - xr, u, -v)
            } else {
                asc[j]
            };
            samples.push(ProfileSample { x: x0 + xa, u, v });
        }
    }

    // finite-difference residual of (psi(u_x))_x + lambda f(u) - lambda a,
    // using the quadratic-exact three-point derivative on the non-uniform grid
    let mut fd_residual: f64 = 0.0;
    for i in 1..samples.len() - 1 {
        let (sm, s0, sp) = (samples[i - 1], samples[i], samples[i + 1]);
        let hl = s0.x - sm.x;
        let hr = sp.x - s0.x;
        if hl <= 0.0 || hr <= 0.0 {
            continue;
        }
        let (fm, f0, fp) = (
            crate::model::flux(sm.v),
            crate::model::flux(s0.v),
            crate::model::flux(sp.v),
        );
        let dpsi =
            -hr / (hl * (hl + hr)) * fm + (hr - hl) / (hl * hr) * f0 + hl / (hr * (hl + hr)) * fp;
        let res = dpsi + lambda * bulk_force(s0.u) - lambda * a;
        fd_residual = fd_residual.max(res.abs());
    }

    Ok(StationaryProfile {
        lambda,
        a,
        u_min,
        u_max,
        energy_c: 1.0 + lambda * phi(u_min, a),
        piece_length: piece.length,
        mass: piece.mass,
        inflections: n,
        samples,
        fd_residual,
    })
}

const _: () = assert!(SAMPLES_PER_PIECE >= 4);

/// Profile reconstruction straight from an energy-level triple, with no
/// length/mass targets involved: the raw material for cross-checks against
/// shooting integrations.
pub fn profile_from_level(lambda: f64, a: f64, u_min: f64, n: u32) -> Result<StationaryProfile> {
    assert!(n >= 1, "inflection count must be at least 1");
    reconstruct_profile(lambda, a, u_min, n)
}

fn newton_fail_to_error(f: NewtonFail, lambda: f64) -> Error {
    if f.saw_blowup {
        Error::BlowUp { lambda }
    } else {
        Error::NoConvergence {
            residual: f.residual,
            iterations: f.iterations,
        }
    }
}

/// Finds the classical stationary solution with `n` inflection points at the
/// given lambda by a damped two-variable Newton iteration on `(a, u_min)`.
///
/// With an explicit `(a, u_min)` seed the solve is direct. Without one, the
/// branch is walked from its small-amplitude onset until it crosses the target
/// lambda; if it terminates first the blow-up value `lambda_n` is returned in
/// the error.
pub fn solve_stationary(
    lambda: f64,
    length: f64,
    mass: f64,
    n: u32,
    seed: Option<(f64, f64)>,
) -> Result<StationaryProfile> {
    assert!(n >= 1, "inflection count must be at least 1");
    assert!(length > 0.0, "length must be positive");
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidParams("lambda must be positive"));
    }
    let ell = length / n as f64;

    if let Some((a0, umin0)) = seed {
        let sol = solve_fixed_lambda(lambda, ell, mass, [a0, umin0])
            .map_err(|f| newton_fail_to_error(f, lambda))?;
        return reconstruct_profile(lambda, sol[0], sol[1], n);
    }

    // walk the branch from onset until it crosses the target
    let trace = trace_branch(
        length,
        mass,
        n,
        &TraceConfig {
            lambda_stop: Some(lambda),
            ..TraceConfig::default()
        },
    )?;
    if let Some(cross) = trace.crossing {
        let sol = solve_fixed_lambda(lambda, ell, mass, [cross.a, cross.u_min])
            .map_err(|f| newton_fail_to_error(f, lambda))?;
        return reconstruct_profile(lambda, sol[0], sol[1], n);
    }
    let lam_lo = trace
        .points
        .iter()
        .map(|p| p.lambda)
        .fold(f64::INFINITY, f64::min);
    let lam_hi = trace
        .points
        .iter()
        .map(|p| p.lambda)
        .fold(f64::NEG_INFINITY, f64::max);
    match trace.termination {
        Termination::BlowUp { lambda_n } if lambda > lam_hi => {
            Err(Error::BlowUp { lambda: lambda_n })
        }
        _ if lambda < lam_lo => Err(Error::BelowFirstBifurcation {
            lambda,
            lambda_min: lam_lo,
        }),
        Termination::BlowUp { lambda_n } => Err(Error::BlowUp { lambda: lambda_n }),
        _ => Err(Error::NoConvergence {
            residual: f64::NAN,
            iterations: 0,
        }),
    }
}

// ---------------------------------------------------------------------------
// Branch continuation
// ---------------------------------------------------------------------------

/// One continuation sample along a branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub lambda: f64,
    pub a: f64,
    pub u_min: f64,
    /// Profile value at `x = 0` under the start-decreasing convention, i.e. `u_max`.
    pub u_at_0: f64,
    pub amplitude: f64,
}

/// How a traced branch ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// Gradient blow-up: `lambda_n` is the bracketed boundary value.
    BlowUp {
        lambda_n: f64,
    },
    ReachedLambdaMax,
    /// Amplitude collapsed back onto the trivial line.
    ReachedTrivial,
}

/// Interpolated branch crossing of a requested lambda (see [`TraceConfig::lambda_stop`]).
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    pub a: f64,
    pub u_min: f64,
}

/// An ordered branch of classical stationary solutions.
#[derive(Debug, Clone)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub termination: Termination,
    /// Inflection count of the solutions on this branch.
    pub mode: u32,
    pub length: f64,
    pub mass: f64,
    /// Fold (saddle-node) lambda values encountered along the trace.
    pub folds: Vec<f64>,
    /// Set when `lambda_stop` was requested and the branch crossed it.
    pub crossing: Option<Crossing>,
}

/// Continuation controls. The defaults reproduce every branch in scope in
/// well under a second each.
#[derive(Debug, Clone)]
pub struct TraceConfig {
    /// Abort (ReachedLambdaMax) beyond this lambda.
    pub lambda_max: f64,
    /// Amplitude of the small-amplitude seed below the onset.
    pub seed_amplitude: f64,
    /// Initial natural step in lambda.
    pub lambda_step: f64,
    /// Initial and maximal steps for the u_min parameterization.
    pub umin_step: f64,
    pub umin_step_cap: f64,
    /// Per-step cap on |Delta u_min| in the natural-lambda mode.
    pub umin_jump_cap: f64,
    /// Certified bracket width around the termination value.
    pub lambda_bracket: f64,
    /// Hard cap on accepted points.
    pub max_points: usize,
    /// Optional explicit seed `(lambda, a, u_min)` (required outside the
    /// bifurcation regime).
    pub seed: Option<(f64, f64, f64)>,
    /// Stop early when the branch crosses this lambda, recording the crossing.
    pub lambda_stop: Option<f64>,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            lambda_max: 50.0,
            seed_amplitude: 1e-3,
            lambda_step: 1e-2,
            umin_step: 2e-3,
            umin_step_cap: 5e-3,
            umin_jump_cap: 2e-2,
            lambda_bracket: 1e-4,
            max_points: 50_000,
            seed: None,
            lambda_stop: None,
        }
    }
}

/// Traces the branch of `n`-inflection classical solutions.
///
/// Starts from the small-amplitude seed at the onset (or the explicit seed),
/// continues naturally in lambda, and swaps to the `u_min` parameterization
/// when the lambda step stalls, so folds are rounded. When the solve fails at
/// a vanishing step the termination value is certified by a success/failure
/// pair `lambda_bracket` apart and recorded as `lambda_n`.
pub fn trace_branch(length: f64, mass: f64, n: u32, cfg: &TraceConfig) -> Result<Branch> {
    assert!(n >= 1, "inflection count must be at least 1");
    assert!(length > 0.0, "length must be positive");
    let ell = length / n as f64;

    // seed
    let (mut lambda, mut a, mut u_min) = match cfg.seed {
        Some((l0, a0, m0)) => {
            let sol = solve_fixed_lambda(l0, ell, mass, [a0, m0])
                .map_err(|_| Error::SeedFailure { lambda: l0 })?;
            (l0, sol[0], sol[1])
        }
        None => {
            if classify(n, length, mass).kind == PitchforkKind::NoBifurcation {
                return Err(Error::NoBifurcationRegime(mass.abs()));
            }
            let lambda_k = bifurcation_lambda(n, length, mass)?;
            let m0 = mass - cfg.seed_amplitude;
            let sol = solve_fixed_umin(m0, ell, mass, [lambda_k, bulk_force(mass)])
                .map_err(|_| Error::SeedFailure { lambda: lambda_k })?;
            (sol[0], sol[1], m0)
        }
    };

    let mut points = Vec::with_capacity(512);
    let push =
        |points: &mut Vec<BranchPoint>, lambda: f64, a: f64, u_min: f64| -> Result<BranchPoint> {
            let (u_max, _, _) =
                piece_geometry(lambda, a, u_min).map_err(|f| fail_to_error(f, lambda))?;
            let bp = BranchPoint {
                lambda,
                a,
                u_min,
                u_at_0: u_max,
                amplitude: u_max - u_min,
            };
            points.push(bp);
            Ok(bp)
        };
    push(&mut points, lambda, a, u_min)?;

    let mut folds = Vec::new();
    let mut crossing = None;
    let mut prev_dlambda = 0.0f64;

    // natural continuation in lambda, direction set by the branch itself
    #[derive(PartialEq)]
    enum Mode {
        Lambda,
        UMin,
    }
    let mut mode = Mode::Lambda;
    // initial lambda direction from the pitchfork classification
    let mut dlam = match classify(n, length, mass).kind {
        PitchforkKind::Supercritical => cfg.lambda_step,
        _ => -cfg.lambda_step,
    };
    if cfg.seed.is_some() {
        // explicit seeds carry no local direction information; start downhill
        // in u_min immediately
        mode = Mode::UMin;
    }
    let mut dumin = -cfg.umin_step;
    let mut successes = 0usize;

    let check_stop = |points: &[BranchPoint], crossing: &mut Option<Crossing>| -> bool {
        if let (Some(stop), true) = (cfg.lambda_stop, points.len() >= 2) {
            let p = points[points.len() - 2];
            let q = points[points.len() - 1];
            if (p.lambda - stop) * (q.lambda - stop) <= 0.0 {
                let t = if (q.lambda - p.lambda).abs() > 0.0 {
                    (stop - p.lambda) / (q.lambda - p.lambda)
                } else {
                    0.5
                };
                *crossing = Some(Crossing {
                    a: p.a + t * (q.a - p.a),
                    u_min: p.u_min + t * (q.u_min - p.u_min),
                });
                return true;
            }
        }
        false
    };

    while points.len() < cfg.max_points {
        match mode {
            Mode::Lambda => {
                let lam_try = lambda + dlam;
                if lam_try <= 0.0 {
                    dlam *= 0.5;
                    if dlam.abs() < 1e-6 {
                        mode = Mode::UMin;
                    }
                    continue;
                }
                // secant predictor
                let guess = if points.len() >= 2 {
                    let p = points[points.len() - 2];
                    let q = points[points.len() - 1];
                    let r = if (q.lambda - p.lambda).abs() > 1e-14 {
                        dlam / (q.lambda - p.lambda)
                    } else {
                        0.0
                    };
                    [a + r * (q.a - p.a), u_min + r * (q.u_min - p.u_min)]
                } else {
                    [a, u_min]
                };
                match solve_fixed_lambda(lam_try, ell, mass, guess) {
                    Ok(sol) if (sol[1] - u_min).abs() <= cfg.umin_jump_cap => {
                        prev_dlambda = lam_try - lambda;
                        lambda = lam_try;
                        a = sol[0];
                        u_min = sol[1];
                        push(&mut points, lambda, a, u_min)?;
                        if check_stop(&points, &mut crossing) {
                            return Ok(finish(
                                points,
                                n,
                                length,
                                mass,
                                folds,
                                crossing,
                                Termination::ReachedLambdaMax,
                            ));
                        }
                        successes += 1;
                        if successes >= 3 {
                            dlam = (dlam * 2.0).clamp(-0.05, 0.05);
                            successes = 0;
                        }
                        if lambda >= cfg.lambda_max {
                            return Ok(finish(
                                points,
                                n,
                                length,
                                mass,
                                folds,
                                crossing,
                                Termination::ReachedLambdaMax,
                            ));
                        }
                    }
                    _ => {
                        successes = 0;
                        dlam *= 0.5;
                        if dlam.abs() < 1e-6 {
                            mode = Mode::UMin;
                            // pick the u_min direction the branch has been moving in
                            dumin = if points.len() >= 2 {
                                let d =
                                    points[points.len() - 1].u_min - points[points.len() - 2].u_min;
                                if d.abs() > 1e-12 {
                                    d.signum() * cfg.umin_step
                                } else {
                                    -cfg.umin_step
                                }
                            } else {
                                -cfg.umin_step
                            };
                        }
                    }
                }
            }
            Mode::UMin => {
                let umin_try = u_min + dumin;
                let guess = if points.len() >= 2 {
                    let p = points[points.len() - 2];
                    let q = points[points.len() - 1];
                    let r = if (q.u_min - p.u_min).abs() > 1e-14 {
                        dumin / (q.u_min - p.u_min)
                    } else {
                        0.0
                    };
                    [lambda + r * (q.lambda - p.lambda), a + r * (q.a - p.a)]
                } else {
                    [lambda, a]
                };
                match solve_fixed_umin(umin_try, ell, mass, guess) {
                    Ok(sol) => {
                        let new_dlambda = sol[0] - lambda;
                        if prev_dlambda != 0.0
                            && new_dlambda != 0.0
                            && new_dlambda.signum() != prev_dlambda.signum()
                        {
                            // fold between the last two points: quadratic vertex
                            let p = points[points.len() - 1];
                            folds.push(fold_vertex(
                                points.get(points.len().wrapping_sub(2)).copied(),
                                p,
                                (sol[0], umin_try),
                            ));
                        }
                        if new_dlambda != 0.0 {
                            prev_dlambda = new_dlambda;
                        }
                        lambda = sol[0];
                        a = sol[1];
                        u_min = umin_try;
                        push(&mut points, lambda, a, u_min)?;
                        if check_stop(&points, &mut crossing) {
                            return Ok(finish(
                                points,
                                n,
                                length,
                                mass,
                                folds,
                                crossing,
                                Termination::ReachedLambdaMax,
                            ));
                        }
                        if dumin.abs() < cfg.umin_step_cap {
                            dumin *= 1.4;
                        }
                        if lambda >= cfg.lambda_max {
                            return Ok(finish(
                                points,
                                n,
                                length,
                                mass,
                                folds,
                                crossing,
                                Termination::ReachedLambdaMax,
                            ));
                        }
                        if points.len() > 10
                            && (points.last().unwrap().amplitude) < 0.5 * cfg.seed_amplitude
                        {
                            return Ok(finish(
                                points,
                                n,
                                length,
                                mass,
                                folds,
                                crossing,
                                Termination::ReachedTrivial,
                            ));
                        }
                    }
                    Err(_) => {
                        dumin *= 0.5;
                        if dumin.abs() < 1e-9 {
                            // endpoint: certify the bracket in lambda
                            let dir = if points.len() >= 2 {
                                (lambda - points[points.len() - 2].lambda).signum()
                            } else {
                                1.0
                            };
                            let probe = lambda + dir * cfg.lambda_bracket;
                            match solve_fixed_lambda(probe, ell, mass, [a, u_min]) {
                                // a solve landing far from the endpoint is a
                                // different branch section, not a continuation
                                Err(_) => {
                                    return Ok(finish(
                                        points,
                                        n,
                                        length,
                                        mass,
                                        folds,
                                        crossing,
                                        Termination::BlowUp { lambda_n: lambda },
                                    ));
                                }
                                Ok(sol) if (sol[1] - u_min).abs() > cfg.umin_jump_cap => {
                                    return Ok(finish(
                                        points,
                                        n,
                                        length,
                                        mass,
                                        folds,
                                        crossing,
                                        Termination::BlowUp { lambda_n: lambda },
                                    ));
                                }
                                Ok(sol) => {
                                    // the branch does continue: resume from there
                                    lambda = probe;
                                    a = sol[0];
                                    u_min = sol[1];
                                    push(&mut points, lambda, a, u_min)?;
                                    if check_stop(&points, &mut crossing) {
                                        return Ok(finish(
                                            points,
                                            n,
                                            length,
                                            mass,
                                            folds,
                                            crossing,
                                            Termination::ReachedLambdaMax,
                                        ));
                                    }
                                    dumin = -cfg.umin_step * dir_from(&points);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(finish(
        points,
        n,
        length,
        mass,
        folds,
        crossing,
        Termination::ReachedLambdaMax,
    ))
}

fn dir_from(points: &[BranchPoint]) -> f64 {
    if points.len() >= 2 {
        let d = points[points.len() - 1].u_min - points[points.len() - 2].u_min;
        if d.abs() > 1e-12 {
            return -d.signum();
        }
    }
    1.0
}

/// Quadratic vertex of lambda(u_min) through up to three points around a fold.
fn fold_vertex(p0: Option<BranchPoint>, p1: BranchPoint, p2: (f64, f64)) -> f64 {
    let Some(p0) = p0 else { return p1.lambda };
    let (x0, y0) = (p0.u_min, p0.lambda);
    let (x1, y1) = (p1.u_min, p1.lambda);
    let (x2, y2) = (p2.1, p2.0);
    let d0 = (y1 - y0) / (x1 - x0);
    let d1 = (y2 - y1) / (x2 - x1);
    let c2 = (d1 - d0) / (x2 - x0);
    if c2.abs() < 1e-300 {
        return y1.max(y0).max(y2);
    }
    let xv = 0.5 * (x0 + x1 - d0 / c2);
    y0 + d0 * (xv - x0) + c2 * (xv - x0) * (xv - x1)
}

fn finish(
    points: Vec<BranchPoint>,
    mode: u32,
    length: f64,
    mass: f64,
    folds: Vec<f64>,
    crossing: Option<Crossing>,
    termination: Termination,
) -> Branch {
    Branch {
        points,
        termination,
        mode,
        length,
        mass,
        folds,
        crossing,
    }
}

// ---------------------------------------------------------------------------
// Blow-up boundary curve
// ---------------------------------------------------------------------------

/// Length of the limiting (infinite-gradient) piece at `(lambda, a)`: the
/// level through `u_star` has `g(c) = 0` exactly, so the slope diverges at the
/// centre while the piece length stays finite.
pub fn limiting_piece_length(lambda: f64, a: f64) -> Result<f64> {
    let (u_star, u_star_star) = crate::phase_plane::confinement_values(lambda, a)?;
    let half = 0.5 * (u_star_star - u_star);
    let s = u_star + u_star_star;
    let kappa = s * s - u_star * u_star_star - 2.0;
    let mut prev: Option<f64> = None;
    for rule in &rule_ladder()[1..] {
        let mut len = 0.0;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let theta = 0.5 * std::f64::consts::PI * (x + 1.0);
            let (sin_h, cos_h) = (0.5 * theta).sin_cos();
            let du = 2.0 * half * sin_h * sin_h;
            let u = u_star + du;
            let umu = 2.0 * half * cos_h * cos_h;
            let big_w = (-((u + s) * u + kappa)).max(0.0);
            let d = (0.25 * lambda * du * umu * big_w).min(2.0);
            let omg2 = d * (2.0 - d);
            if omg2 > 0.0 {
                len += w * (1.0 - d) / omg2.sqrt() * half * (2.0 * sin_h * cos_h);
            }
        }
        len *= 0.5 * std::f64::consts::PI;
        if let Some(p) = prev {
            if (len - p).abs() <= 1e-9 * len.abs().max(1.0) {
                return Ok(len);
            }
        }
        prev = Some(len);
    }
    Ok(prev.expect("ladder is non-empty"))
}

/// One sample of the blow-up boundary: at this `a`, classical monotone pieces
/// of the given length stop existing beyond `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub a: f64,
    pub lambda: f64,
}

/// `lambda*(a, L)`: the root in lambda of `limiting_piece_length = L`,
/// bracketed above the loop-breaking threshold where the limiting length
/// diverges and decreasing towards zero as lambda grows.
pub fn lambda_star(a: f64, length: f64) -> Result<f64> {
    if a.abs() >= BISTABLE_A_MAX {
        return Err(Error::OutsideBistableRange(a));
    }
    let threshold = crate::phase_plane::loop_break_lambda(a)?;
    // lower bracket: limiting length exceeds the target close to the threshold
    let mut lo = threshold * (1.0 + 1e-6);
    let mut offset = threshold * 1e-6;
    loop {
        match limiting_piece_length(lo, a) {
            Ok(len) if len > length => break,
            _ => {
                offset *= 0.1;
                if offset < threshold * 1e-14 {
                    return Err(Error::NoRoot(
                        "limiting length does not exceed the target near the loop threshold",
                    ));
                }
                lo = threshold + offset;
            }
        }
    }
    // upper bracket: double until the limiting length is short enough
    let mut hi = (2.0 * threshold).max(lo + 1.0);
    loop {
        match limiting_piece_length(hi, a) {
            Ok(len) if len < length => break,
            _ => {
                hi *= 2.0;
                if hi > 1e8 {
                    return Err(Error::NoRoot(
                        "no lambda with limiting length below the target in the scanned window",
                    ));
                }
            }
        }
    }
    let root = crate::numeric::bisect(
        |lam| match limiting_piece_length(lam, a) {
            Ok(len) => len - length,
            Err(_) => 1.0,
        },
        lo,
        hi,
        1e-10 * hi,
    );
    Ok(root)
}

/// Samples the boundary curve `a -> lambda*(a, L)`. The samples are
/// independent; with the `parallel` feature they run on rayon, preserving
/// input order either way.
pub fn boundary_curve(length: f64, a_values: &[f64]) -> Vec<Result<BoundaryPoint>> {
    let eval = |&a: &f64| lambda_star(a, length).map(|lambda| BoundaryPoint { a, lambda });
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        a_values.par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        a_values.iter().map(eval).collect()
    }
}

/// Sequential twin of [`boundary_curve`], kept callable regardless of the
/// `parallel` feature so the two paths can be compared.
pub fn boundary_curve_seq(length: f64, a_values: &[f64]) -> Vec<Result<BoundaryPoint>> {
    a_values
        .iter()
        .map(|&a| lambda_star(a, length).map(|lambda| BoundaryPoint { a, lambda }))
        .collect()
}
