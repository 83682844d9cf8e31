//! Local bifurcation analysis of the trivial solution `u = M`.
//!
//! The k-th bifurcation happens at `lambda_k = k^2 pi^2 / (L^2 f'(M))` and is
//! a pitchfork (the problem is equivariant under `x -> L - x`). Its direction
//! is decided by the cubic normal-form coefficient `h_yyy` together with
//! `h_{lambda y} = L f'(M) > 0`: positive `h_yyy` bends the branch towards
//! smaller lambda (subcritical), negative towards larger (supercritical).
//! For the fixed force `f(u) = u - u^3` everything is closed-form;
//! [`verify_reduction`] re-derives the two coefficients by quadrature as an
//! independent check of the algebra.

use crate::model::{bulk_force, bulk_force_deriv};
use crate::numeric::GaussRule;
use crate::{Error, Result};
use std::f64::consts::PI;

/// `1/sqrt(3)`: above this |M| the trivial solution never bifurcates.
pub const MASS_NO_BIFURCATION: f64 = 0.577_350_269_189_625_8;
/// `1/sqrt(5)`: above this |M| the pitchfork is subcritical for every length.
pub const MASS_ALWAYS_SUBCRITICAL: f64 = 0.447_213_595_499_958;

/// Direction of a pitchfork bifurcation from the trivial solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PitchforkKind {
    Supercritical,
    Subcritical,
    /// `f'(M) <= 0`: no bifurcation for any length.
    NoBifurcation,
}

/// Classification of the k-th bifurcation at given length and mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchforkClass {
    pub kind: PitchforkKind,
    pub k: u32,
    /// Onset value `lambda_k`; absent in the no-bifurcation regime.
    pub lambda_k: Option<f64>,
    /// Cubic normal-form coefficient; absent in the no-bifurcation regime.
    pub h_yyy: Option<f64>,
    /// Mixed coefficient `L f'(M)`; absent in the no-bifurcation regime.
    pub h_lambda_y: Option<f64>,
    /// Set when `h_yyy` vanishes (length exactly at the critical value).
    pub degenerate: bool,
}

fn f_prime(m: f64) -> f64 {
    1.0 - 3.0 * m * m
}

/// Onset of the k-th bifurcation: `k^2 pi^2 / (L^2 f'(M))`.
pub fn bifurcation_lambda(k: u32, length: f64, mass: f64) -> Result<f64> {
    assert!(k >= 1, "mode index must be at least 1");
    assert!(length > 0.0, "length must be positive");
    let fp = f_prime(mass);
    if fp <= 0.0 {
        return Err(Error::NoBifurcationRegime(mass.abs()));
    }
    let kf = k as f64;
    Ok(kf * kf * PI * PI / (length * length * fp))
}

/// Critical length separating sub- from supercritical pitchforks:
/// `(k pi / sqrt 2) (1 - 3M^2) / sqrt(1 - 5M^2)`.
///
/// Returns `None` for `|M| >= 1/sqrt 5`, where no length threshold exists
/// (the vertical asymptote of the curve): see [`classify`].
pub fn critical_length(k: u32, mass: f64) -> Option<f64> {
    assert!(k >= 1, "mode index must be at least 1");
    let m2 = mass * mass;
    if 5.0 * m2 >= 1.0 {
        return None;
    }
    // k scaling kept exact: L*(k, M) = k * L*(1, M)
    let base = PI / 2.0_f64.sqrt() * (1.0 - 3.0 * m2) / (1.0 - 5.0 * m2).sqrt();
    Some(k as f64 * base)
}

/// Normal-form coefficients `(h_yyy, h_lambda_y)` of the reduced bifurcation
/// function at `(lambda_k, 0)`.
///
/// `h_yyy = 3 k^2 pi^2 / (4 L^3 f'(M)^2) * bracket` with
/// `bracket = 3 k^2 pi^2 f'(M)^2 + L^2 f'''(M) f'(M) + (L^2/3) f''(M)^2`,
/// which specializes to `3 k^2 pi^2 (1 - 3M^2)^2 + 6 L^2 (5M^2 - 1)` for the
/// cubic force. `h_lambda_y = L f'(M)`.
pub fn h_coefficients(k: u32, length: f64, mass: f64) -> Result<(f64, f64)> {
    assert!(k >= 1, "mode index must be at least 1");
    let fp = f_prime(mass);
    if fp <= 0.0 {
        return Err(Error::NoBifurcationRegime(mass.abs()));
    }
    let fpp = -6.0 * mass;
    let fppp = -6.0;
    let kpi2 = (k as f64 * PI).powi(2);
    let l2 = length * length;
    let bracket = 3.0 * kpi2 * fp * fp + l2 * fppp * fp + l2 / 3.0 * fpp * fpp;
    let h_yyy = 3.0 * kpi2 / (4.0 * length * l2 * fp * fp) * bracket;
    Ok((h_yyy, length * fp))
}

/// Classifies the k-th bifurcation. Total: the no-bifurcation regime is an
/// answer, not an error. The direction comes from the sign of `h_yyy`
/// (`h_lambda_y > 0` always holds where bifurcations exist), so the regime
/// `1/sqrt 5 <= |M| < 1/sqrt 3` needs no special casing.
pub fn classify(k: u32, length: f64, mass: f64) -> PitchforkClass {
    assert!(k >= 1, "mode index must be at least 1");
    assert!(length > 0.0, "length must be positive");
    if f_prime(mass) <= 0.0 {
        return PitchforkClass {
            kind: PitchforkKind::NoBifurcation,
            k,
            lambda_k: None,
            h_yyy: None,
            h_lambda_y: None,
            degenerate: false,
        };
    }
    let lambda_k = bifurcation_lambda(k, length, mass).expect("checked regime");
    let (h_yyy, h_ly) = h_coefficients(k, length, mass).expect("checked regime");
    // degenerate when the bracket is negligible against its two
    // contributions: the direction is then not resolvable at reporting
    // precision (covers lengths equal to L* to four decimals and better)
    let kpi2 = (k as f64 * PI).powi(2);
    let m2 = mass * mass;
    let scale =
        3.0 * kpi2 * (1.0 - 3.0 * m2).powi(2) + 6.0 * length * length * (5.0 * m2 - 1.0).abs();
    let prefactor = 3.0 * kpi2 / (4.0 * length.powi(3) * f_prime(mass).powi(2));
    let degenerate = h_yyy.abs() <= 1e-4 * prefactor * scale;
    let kind = if h_yyy < 0.0 && !degenerate {
        PitchforkKind::Supercritical
    } else {
        PitchforkKind::Subcritical
    };
    PitchforkClass {
        kind,
        k,
        lambda_k: Some(lambda_k),
        h_yyy: Some(h_yyy),
        h_lambda_y: Some(h_ly),
        degenerate,
    }
}

/// The nonlocal constant along the line of trivial solutions: `a = f(M) = M - M^3`.
#[inline]
pub fn trivial_line_a(mass: f64) -> f64 {
    bulk_force(mass)
}

/// The curve of first bifurcation points in the `(lambda, a)` plane for fixed
/// length: `a_b(lambda) = (1/(3 sqrt 3)) sqrt(1 - pi^2/(L^2 lambda)) (2 + pi^2/(L^2 lambda))`.
pub fn bifurcation_point_curve(lambda: f64, length: f64) -> Result<f64> {
    assert!(length > 0.0, "length must be positive");
    let r = PI * PI / (length * length * lambda);
    if lambda <= 0.0 || r > 1.0 {
        return Err(Error::BelowFirstBifurcation {
            lambda,
            lambda_min: PI * PI / (length * length),
        });
    }
    Ok((1.0 - r).sqrt() * (2.0 + r) / (3.0 * 3.0_f64.sqrt()))
}

/// Samples `a_b` on a uniform lambda grid over `[pi^2/L^2, lambda_max]`.
/// Runs the samples through rayon when the `parallel` feature is on; the
/// output is identical either way.
pub fn sample_onset_curve(length: f64, lambda_max: f64, samples: usize) -> Vec<(f64, f64)> {
    let lambda_min = PI * PI / (length * length);
    let n = samples.max(2);
    let grid: Vec<f64> = (0..n)
        .map(|i| lambda_min + (lambda_max - lambda_min) * i as f64 / (n - 1) as f64)
        .collect();
    let eval = |&l: &f64| (l, bifurcation_point_curve(l, length).unwrap_or(0.0));
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        grid.par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        grid.iter().map(eval).collect()
    }
}

/// Numeric re-derivation of the reduction coefficients by quadrature.
#[derive(Debug, Clone, Copy)]
pub struct ReductionReport {
    pub h_yyy_numeric: f64,
    pub h_lambda_y_numeric: f64,
    pub h_yyy_closed: f64,
    pub h_lambda_y_closed: f64,
    /// Pointwise residual of the correction term's ODE at the quadrature nodes.
    pub max_ode_residual: f64,
}

impl ReductionReport {
    pub fn h_yyy_gap(&self) -> f64 {
        (self.h_yyy_numeric - self.h_yyy_closed).abs()
    }
    pub fn h_lambda_y_gap(&self) -> f64 {
        (self.h_lambda_y_numeric - self.h_lambda_y_closed).abs()
    }
}

/// Re-derives `h_yyy` and `h_lambda_y` from their inner-product definitions
/// by Gauss-Legendre quadrature on `[0, L]` and checks the closed-form
/// correction term `l(x) = cos(k pi x / L) - (f''(M)/(6 f'(M))) cos(2 k pi x / L)`
/// against its defining ODE pointwise.
///
/// All integrands are trigonometric polynomials of degree at most `4k`;
/// `max(64, 16k)` nodes integrate them to rounding. Pass that as
/// `quadrature_nodes` unless deliberately stressing the quadrature.
pub fn verify_reduction(
    k: u32,
    length: f64,
    mass: f64,
    quadrature_nodes: usize,
) -> Result<ReductionReport> {
    let fp = bulk_force_deriv(1, mass).expect("order 1");
    if fp <= 0.0 {
        return Err(Error::NoBifurcationRegime(mass.abs()));
    }
    let fpp = bulk_force_deriv(2, mass).expect("order 2");
    let fppp = bulk_force_deriv(3, mass).expect("order 3");
    let lambda_k = bifurcation_lambda(k, length, mass)?;
    let (h_yyy_closed, h_ly_closed) = h_coefficients(k, length, mass)?;

    let rule = GaussRule::new(quadrature_nodes.max(2));
    let omega = k as f64 * PI / length;
    let vk = |x: f64| (omega * x).cos();
    let vk_star = |x: f64| 2.0 * (omega * x).cos();
    let l_corr = |x: f64| (omega * x).cos() - fpp / (6.0 * fp) * (2.0 * omega * x).cos();

    // mean-zero parts of the second and third differentials, built from the
    // projected means computed by the same quadrature
    let mean = |f: &dyn Fn(f64) -> f64| rule.integrate(0.0, length, f) / length;
    let mean_vk_l = mean(&|x| vk(x) * l_corr(x));
    let mean_vk3 = mean(&|x| vk(x).powi(3));

    // d2G(v_k, l) = lambda_k f'' [ v_k l - mean(v_k l) ]
    let d2 = |x: f64| lambda_k * fpp * (vk(x) * l_corr(x) - mean_vk_l);
    // d3G(v_k, v_k, v_k) = -9 v_k'' (v_k')^2 + lambda_k f''' [ v_k^3 - mean(v_k^3) ]
    let d3 = |x: f64| {
        let s = (omega * x).sin();
        let c = (omega * x).cos();
        9.0 * omega.powi(4) * c * s * s + lambda_k * fppp * (c.powi(3) - mean_vk3)
    };
    let h_yyy_numeric = rule.integrate(0.0, length, |x| vk_star(x) * (d3(x) - 3.0 * d2(x)));
    let h_ly_numeric = rule.integrate(0.0, length, |x| vk_star(x) * fp * vk(x));

    // l'' + lambda_k f'(M) l = lambda_k f''(M) (cos^2 - 1/2), checked at the nodes
    let mut max_res: f64 = 0.0;
    for &node in &rule.nodes {
        let x = 0.5 * length * (node + 1.0);
        let c = (omega * x).cos();
        let lpp = -omega * omega * (omega * x).cos()
            + fpp / (6.0 * fp) * (2.0 * omega) * (2.0 * omega) * (2.0 * omega * x).cos();
        let res = lpp + lambda_k * fp * l_corr(x) - lambda_k * fpp * (c * c - 0.5);
        max_res = max_res.max(res.abs());
    }

    Ok(ReductionReport {
        h_yyy_numeric,
        h_lambda_y_numeric: h_ly_numeric,
        h_yyy_closed,
        h_lambda_y_closed: h_ly_closed,
        max_ode_residual: max_res,
    })
}

/// Default node count for [`verify_reduction`]: integrates every integrand
/// (degree <= 4k trigonometric polynomials) to rounding.
pub fn reduction_nodes(k: u32) -> usize {
    (16 * k as usize).max(64)
}
