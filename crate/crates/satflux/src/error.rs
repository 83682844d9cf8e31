use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Rejected model parameters (non-positive length, non-positive lambda, ...).
    #[error("invalid parameter: {0}")]
    InvalidParams(&'static str),

    /// `bulk_force_deriv` accepts orders 1, 2 and 3 only.
    #[error("derivative order {0} not available (expected 1, 2 or 3)")]
    InvalidDerivativeOrder(u32),

    /// `f'(M) <= 0`: no bifurcations from the trivial solution for any length.
    #[error("no bifurcation regime: |M| = {0} >= 1/sqrt(3)")]
    NoBifurcationRegime(f64),

    /// The bifurcation-point curve a_b is only defined for lambda >= pi^2/L^2.
    #[error("lambda = {lambda} below the first bifurcation at {lambda_min}")]
    BelowFirstBifurcation { lambda: f64, lambda_min: f64 },

    /// `f(u) = a` has fewer than three solutions: |a| >= 2/(3 sqrt 3).
    #[error("a = {0} outside the bistable range |a| < 2/(3 sqrt 3)")]
    OutsideBistableRange(f64),

    /// Confinement values only exist once the homoclinic (or heteroclinic)
    /// loop has broken.
    #[error("lambda = {lambda} not above the loop-breaking threshold {threshold}")]
    BelowHomoclinicThreshold { lambda: f64, threshold: f64 },

    /// The orbit reaches infinite gradient before turning: no classical
    /// solution on this energy level.
    #[error("gradient blow-up: no classical solution at lambda = {lambda}")]
    BlowUp { lambda: f64 },

    /// Newton stalled without evidence of blow-up. Distinct from [`Error::BlowUp`]:
    /// only a bracketed success/failure pair certifies a nonexistence boundary.
    #[error("solver did not converge (residual {residual:.3e} after {iterations} iterations)")]
    NoConvergence { residual: f64, iterations: usize },

    /// Branch continuation could not start from the small-amplitude seed.
    #[error("branch seed failed near lambda = {lambda}")]
    SeedFailure { lambda: f64 },

    /// A time step produced a non-finite nodal value (dt above the stability cap).
    #[error("non-finite value during time stepping at t = {time}")]
    NonFinite { time: f64 },

    /// A bracketed root-find found no sign change in the scanned window.
    #[error("no root located: {0}")]
    NoRoot(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
