//! Explicit mass-conserving finite-difference scheme for the time-dependent
//! non-local equation.
//!
//! The interval is split into `N+1` nodes `x_i = (i-1) dx`; interior nodes own
//! cells of width `dx`, the two boundary nodes own half cells. The saturating
//! flux is differenced at the half points, the boundary updates carry the
//! half-cell factor `2/dx^2` with a single one-sided flux, and the nonlocal
//! term uses the midpoint rule with the matching half weights. With those
//! weights every flux and reaction contribution telescopes, so the weighted
//! nodal sum (the discrete mass) is conserved exactly in real arithmetic.

use crate::model::{bulk_force, ModelParams};
use crate::{Error, Result};

/// Largest |f'| on [-1.5, 1.5]; bounds the reaction stiffness.
const MAX_FPRIME: f64 = 5.75;

/// Nodal state of the discretization.
#[derive(Debug, Clone)]
pub struct GridState {
    values: Vec<f64>,
    dx: f64,
    time: f64,
    params: ModelParams,
    initial_mass: f64,
}

impl GridState {
    /// Builds a state from nodal values; `values.len()` must be `N + 1` with
    /// `N >= 4` and every value finite.
    pub fn new(values: Vec<f64>, params: ModelParams) -> Result<Self> {
        if values.len() < 5 {
            return Err(Error::InvalidParams("need at least 5 nodes (N >= 4)"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("nodal values must be finite"));
        }
        let dx = params.length / (values.len() - 1) as f64;
        let initial_mass = weighted_mean(&values, dx, params.length);
        Ok(Self {
            values,
            dx,
            time: 0.0,
            params,
            initial_mass,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    /// Discrete mass recorded at construction; later audits compare to this.
    pub fn initial_mass(&self) -> f64 {
        self.initial_mass
    }

    /// Current discrete mass `(dx/L) [u_1/2 + sum u_i + u_{N+1}/2]`.
    pub fn discrete_mass(&self) -> f64 {
        weighted_mean(&self.values, self.dx, self.params.length)
    }

    /// Node coordinates `x_i = (i-1) dx`.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    /// Largest one-sided slope magnitude `|u_{i+1} - u_i| / dx`.
    pub fn max_slope(&self) -> f64 {
        let mut m: f64 = 0.0;
        for w in self.values.windows(2) {
            m = m.max((w[1] - w[0]).abs());
        }
        m / self.dx
    }

    /// One forward-Euler step, returning the updated state. The run loop uses
    /// the buffered [`step_into`](Self::step_into) instead.
    pub fn step(&self, dt: f64) -> Result<GridState> {
        let mut out = vec![0.0; self.values.len()];
        self.step_into(dt, &mut out)?;
        let mut next = self.clone();
        std::mem::swap(&mut next.values, &mut out);
        next.time = self.time + dt;
        Ok(next)
    }

    /// Writes the forward-Euler update into `out` and returns the largest
    /// nodal change. Errors with [`Error::NonFinite`] on overflow.
    pub fn step_into(&self, dt: f64, out: &mut [f64]) -> Result<f64> {
        debug_assert_eq!(out.len(), self.values.len());
        let u = &self.values;
        let n = u.len() - 1;
        let lambda = self.params.lambda;
        let dx = self.dx;
        let dx2 = dx * dx;
        let inv_dx = 1.0 / dx;
        let s = self.nonlocal_term();

        // q(delta) = delta / sqrt(dx^2 + delta^2) keeps precision at
        // near-vertical interfaces; (1/dx)(q+ - q-) equals the textbook
        // difference of flux quotients.
        let q = |delta: f64| delta / (dx2 + delta * delta).sqrt();

        let mut max_delta: f64 = 0.0;
        let mut q_prev = q(u[1] - u[0]);
        let d0 = dt * (2.0 * inv_dx * q_prev + lambda * bulk_force(u[0]) - lambda * s);
        out[0] = u[0] + d0;
        max_delta = max_delta.max(d0.abs());
        for i in 1..n {
            let q_next = q(u[i + 1] - u[i]);
            let di = dt * (inv_dx * (q_next - q_prev) + lambda * bulk_force(u[i]) - lambda * s);
            out[i] = u[i] + di;
            max_delta = max_delta.max(di.abs());
            q_prev = q_next;
        }
        let dn = dt * (-2.0 * inv_dx * q_prev + lambda * bulk_force(u[n]) - lambda * s);
        out[n] = u[n] + dn;
        max_delta = max_delta.max(dn.abs());

        if !max_delta.is_finite() || out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: self.time });
        }
        Ok(max_delta)
    }

    /// Midpoint-rule quadrature of `(1/L) \int f(u) dx` with half weights at
    /// the boundary nodes: compensated summation in a fixed left-to-right
    /// order (the stepper multiplies by lambda).
    pub fn nonlocal_term(&self) -> f64 {
        let u = &self.values;
        let n = u.len() - 1;
        let mut sum = NeumaierSum::new();
        sum.add(0.5 * bulk_force(u[0]));
        for &ui in &u[1..n] {
            sum.add(bulk_force(ui));
        }
        sum.add(0.5 * bulk_force(u[n]));
        sum.value() * self.dx / self.params.length
    }
}

/// Weighted nodal mean with half weights at the ends (compensated).
fn weighted_mean(u: &[f64], dx: f64, length: f64) -> f64 {
    let n = u.len() - 1;
    let mut sum = NeumaierSum::new();
    sum.add(0.5 * u[0]);
    for &ui in &u[1..n] {
        sum.add(ui);
    }
    sum.add(0.5 * u[n]);
    sum.value() * dx / length
}

/// Neumaier variant of Kahan compensated summation.
struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    fn new() -> Self {
        Self {
            sum: 0.0,
            comp: 0.0,
        }
    }

    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Time-stepping controls.
#[derive(Debug, Clone)]
pub struct SchemeConfig {
    /// Cell count `N` (nodes are `N + 1`).
    pub n_cells: usize,
    /// Time step; `None` selects [`default_dt`].
    pub dt: Option<f64>,
    /// Horizon.
    pub t_end: f64,
    /// Stop when `max |du| / dt` drops below this.
    pub equilibrium_tol: f64,
    /// Steps between discrete-mass audits.
    pub audit_every: usize,
    /// Keep every k-th state in the run history (None: no history).
    pub snapshot_every: Option<usize>,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            n_cells: 500,
            dt: None,
            t_end: 1e3,
            equilibrium_tol: 1e-8,
            audit_every: 1000,
            snapshot_every: None,
        }
    }
}

/// Default explicit step `0.2 min(dx^2, 1/(lambda max|f'|))`: the saturating
/// flux bounds the diffusion coefficient by one (parabolic cap) and the
/// reaction term bounds the overshoot at large lambda.
pub fn default_dt(params: ModelParams, dx: f64) -> f64 {
    0.2 * (dx * dx).min(1.0 / (params.lambda * MAX_FPRIME))
}

/// Hard stability cap: 2.5x the default.
pub fn max_dt(params: ModelParams, dx: f64) -> f64 {
    0.5 * (dx * dx).min(1.0 / (params.lambda * MAX_FPRIME))
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// `max |du|/dt` dropped below the tolerance.
    Equilibrium,
    /// Reached `t_end`.
    Horizon,
    /// A step produced a non-finite value (dt above the stability cap).
    NonFinite,
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: GridState,
    pub reason: StopReason,
    pub steps: u64,
    /// Largest |mass(t) - mass(0)| seen at the audits (and at the end).
    pub max_mass_drift: f64,
    /// Decimated history when requested: `(t, nodal values)`.
    pub snapshots: Vec<(f64, Vec<f64>)>,
}

/// Marches the scheme until equilibrium, the horizon, or overflow.
pub fn run(state: GridState, cfg: &SchemeConfig) -> Result<RunOutcome> {
    let dt = cfg.dt.unwrap_or_else(|| default_dt(state.params, state.dx));
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidParams("dt must be positive"));
    }
    if dt > max_dt(state.params, state.dx) * (1.0 + 1e-12) {
        return Err(Error::InvalidParams("dt exceeds the stability cap"));
    }
    let mut cur = state;
    let mut buf = vec![0.0; cur.values.len()];
    let mut steps = 0u64;
    let mut max_drift: f64 = 0.0;
    let mut snapshots = Vec::new();
    if cfg.snapshot_every.is_some() {
        snapshots.push((cur.time, cur.values.clone()));
    }
    let reason = loop {
        if cur.time >= cfg.t_end {
            break StopReason::Horizon;
        }
        match cur.step_into(dt, &mut buf) {
            Ok(max_delta) => {
                std::mem::swap(&mut cur.values, &mut buf);
                steps += 1;
                cur.time += dt;
                if let Some(k) = cfg.snapshot_every {
                    if steps.is_multiple_of(k.max(1) as u64) {
                        snapshots.push((cur.time, cur.values.clone()));
                    }
                }
                if steps.is_multiple_of(cfg.audit_every.max(1) as u64) {
                    max_drift = max_drift.max((cur.discrete_mass() - cur.initial_mass).abs());
                }
                if max_delta / dt < cfg.equilibrium_tol {
                    break StopReason::Equilibrium;
                }
            }
            Err(Error::NonFinite { .. }) => break StopReason::NonFinite,
            Err(e) => return Err(e),
        }
    };
    max_drift = max_drift.max((cur.discrete_mass() - cur.initial_mass).abs());
    if cfg.snapshot_every.is_some() {
        snapshots.push((cur.time, cur.values.clone()));
    }
    Ok(RunOutcome {
        state: cur,
        reason,
        steps,
        max_mass_drift: max_drift,
        snapshots,
    })
}

/// The preset initial data used by the numerical experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// `u0(x) = offset + amplitude tanh(sharpness (x/L - gamma))`.
    TanhStep {
        offset: f64,
        amplitude: f64,
        gamma: f64,
        sharpness: f64,
    },
    /// The piecewise two-interface datum:
    /// `0.32 - 0.6 tanh(1000 (x/L - 0.2))` on `[0, L/2)`,
    /// `0.32 + 0.6 tanh(1000 (x/L - 0.8))` on `[L/2, L)`.
    TwoInterface,
    /// `u0 = value` everywhere.
    Constant(f64),
    /// `u0(x) = mean + amplitude cos(k pi x / L)`.
    CosinePerturbation {
        mean: f64,
        amplitude: f64,
        mode: u32,
    },
}

impl InitialData {
    /// Evaluates the datum at `x` on the interval `(0, length)`.
    pub fn eval(&self, x: f64, length: f64) -> f64 {
        match *self {
            InitialData::TanhStep {
                offset,
                amplitude,
                gamma,
                sharpness,
            } => offset + amplitude * (sharpness * (x / length - gamma)).tanh(),
            InitialData::TwoInterface => {
                if x < 0.5 * length {
                    0.32 - 0.6 * (1000.0 * (x / length - 0.2)).tanh()
                } else {
                    0.32 + 0.6 * (1000.0 * (x / length - 0.8)).tanh()
                }
            }
            InitialData::Constant(v) => v,
            InitialData::CosinePerturbation {
                mean,
                amplitude,
                mode,
            } => mean + amplitude * (mode as f64 * std::f64::consts::PI * x / length).cos(),
        }
    }
}

/// Nodal evaluation of a preset on `n_cells + 1` points. The caller asserts
/// the reported discrete mass against the prescribed one.
pub fn preset_initial(kind: InitialData, params: ModelParams, n_cells: usize) -> Result<GridState> {
    let n = n_cells;
    let dx = params.length / n as f64;
    let values: Vec<f64> = (0..=n)
        .map(|i| kind.eval(i as f64 * dx, params.length))
        .collect();
    GridState::new(values, params)
}
