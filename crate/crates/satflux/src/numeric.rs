//! Small numerical kernels shared across modules: Gauss-Legendre rules and
//! bracketed bisection.

use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Computes the rule by Newton iteration on the Legendre polynomial,
    /// starting from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Gauss-Legendre order must be at least 2");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_deriv(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x.abs();
            nodes[n - 1 - i] = x.abs();
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        half * acc
    }
}

/// Value and derivative of the Legendre polynomial P_n at x via the
/// three-term recurrence.
fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Orders of the cached rule ladder used by the adaptive quadratures.
pub const LADDER_ORDERS: [usize; 8] = [16, 32, 64, 128, 256, 512, 1024, 2048];

static LADDER: OnceLock<Vec<GaussRule>> = OnceLock::new();

/// The shared, lazily-built ladder of Gauss-Legendre rules.
pub fn rule_ladder() -> &'static [GaussRule] {
    LADDER.get_or_init(|| LADDER_ORDERS.iter().map(|&n| GaussRule::new(n)).collect())
}

/// A cached rule of exactly `n` points; `n` must be one of [`LADDER_ORDERS`].
pub fn cached_rule(n: usize) -> &'static GaussRule {
    let idx = LADDER_ORDERS
        .iter()
        .position(|&m| m == n)
        .unwrap_or_else(|| panic!("order {n} not in the cached ladder"));
    &rule_ladder()[idx]
}

/// Bracketed bisection: `f(lo)` and `f(hi)` must have opposite signs.
/// Iterates until the bracket width drops below `xtol` (absolute).
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    let flo = f(lo);
    debug_assert!(
        flo == 0.0 || f(hi) == 0.0 || (flo < 0.0) != (f(hi) < 0.0),
        "bisect requires a sign change"
    );
    let lo_negative = flo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol || mid == lo || mid == hi {
            break;
        }
        if (f(mid) < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn five_point_rule_matches_reference() {
        let r = GaussRule::new(5);
        let nodes = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683_1,
            0.0,
            0.538_469_310_105_683_1,
            0.906_179_845_938_664,
        ];
        let weights = [
            0.236_926_885_056_189_08,
            0.478_628_670_499_366_47,
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_47,
            0.236_926_885_056_189_08,
        ];
        for i in 0..5 {
            assert_abs_diff_eq!(r.nodes[i], nodes[i], epsilon = 1e-15);
            assert_abs_diff_eq!(r.weights[i], weights[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn integrates_polynomials_exactly() {
        let r = GaussRule::new(8);
        // degree 15 is exact for an 8-point rule
        let exact = (3.0_f64.powi(16) - 1.0) / 16.0;
        assert_abs_diff_eq!(
            r.integrate(1.0, 3.0, |x| x.powi(15)),
            exact,
            epsilon = exact * 1e-14
        );
    }

    #[test]
    fn integrates_trig_to_machine_precision() {
        let r = cached_rule(64);
        let val = r.integrate(0.0, std::f64::consts::PI, f64::sin);
        assert_abs_diff_eq!(val, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let root = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15);
        assert_abs_diff_eq!(root, 2.0_f64.sqrt(), epsilon = 1e-14);
    }
}
