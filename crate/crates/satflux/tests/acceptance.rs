//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured numbers (run with `--nocapture` to see them).
//!
//! The slow pieces are the time-dependent runs; they are computed once and
//! shared across criteria.

use satflux::bifurcation::{
    bifurcation_lambda, classify, critical_length, reduction_nodes, verify_reduction, PitchforkKind,
};
use satflux::model::{bulk_force, ModelParams};
use satflux::ode::rk4_step;
use satflux::pde::{self, InitialData, RunOutcome, SchemeConfig, StopReason};
use satflux::phase_plane::{equilibria, heteroclinic_lambda, homoclinic_lambda};
use satflux::time_map::{
    piece_length_and_mass, profile_from_level, solve_stationary, trace_branch, StationaryProfile,
    Termination, TraceConfig,
};
use satflux::{Error, PhasePoint};
use std::f64::consts::PI;
use std::sync::OnceLock;

fn pass(criterion: u32, detail: &str) {
    println!("criterion {criterion}: PASS ({detail})");
}

#[test]
fn criterion_01_analytic_bifurcation_values() {
    let cases = [
        (1u32, 1.0, 0.1, 10.1749),
        (1, 1.7, 0.2, 3.8808),
        (1, 2.5, 0.2, 1.7945),
        (2, 2.5, 0.2, 7.1779),
        (1, 2.5, 0.3, 2.1632),
    ];
    for (k, l, m, expect) in cases {
        let got = bifurcation_lambda(k, l, m).unwrap();
        assert!(
            (got - expect).abs() <= 1e-3,
            "lambda_{k}({l}, {m}) = {got}, expected {expect}"
        );
    }
    pass(1, "five onset values within 1e-3 of the quoted ones");
}

#[test]
fn criterion_02_critical_length_values() {
    let l1 = critical_length(1, 0.2).unwrap();
    assert!((l1 - 2.1856).abs() <= 1e-4, "L*(1, 0.2) = {l1}");
    let l0 = critical_length(1, 0.0).unwrap();
    assert!((l0 - PI / 2.0_f64.sqrt()).abs() <= 1e-12, "L*(1, 0) = {l0}");
    let lt = critical_length(1, 1.0 / 15.0_f64.sqrt()).unwrap();
    let expect = 2.0 * 3.0_f64.sqrt() * PI / 5.0;
    assert!((lt - expect).abs() <= 1e-4, "turning-point L* = {lt}");
    pass(2, &format!("L* = {l1:.5}, {l0:.5}, {lt:.5}"));
}

#[test]
fn criterion_03_reduction_cross_check() {
    let mut worst_gap: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for (k, l, m) in [
        (1u32, 1.7, 0.2),
        (1, 2.5, 0.2),
        (2, 2.5, 0.2),
        (1, 1.0, 0.0),
    ] {
        let rep = verify_reduction(k, l, m, reduction_nodes(k)).unwrap();
        assert!(
            rep.h_yyy_gap() <= 1e-8,
            "h_yyy gap {} at (k, L, M) = ({k}, {l}, {m})",
            rep.h_yyy_gap()
        );
        assert!(
            rep.h_lambda_y_gap() <= 1e-8,
            "h_lambda_y gap {} at ({k}, {l}, {m})",
            rep.h_lambda_y_gap()
        );
        assert!(rep.max_ode_residual <= 1e-8, "l(x) ODE residual");
        worst_gap = worst_gap.max(rep.h_yyy_gap()).max(rep.h_lambda_y_gap());
        worst_res = worst_res.max(rep.max_ode_residual);
    }
    pass(
        3,
        &format!("worst coefficient gap {worst_gap:.2e}, worst ODE residual {worst_res:.2e}"),
    );
}

#[test]
fn criterion_04_loop_breaking_thresholds() {
    let lh = homoclinic_lambda(0.1).unwrap();
    assert!((lh - 6.3426).abs() <= 1e-3, "lambda_h(0.1) = {lh}");
    let het = heteroclinic_lambda();
    assert!((het - 4.0).abs() <= 1e-10, "heteroclinic lambda = {het}");
    for a in [0.05, 0.1, 0.2, 0.3, 0.384] {
        assert_eq!(
            homoclinic_lambda(-a).unwrap(),
            homoclinic_lambda(a).unwrap(),
            "mirror symmetry broken at a = {a}"
        );
    }
    pass(4, &format!("lambda_h(0.1) = {lh:.5}, heteroclinic = {het}"));
}

#[test]
fn criterion_05_branch_terminations() {
    // (L, M, n, lambda_n, endpoint a when quoted)
    let cases: [(f64, f64, u32, f64, Option<f64>); 4] = [
        (1.0, 0.1, 1, 5.6579, Some(0.0289)),
        (2.5, 0.3, 1, 4.0860, Some(0.0051)),
        (1.7, 0.2, 1, 4.3032, None),
        (2.5, 0.2, 1, 4.0433, None),
    ];
    for (l, m, n, expect, a_end) in cases {
        let branch = trace_branch(l, m, n, &TraceConfig::default()).unwrap();
        let Termination::BlowUp { lambda_n } = branch.termination else {
            panic!("branch ({l}, {m}, {n}) did not terminate in blow-up");
        };
        assert!(
            (lambda_n - expect).abs() <= 0.05,
            "lambda_{n}({m}, {l}) = {lambda_n}, expected {expect}"
        );
        if let Some(a_expect) = a_end {
            let a_got = branch.points.last().unwrap().a;
            assert!(
                (a_got - a_expect).abs() <= 2e-3,
                "endpoint a = {a_got}, expected {a_expect}"
            );
        }
    }
    // mode 2 with the fold
    let branch = trace_branch(2.5, 0.2, 2, &TraceConfig::default()).unwrap();
    let Termination::BlowUp { lambda_n } = branch.termination else {
        panic!("mode-2 branch did not terminate in blow-up");
    };
    assert!(
        (lambda_n - 4.9872).abs() <= 0.05,
        "lambda_2(0.2, 2.5) = {lambda_n}"
    );
    assert_eq!(branch.folds.len(), 1, "expected exactly one fold");
    assert!(
        (branch.folds[0] - 4.9714).abs() <= 0.05,
        "lambda_sn = {}",
        branch.folds[0]
    );
    pass(
        5,
        &format!(
            "four monotone terminations and the mode-2 fold/termination ({:.4}/{:.4})",
            branch.folds[0], lambda_n
        ),
    );
}

#[test]
fn criterion_06_tiling_identity() {
    let tc = TraceConfig::default();
    let mode2 = trace_branch(2.5, 0.2, 2, &tc).unwrap();
    let mono = trace_branch(1.25, 0.2, 1, &tc).unwrap();
    let (Termination::BlowUp { lambda_n: l2 }, Termination::BlowUp { lambda_n: l1 }) =
        (mode2.termination, mono.termination)
    else {
        panic!("expected blow-up terminations");
    };
    assert!(
        (l2 - l1).abs() <= 1e-3,
        "lambda_2(0.2, 2.5) = {l2} vs lambda_1(0.2, 1.25) = {l1}"
    );
    pass(6, &format!("gap {:.2e}", (l2 - l1).abs()));
}

/// Deterministic xorshift-style generator for the random triples.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Shooting oracle: RK4 on (u, v, m) from the series start at (u_min, 0),
/// marching through the requested x stations, then to the turning point.
struct ShotPiece {
    u_at: Vec<f64>,
    length: f64,
    mass: f64,
}

fn shoot_piece(lambda: f64, a: f64, u_min: f64, stations: &[f64]) -> ShotPiece {
    let accel = lambda * (a - bulk_force(u_min));
    let delta = 1e-7;
    let mut p = PhasePoint::new(u_min + 0.5 * accel * delta * delta, accel * delta);
    let mut m_acc = u_min * delta; // integral of u dx
    let mut x = delta;
    let h = 1e-5;
    let mut u_at = Vec::with_capacity(stations.len());
    let mut station_iter = stations.iter().peekable();
    loop {
        // land exactly on any station inside the next step
        let mut next_h = h;
        if let Some(&&xs) = station_iter.peek() {
            if xs <= x + next_h {
                next_h = xs - x;
            }
        }
        let p_prev = p;
        if next_h > 0.0 {
            let mid = rk4_step(p, lambda, a, 0.5 * next_h);
            let end = rk4_step(p, lambda, a, next_h);
            m_acc += next_h / 6.0 * (p.u + 4.0 * mid.u + end.u);
            p = end;
            x += next_h;
        }
        if let Some(&&xs) = station_iter.peek() {
            if (x - xs).abs() <= 1e-12 {
                u_at.push(p.u);
                station_iter.next();
            }
        }
        if p.v < 0.0 {
            // linear interpolation of the v = 0 crossing inside the last step
            let frac = p_prev.v / (p_prev.v - p.v);
            let x_end = (x - next_h) + frac * next_h;
            // mass correction for the overshoot past the crossing
            let over = x - x_end;
            m_acc -= p.u * over;
            return ShotPiece {
                u_at,
                length: x_end,
                mass: m_acc / x_end,
            };
        }
        assert!(x < 1e3, "shooting ran away");
    }
}

#[test]
fn criterion_07_oracle_equivalence() {
    let mut rng = SplitMix64(0x5eed_cafe_f00d_0001);
    let mut tested = 0;
    let mut worst_sup: f64 = 0.0;
    let mut worst_len: f64 = 0.0;
    while tested < 20 {
        let lambda = 4.5 + 20.0 * rng.next_f64();
        let a = 0.005 + 0.35 * rng.next_f64();
        let Ok(eq) = equilibria(a) else { continue };
        let t = rng.next_f64();
        let u_min = eq.centre - (0.05 + 0.9 * t) * (eq.centre - eq.left);
        if piece_length_and_mass(lambda, a, u_min).is_err() {
            continue;
        }
        let prof = profile_from_level(lambda, a, u_min, 1).unwrap();
        let ell = prof.piece_length;
        // ascending stations from the descending piece: x_asc = ell - x
        let mut pairs: Vec<(f64, f64)> = prof
            .samples
            .iter()
            .filter(|s| s.x > 1e-7 && s.x < ell - 1e-7)
            .map(|s| (ell - s.x, s.u))
            .collect();
        pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        let stations: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let shot = shoot_piece(lambda, a, u_min, &stations);
        assert_eq!(shot.u_at.len(), stations.len());
        let sup = pairs
            .iter()
            .zip(&shot.u_at)
            .map(|((_, u), su)| (u - su).abs())
            .fold(0.0f64, f64::max);
        assert!(
            sup <= 1e-6,
            "sup gap {sup:.3e} at (lambda, a, u_min) = ({lambda}, {a}, {u_min})"
        );
        let len_gap = (shot.length - ell).abs();
        let mass_gap = (shot.mass - prof.mass).abs();
        assert!(len_gap <= 1e-6, "length gap {len_gap:.3e}");
        assert!(mass_gap <= 1e-6, "mass gap {mass_gap:.3e}");
        worst_sup = worst_sup.max(sup);
        worst_len = worst_len.max(len_gap.max(mass_gap));
        tested += 1;
    }
    pass(
        7,
        &format!(
            "20 triples, worst profile sup {worst_sup:.2e}, worst length/mass gap {worst_len:.2e}"
        ),
    );
}

// ---------------------------------------------------------------------------
// shared time-dependent runs
// ---------------------------------------------------------------------------

fn exp1_init() -> InitialData {
    InitialData::TanhStep {
        offset: 0.3,
        amplitude: -0.5,
        gamma: 0.4,
        sharpness: 1000.0,
    }
}

fn run_preset(length: f64, mass: f64, lambda: f64, init: InitialData, n: usize) -> RunOutcome {
    let params = ModelParams::new(length, mass, lambda).unwrap();
    let grid = pde::preset_initial(init, params, n).unwrap();
    pde::run(
        grid,
        &SchemeConfig {
            n_cells: n,
            t_end: 400.0,
            equilibrium_tol: 1e-8,
            audit_every: 5000,
            ..Default::default()
        },
    )
    .unwrap()
}

fn exp1_left_500() -> &'static RunOutcome {
    static CELL: OnceLock<RunOutcome> = OnceLock::new();
    CELL.get_or_init(|| run_preset(1.7, 0.2, 4.0, exp1_init(), 500))
}

fn exp1_left_1000() -> &'static RunOutcome {
    static CELL: OnceLock<RunOutcome> = OnceLock::new();
    CELL.get_or_init(|| run_preset(1.7, 0.2, 4.0, exp1_init(), 1000))
}

fn exp1_right(n: usize) -> RunOutcome {
    run_preset(1.7, 0.2, 5.0, exp1_init(), n)
}

#[test]
fn criterion_08_discrete_conservation() {
    let out = exp1_left_500();
    assert_eq!(out.reason, StopReason::Equilibrium);
    let m0 = out.state.initial_mass();
    assert!(
        out.max_mass_drift <= 1e-10 * (1.0 + m0.abs()),
        "mass drift {:.3e} over {} steps",
        out.max_mass_drift,
        out.steps
    );
    pass(
        8,
        &format!(
            "drift {:.2e} over {} steps at N = 500",
            out.max_mass_drift, out.steps
        ),
    );
}

/// Sup-norm gap between a PDE state and a stationary profile interpolated
/// onto its nodes (also tried against the reflected profile; the evolution
/// picks one of the two symmetric equilibria).
fn sup_gap_to_profile(values: &[f64], dx: f64, length: f64, prof: &StationaryProfile) -> f64 {
    let interp = |x: f64| -> f64 {
        let s = &prof.samples;
        let mut lo = 0;
        let mut hi = s.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if s[mid].x <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (p, q) = (s[lo], s[hi]);
        if q.x == p.x {
            p.u
        } else {
            p.u + (q.u - p.u) * (x - p.x) / (q.x - p.x)
        }
    };
    let direct = values
        .iter()
        .enumerate()
        .map(|(i, &u)| (u - interp(i as f64 * dx)).abs())
        .fold(0.0f64, f64::max);
    let reflected = values
        .iter()
        .enumerate()
        .map(|(i, &u)| (u - interp(length - i as f64 * dx)).abs())
        .fold(0.0f64, f64::max);
    direct.min(reflected)
}

#[test]
fn criterion_09_pde_matches_stationary() {
    let prof = solve_stationary(4.0, 1.7, 0.2, 1, None).unwrap();
    let out500 = exp1_left_500();
    let gap500 = sup_gap_to_profile(out500.state.values(), out500.state.dx(), 1.7, &prof);
    assert!(gap500 <= 1e-2, "sup gap {gap500:.3e} at N = 500");
    let out1000 = exp1_left_1000();
    let gap1000 = sup_gap_to_profile(out1000.state.values(), out1000.state.dx(), 1.7, &prof);
    assert!(
        gap1000 < gap500,
        "refinement did not shrink the gap: {gap500:.3e} -> {gap1000:.3e}"
    );
    pass(
        9,
        &format!("sup gap {gap500:.2e} at N=500, {gap1000:.2e} at N=1000"),
    );
}

/// Count maximal runs of steep cells (one-sided slope above half the max).
fn interface_count(values: &[f64], dx: f64) -> usize {
    let slopes: Vec<f64> = values
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / dx)
        .collect();
    let max = slopes.iter().cloned().fold(0.0f64, f64::max);
    let thresh = 0.5 * max;
    let mut count = 0;
    let mut inside = false;
    for &s in &slopes {
        if s >= thresh && !inside {
            count += 1;
            inside = true;
        } else if s < thresh {
            inside = false;
        }
    }
    count
}

#[test]
fn criterion_10_nonclassical_regime() {
    let mut failures: Vec<String> = Vec::new();

    // (a) steepening past lambda_1: max slope must at least double per grid
    // doubling
    let slopes: Vec<f64> = [250usize, 500, 1000]
        .iter()
        .map(|&n| {
            let out = exp1_right(n);
            assert_eq!(out.reason, StopReason::Equilibrium, "N = {n}");
            out.state.max_slope()
        })
        .collect();
    for w in slopes.windows(2) {
        if w[1] < 2.0 * w[0] {
            failures.push(format!(
                "slope doubling: {:.2} -> {:.2} is x{:.3} (< 2)",
                w[0],
                w[1],
                w[1] / w[0]
            ));
        }
    }

    // (b) three distinct interface equilibria with the same mass
    let fig9: Vec<RunOutcome> = [(0.5, 0.2), (0.6, 0.1), (0.9, -0.2)]
        .iter()
        .map(|&(gamma, beta)| {
            run_preset(
                2.5,
                0.2,
                8.0,
                InitialData::TanhStep {
                    offset: beta,
                    amplitude: -0.5,
                    gamma,
                    sharpness: 1000.0,
                },
                500,
            )
        })
        .collect();
    for (k, out) in fig9.iter().enumerate() {
        if out.reason != StopReason::Equilibrium {
            failures.push(format!("fig9 run {k} did not reach equilibrium"));
        }
        let mass = out.state.discrete_mass();
        if (mass - 0.2).abs() > 1e-3 {
            failures.push(format!("fig9 run {k} mass {mass}"));
        }
    }
    for i in 0..3 {
        for j in (i + 1)..3 {
            let sup = fig9[i]
                .state
                .values()
                .iter()
                .zip(fig9[j].state.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if sup < 0.05 {
                failures.push(format!("fig9 equilibria {i}/{j} coincide (sup {sup:.3e})"));
            }
        }
    }

    // (c) the two-interface datum keeps two steep interfaces and stays
    // non-monotone
    let fig11 = run_preset(2.5, 0.2, 8.0, InitialData::TwoInterface, 500);
    let v = fig11.state.values();
    let n_ifaces = interface_count(v, fig11.state.dx());
    if fig11.reason != StopReason::Equilibrium {
        failures.push("fig11 did not reach equilibrium".into());
    }
    if n_ifaces != 2 {
        failures.push(format!("fig11 interface count {n_ifaces} (expected 2)"));
    }
    let ends = v[0].min(v[v.len() - 1]);
    let interior_min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    if interior_min >= ends - 0.5 {
        failures.push(format!(
            "fig11 not non-monotone: interior min {interior_min}, ends {ends}"
        ));
    }
    let mass = fig11.state.discrete_mass();
    if (mass - 0.2).abs() > 1e-3 {
        failures.push(format!("fig11 mass {mass}"));
    }

    assert!(
        failures.is_empty(),
        "criterion 10: FAIL\n  slopes at N=250/500/1000: {:.2}/{:.2}/{:.2}\n  {}",
        slopes[0],
        slopes[1],
        slopes[2],
        failures.join("\n  ")
    );
    pass(
        10,
        &format!(
            "slopes {:.0}/{:.0}/{:.0}, three distinct fig9 equilibria, two-interface fig11",
            slopes[0], slopes[1], slopes[2]
        ),
    );
}

#[test]
fn criterion_11_regime_exclusions() {
    // no bifurcations at all for |M| >= 1/sqrt(3)
    for m in [0.58, 0.6, 0.75, 1.0, -0.6] {
        for k in [1u32, 2, 3] {
            for l in [0.5, 1.0, 2.5, 10.0] {
                assert_eq!(
                    classify(k, l, m).kind,
                    PitchforkKind::NoBifurcation,
                    "(k, L, M) = ({k}, {l}, {m})"
                );
            }
        }
    }
    // |M| >= 1: no nontrivial solution anywhere in a (lambda, seed) sweep
    let mut attempts = 0;
    for &m in &[1.0, 1.2] {
        assert!(matches!(
            solve_stationary(5.0, 2.0, m, 1, None),
            Err(Error::NoBifurcationRegime(_))
        ));
        for &lambda in &[2.0, 6.0, 12.0, 20.0] {
            for &a0 in &[-0.3, -0.1, 0.1, 0.3] {
                for &umin0 in &[-0.9, -0.5, 0.0, 0.4] {
                    attempts += 1;
                    assert!(
                        solve_stationary(lambda, 2.0, m, 1, Some((a0, umin0))).is_err(),
                        "found a solution with M = {m} at lambda = {lambda}, seed ({a0}, {umin0})"
                    );
                }
            }
        }
    }
    pass(
        11,
        &format!("no-bifurcation grid and {attempts} seeded solves all excluded"),
    );
}
