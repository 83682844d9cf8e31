//! Command-line surface: every capability of the library as a reproducible
//! run with machine-readable output.
//!
//! Exit codes: 0 success (including "no bifurcation": that is an answer),
//! 2 usage, 3 continuation seed failure, 4 no classical solution,
//! 5 numerical instability.

mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use output::{resolve, sig12, Csv, RunManifest};
use satflux::bifurcation::{
    self, classify, critical_length, reduction_nodes, verify_reduction, PitchforkKind,
};
use satflux::model::{ModelParams, PhasePoint, BISTABLE_A_MAX};
use satflux::pde::{self, InitialData, SchemeConfig, StopReason};
use satflux::phase_plane::{
    confinement_values, equilibria, heteroclinic_lambda, homoclinic_lambda, linearized_period,
    loop_break_lambda,
};
use satflux::time_map::{self, Termination, TraceConfig};
use satflux::Error as LibError;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "satflux",
    version,
    about = "Stationary and time-dependent solutions of the mass-conserving bistable equation with saturating flux"
)]
struct Cli {
    /// Optional key=value config file; explicit flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files (also via SATFLUX_OUT_DIR).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the k-th pitchfork bifurcation from the trivial solution.
    Classify(ClassifyArgs),
    /// Phase-plane quantities of the ancillary system at fixed a.
    Phase(PhaseArgs),
    /// Trace a branch of classical stationary solutions.
    Branch(BranchArgs),
    /// Sample a curve in the (lambda, a) plane.
    Curves(CurvesArgs),
    /// Solve for one classical stationary profile.
    Stationary(StationaryArgs),
    /// Run the time-dependent scheme with explicit parameters.
    Simulate(SimulateArgs),
    /// Run one of the preset numerical experiments.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    k: Option<u32>,
    #[arg(long = "L")]
    length: Option<f64>,
    #[arg(long = "M")]
    mass: Option<f64>,
    /// Machine-readable JSON on stdout.
    #[arg(long)]
    json: bool,
    /// Also re-derive the normal-form coefficients by quadrature.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct PhaseArgs {
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Sample an orbit just inside the confinement region to CSV.
    #[arg(long)]
    orbits: Option<PathBuf>,
}

#[derive(Args)]
struct BranchArgs {
    #[arg(long = "L")]
    length: Option<f64>,
    #[arg(long = "M")]
    mass: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WhichCurve {
    /// Bifurcation points along the trivial line.
    Ab,
    /// Gradient blow-up boundary.
    Astar,
    /// Traced branch of classical solutions (requires --M).
    Atilde,
}

#[derive(Args)]
struct CurvesArgs {
    #[arg(long = "L")]
    length: Option<f64>,
    #[arg(long = "M")]
    mass: Option<f64>,
    #[arg(long, value_enum)]
    which: Option<WhichCurve>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StationaryArgs {
    #[arg(long = "L")]
    length: Option<f64>,
    #[arg(long = "M")]
    mass: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum InitKind {
    TanhStep,
    TwoInterface,
    Constant,
    CosinePerturbation,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long = "L")]
    length: Option<f64>,
    #[arg(long = "M")]
    mass: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_enum)]
    init: Option<InitKind>,
    /// Cell count N (N + 1 nodes).
    #[arg(long = "N")]
    n_cells: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    equilibrium_tol: Option<f64>,
    /// Interface position fraction for tanh_step (x0 = gamma L).
    #[arg(long)]
    gamma: Option<f64>,
    /// Plateau offset for tanh_step; defaults to M - amplitude (1 - 2 gamma),
    /// which keeps the discrete mass at M.
    #[arg(long)]
    offset: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    sharpness: Option<f64>,
    /// Perturbation amplitude for cosine_perturbation.
    #[arg(long)]
    amp: Option<f64>,
    /// Mode index for cosine_perturbation.
    #[arg(long)]
    mode: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Exp1Left,
    Exp1Right,
    Fig9,
    Fig11,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Cell count override (presets default to N = 500).
    #[arg(long = "N")]
    n_cells: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    equilibrium_tol: Option<f64>,
}

/// Failure that carries the process exit code.
struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        fail(1, format!("io error: {e}"))
    }
}

fn lib_fail(e: LibError) -> Failure {
    let code = match e {
        LibError::BlowUp { .. } | LibError::BelowFirstBifurcation { .. } => 4,
        LibError::SeedFailure { .. } => 3,
        LibError::NonFinite { .. } => 5,
        LibError::NoConvergence { .. } => 4,
        _ => 2,
    };
    fail(code, e.to_string())
}

/// key=value configuration file; '#' comments and blank lines ignored.
struct Config(BTreeMap<String, String>);

impl Config {
    fn load(path: &Option<PathBuf>) -> Result<Self, Failure> {
        let mut map = BTreeMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| fail(2, format!("cannot read config {}: {e}", p.display())))?;
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(fail(2, format!("config line is not key=value: {line}")));
                };
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Self(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Option<T> {
        self.0.get(key).and_then(|v| v.parse().ok())
    }
}

/// Flag value, else config value, else an exit-2 usage error.
fn need<T: std::str::FromStr + Copy>(
    flag: Option<T>,
    cfg: &Config,
    key: &str,
) -> Result<T, Failure> {
    flag.or_else(|| cfg.get(key))
        .ok_or_else(|| fail(2, format!("missing required --{key}")))
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = Config::load(&cli.config)?;
    match cli.command {
        Command::Classify(args) => cmd_classify(args, &cfg),
        Command::Phase(args) => cmd_phase(args, &cfg, &cli.out_dir),
        Command::Branch(args) => cmd_branch(args, &cfg, &cli.out_dir),
        Command::Curves(args) => cmd_curves(args, &cfg, &cli.out_dir),
        Command::Stationary(args) => cmd_stationary(args, &cfg, &cli.out_dir),
        Command::Simulate(args) => cmd_simulate(args, &cfg, &cli.out_dir),
        Command::Experiment(args) => cmd_experiment(args, &cfg, &cli.out_dir),
    }
}

fn cmd_classify(args: ClassifyArgs, cfg: &Config) -> Result<(), Failure> {
    let k = need(args.k, cfg, "k")?;
    let length = need(args.length, cfg, "L")?;
    let mass = need(args.mass, cfg, "M")?;
    if k < 1 || length <= 0.0 {
        return Err(fail(2, "require k >= 1 and L > 0"));
    }
    let class = classify(k, length, mass);
    let lstar = critical_length(k, mass);
    let report = if args.verify && class.kind != PitchforkKind::NoBifurcation {
        Some(verify_reduction(k, length, mass, reduction_nodes(k)).map_err(lib_fail)?)
    } else {
        None
    };
    if args.json {
        let kind = match class.kind {
            PitchforkKind::Supercritical => "supercritical",
            PitchforkKind::Subcritical => "subcritical",
            PitchforkKind::NoBifurcation => "no_bifurcation",
        };
        let mut obj = serde_json::json!({
            "kind": kind,
            "k": k,
            "L": length,
            "M": mass,
            "lambda_k": class.lambda_k,
            "L_star": lstar,
            "h_yyy": class.h_yyy,
            "h_lambda_y": class.h_lambda_y,
            "degenerate": class.degenerate,
        });
        if let Some(rep) = report {
            obj["verify"] = serde_json::json!({
                "h_yyy_numeric": rep.h_yyy_numeric,
                "h_lambda_y_numeric": rep.h_lambda_y_numeric,
                "h_yyy_gap": rep.h_yyy_gap(),
                "h_lambda_y_gap": rep.h_lambda_y_gap(),
                "max_ode_residual": rep.max_ode_residual,
            });
        }
        println!("{}", serde_json::to_string_pretty(&obj).expect("json"));
        return Ok(());
    }
    match class.kind {
        PitchforkKind::NoBifurcation => {
            println!("kind = no bifurcation (|M| >= 1/sqrt(3): f'(M) <= 0)");
        }
        kind => {
            let name = if class.degenerate {
                "subcritical (degenerate: h_yyy = 0)"
            } else if kind == PitchforkKind::Supercritical {
                "supercritical"
            } else {
                "subcritical"
            };
            println!("kind       = {name}");
            println!("lambda_k   = {}", sig12(class.lambda_k.unwrap()));
            match lstar {
                Some(v) => println!("L_star     = {}", sig12(v)),
                None => println!("L_star     = none (|M| >= 1/sqrt(5))"),
            }
            println!("h_yyy      = {}", sig12(class.h_yyy.unwrap()));
            println!("h_lambda_y = {}", sig12(class.h_lambda_y.unwrap()));
            if let Some(rep) = report {
                println!("h_yyy_gap (quadrature)  = {}", sig12(rep.h_yyy_gap()));
                println!("h_ly_gap  (quadrature)  = {}", sig12(rep.h_lambda_y_gap()));
                println!("l(x) ODE residual (max) = {}", sig12(rep.max_ode_residual));
            }
        }
    }
    Ok(())
}

fn cmd_phase(args: PhaseArgs, cfg: &Config, out_dir: &Option<PathBuf>) -> Result<(), Failure> {
    let a = need(args.a, cfg, "a")?;
    if a.is_nan() || a.abs() >= BISTABLE_A_MAX {
        return Err(fail(
            2,
            format!(
                "|a| = {} is outside the bistable range 2/(3 sqrt 3)",
                a.abs()
            ),
        ));
    }
    let eq = equilibria(a).map_err(lib_fail)?;
    println!("u_left   = {}", sig12(eq.left));
    println!("centre   = {}", sig12(eq.centre));
    println!("u_right  = {}", sig12(eq.right));
    if a == 0.0 {
        println!("heteroclinic lambda = {}", sig12(heteroclinic_lambda()));
    } else {
        println!(
            "homoclinic lambda_h = {}",
            sig12(homoclinic_lambda(a).map_err(lib_fail)?)
        );
    }
    let lambda = args.lambda.or_else(|| cfg.get("lambda"));
    if let Some(lambda) = lambda {
        if lambda <= 0.0 {
            return Err(fail(2, "lambda must be positive"));
        }
        println!(
            "linearized period   = {}",
            sig12(linearized_period(lambda, a).map_err(lib_fail)?)
        );
        let threshold = loop_break_lambda(a).map_err(lib_fail)?;
        if lambda > threshold {
            let (us, uss) = confinement_values(lambda, a).map_err(lib_fail)?;
            println!("u_star      = {}", sig12(us));
            println!("u_star_star = {}", sig12(uss));
            if let Some(path) = &args.orbits {
                let path = resolve(out_dir, path);
                write_orbit_csv(&path, lambda, a, us)?;
                println!("orbit samples written to {}", path.display());
            }
        } else {
            println!("lambda <= loop-breaking threshold: no confinement values");
            if args.orbits.is_some() {
                return Err(fail(2, "--orbits needs lambda above the loop threshold"));
            }
        }
    } else if args.orbits.is_some() {
        return Err(fail(2, "--orbits needs --lambda"));
    }
    Ok(())
}

fn write_orbit_csv(path: &Path, lambda: f64, a: f64, u_star: f64) -> Result<(), Failure> {
    let period = linearized_period(lambda, a).map_err(lib_fail)?;
    let start = PhasePoint::new(u_star + 1e-3, 0.0);
    let (pts, _) = satflux::ode::integrate_orbit(start, lambda, a, 1e-4, 3.0 * period, 1e6, 10);
    let mut csv = Csv::new();
    csv.meta("command", "phase --orbits")
        .meta("lambda", sig12(lambda))
        .meta("a", sig12(a))
        .meta("start_u", sig12(start.u))
        .columns(&["x", "u", "v"]);
    for (x, u, v) in pts {
        csv.row(&[x, u, v]);
    }
    csv.write(path)?;
    Ok(())
}

fn cmd_branch(args: BranchArgs, cfg: &Config, out_dir: &Option<PathBuf>) -> Result<(), Failure> {
    let length = need(args.length, cfg, "L")?;
    let mass = need(args.mass, cfg, "M")?;
    let n = need(args.n, cfg, "n")?;
    if n < 1 || length <= 0.0 {
        return Err(fail(2, "require n >= 1 and L > 0"));
    }
    let out = args
        .out
        .or_else(|| cfg.get("out"))
        .unwrap_or_else(|| PathBuf::from("branch.csv"));
    let out = resolve(out_dir, &out);

    let mut tc = TraceConfig::default();
    if let Some(lm) = args.lambda_max.or_else(|| cfg.get("lambda-max")) {
        tc.lambda_max = lm;
    }
    let branch = time_map::trace_branch(length, mass, n, &tc).map_err(lib_fail)?;

    let mut csv = Csv::new();
    csv.meta("command", "branch")
        .meta("L", sig12(length))
        .meta("M", sig12(mass))
        .meta("n", n.to_string())
        .columns(&["lambda", "a", "u_min", "u_at_0", "amplitude"]);
    for p in &branch.points {
        csv.row(&[p.lambda, p.a, p.u_min, p.u_at_0, p.amplitude]);
    }
    for fold in &branch.folds {
        csv.comment(&format!("fold lambda_sn={}", sig12(*fold)));
    }
    match branch.termination {
        Termination::BlowUp { lambda_n } => {
            csv.comment(&format!("termination=blowup lambda_n={}", sig12(lambda_n)));
            println!("termination: blow-up at lambda_{n} = {}", sig12(lambda_n));
        }
        Termination::ReachedLambdaMax => {
            csv.comment("termination=reached_lambda_max");
            println!("termination: reached lambda_max");
        }
        Termination::ReachedTrivial => {
            csv.comment("termination=reached_trivial");
            println!("termination: returned to the trivial line");
        }
    }
    for fold in &branch.folds {
        println!("fold: lambda_sn = {}", sig12(*fold));
    }
    csv.write(&out)?;
    println!(
        "{} points written to {}",
        branch.points.len(),
        out.display()
    );
    Ok(())
}

fn cmd_curves(args: CurvesArgs, cfg: &Config, out_dir: &Option<PathBuf>) -> Result<(), Failure> {
    let length = need(args.length, cfg, "L")?;
    let which = args
        .which
        .ok_or_else(|| fail(2, "missing --which {ab|astar|atilde}"))?;
    let lambda_max = args
        .lambda_max
        .or_else(|| cfg.get("lambda-max"))
        .unwrap_or(25.0);
    let samples = args.samples.or_else(|| cfg.get("samples")).unwrap_or(200);
    let default_name = match which {
        WhichCurve::Ab => "curve_ab.csv",
        WhichCurve::Astar => "curve_astar.csv",
        WhichCurve::Atilde => "curve_atilde.csv",
    };
    let out = args
        .out
        .or_else(|| cfg.get("out"))
        .unwrap_or_else(|| PathBuf::from(default_name));
    let out = resolve(out_dir, &out);

    let mut csv = Csv::new();
    csv.meta("command", "curves").meta("L", sig12(length));
    match which {
        WhichCurve::Ab => {
            csv.meta("which", "ab").columns(&["lambda", "a"]);
            for (lam, a) in bifurcation::sample_onset_curve(length, lambda_max, samples) {
                csv.row(&[lam, a]);
            }
        }
        WhichCurve::Astar => {
            csv.meta("which", "astar").columns(&["lambda", "a"]);
            // uniform grid kept a margin below the fold of f, where lambda* diverges
            let a_values: Vec<f64> = (0..samples)
                .map(|i| BISTABLE_A_MAX * (i as f64 + 0.5) / (samples as f64 + 4.0))
                .collect();
            let mut skipped = 0usize;
            for r in time_map::boundary_curve(length, &a_values) {
                match r {
                    Ok(p) => {
                        csv.row(&[p.lambda, p.a]);
                    }
                    Err(_) => skipped += 1,
                }
            }
            if skipped > 0 {
                csv.comment(&format!("skipped={skipped} (no root in scanned window)"));
                eprintln!("note: {skipped} samples had no resolvable lambda*");
            }
        }
        WhichCurve::Atilde => {
            let mass = args
                .mass
                .or_else(|| cfg.get("M"))
                .ok_or_else(|| fail(2, "--which atilde requires --M"))?;
            csv.meta("which", "atilde").meta("M", sig12(mass));
            csv.columns(&["lambda", "a"]);
            let tc = TraceConfig {
                lambda_max,
                ..TraceConfig::default()
            };
            let branch = time_map::trace_branch(length, mass, 1, &tc).map_err(lib_fail)?;
            for p in &branch.points {
                csv.row(&[p.lambda, p.a]);
            }
            if let Termination::BlowUp { lambda_n } = branch.termination {
                csv.comment(&format!("termination=blowup lambda_n={}", sig12(lambda_n)));
            }
        }
    }
    csv.write(&out)?;
    println!("curve written to {}", out.display());
    Ok(())
}

fn cmd_stationary(
    args: StationaryArgs,
    cfg: &Config,
    out_dir: &Option<PathBuf>,
) -> Result<(), Failure> {
    let length = need(args.length, cfg, "L")?;
    let mass = need(args.mass, cfg, "M")?;
    let lambda = need(args.lambda, cfg, "lambda")?;
    let n = need(args.n, cfg, "n")?;
    if n < 1 || length <= 0.0 || lambda <= 0.0 {
        return Err(fail(2, "require n >= 1, L > 0, lambda > 0"));
    }
    let out = args
        .out
        .or_else(|| cfg.get("out"))
        .unwrap_or_else(|| PathBuf::from("profile.csv"));
    let out = resolve(out_dir, &out);

    let prof = match time_map::solve_stationary(lambda, length, mass, n, None) {
        Ok(p) => p,
        Err(LibError::BlowUp { lambda: lambda_n }) => {
            return Err(fail(
                4,
                format!(
                    "no classical solution: lambda = {lambda} exceeds lambda_{n} = {}",
                    sig12(lambda_n)
                ),
            ))
        }
        Err(LibError::BelowFirstBifurcation { lambda_min, .. }) => {
            return Err(fail(
                4,
                format!(
                "only the trivial state: lambda = {lambda} is below the branch (min lambda = {})",
                sig12(lambda_min)
            ),
            ))
        }
        Err(e) => return Err(lib_fail(e)),
    };

    let mut csv = Csv::new();
    csv.meta("command", "stationary")
        .meta("L", sig12(length))
        .meta("M", sig12(mass))
        .meta("lambda", sig12(lambda))
        .meta("n", n.to_string())
        .meta("a", sig12(prof.a))
        .meta("u_min", sig12(prof.u_min))
        .meta("u_max", sig12(prof.u_max))
        .meta("energy_c", sig12(prof.energy_c))
        .meta("piece_mass", sig12(prof.mass))
        .meta("residual", sig12(prof.fd_residual))
        .columns(&["x", "u", "v"]);
    for s in &prof.samples {
        csv.row(&[s.x, s.u, s.v]);
    }
    csv.write(&out)?;
    println!(
        "a = {}, u(0) = {}, residual = {}",
        sig12(prof.a),
        sig12(prof.u_max),
        sig12(prof.fd_residual)
    );
    println!("profile written to {}", out.display());
    Ok(())
}

struct SimSetup {
    params: ModelParams,
    init: InitialData,
    n_cells: usize,
    scheme: SchemeConfig,
    label: String,
}

fn run_one_simulation(
    setup: &SimSetup,
    out_dir: &Option<PathBuf>,
    manifest: &mut RunManifest,
    suffix: &str,
) -> Result<StopReason, Failure> {
    let grid = pde::preset_initial(setup.init, setup.params, setup.n_cells).map_err(lib_fail)?;
    let initial_mass = grid.discrete_mass();
    let dx = grid.dx();

    let initial_path = resolve(out_dir, Path::new(&format!("initial{suffix}.csv")));
    let mut csv = Csv::new();
    csv.meta("command", &setup.label)
        .meta("t", sig12(0.0))
        .meta("discrete_mass", sig12(initial_mass))
        .columns(&["x", "u"]);
    for (i, &u) in grid.values().iter().enumerate() {
        csv.row(&[i as f64 * dx, u]);
    }
    csv.write(&initial_path)?;
    manifest.output(&initial_path);

    let outcome = pde::run(grid, &setup.scheme).map_err(lib_fail)?;

    let final_path = resolve(out_dir, Path::new(&format!("final{suffix}.csv")));
    let mut csv = Csv::new();
    csv.meta("command", &setup.label)
        .meta("t", sig12(outcome.state.time()))
        .meta("discrete_mass", sig12(outcome.state.discrete_mass()))
        .columns(&["x", "u"]);
    for (i, &u) in outcome.state.values().iter().enumerate() {
        csv.row(&[i as f64 * dx, u]);
    }
    csv.write(&final_path)?;
    manifest.output(&final_path);

    let reason = match outcome.reason {
        StopReason::Equilibrium => "equilibrium",
        StopReason::Horizon => "horizon",
        StopReason::NonFinite => "non_finite",
    };
    manifest
        .param(&format!("stop_reason{suffix}"), reason)
        .param(&format!("steps{suffix}"), outcome.steps)
        .param(&format!("t_final{suffix}"), sig12(outcome.state.time()))
        .param(
            &format!("mass_drift{suffix}"),
            sig12(outcome.max_mass_drift),
        )
        .param(&format!("initial_mass{suffix}"), sig12(initial_mass));
    println!(
        "run{suffix}: stop={reason} t={:.4} steps={} mass_drift={:.3e}",
        outcome.state.time(),
        outcome.steps,
        outcome.max_mass_drift
    );
    Ok(outcome.reason)
}

fn cmd_simulate(
    args: SimulateArgs,
    cfg: &Config,
    out_dir: &Option<PathBuf>,
) -> Result<(), Failure> {
    let started = Instant::now();
    let length = need(args.length, cfg, "L")?;
    let mass = need(args.mass, cfg, "M")?;
    let lambda = need(args.lambda, cfg, "lambda")?;
    let kind = args.init.ok_or_else(|| fail(2, "missing --init"))?;
    let n_cells = args.n_cells.or_else(|| cfg.get("N")).unwrap_or(500);
    let params = ModelParams::new(length, mass, lambda).map_err(lib_fail)?;

    let amplitude = args
        .amplitude
        .or_else(|| cfg.get("amplitude"))
        .unwrap_or(-0.5);
    let gamma = args.gamma.or_else(|| cfg.get("gamma")).unwrap_or(0.4);
    let sharpness = args
        .sharpness
        .or_else(|| cfg.get("sharpness"))
        .unwrap_or(1000.0);
    let init = match kind {
        InitKind::TanhStep => InitialData::TanhStep {
            // default offset keeps the sharp-interface mass at M
            offset: args
                .offset
                .or_else(|| cfg.get("offset"))
                .unwrap_or(mass - amplitude * (1.0 - 2.0 * gamma)),
            amplitude,
            gamma,
            sharpness,
        },
        InitKind::TwoInterface => InitialData::TwoInterface,
        InitKind::Constant => InitialData::Constant(mass),
        InitKind::CosinePerturbation => InitialData::CosinePerturbation {
            mean: mass,
            amplitude: args.amp.or_else(|| cfg.get("amp")).unwrap_or(1e-3),
            mode: args.mode.or_else(|| cfg.get("mode")).unwrap_or(1),
        },
    };
    let scheme = SchemeConfig {
        n_cells,
        dt: args.dt.or_else(|| cfg.get("dt")),
        t_end: args.t_end.or_else(|| cfg.get("t-end")).unwrap_or(1e3),
        equilibrium_tol: args
            .equilibrium_tol
            .or_else(|| cfg.get("equilibrium-tol"))
            .unwrap_or(1e-8),
        ..Default::default()
    };
    let setup = SimSetup {
        params,
        init,
        n_cells,
        scheme,
        label: "simulate".into(),
    };

    let mut manifest = RunManifest::new("simulate");
    manifest
        .param("L", sig12(length))
        .param("M", sig12(mass))
        .param("lambda", sig12(lambda))
        .param("N", n_cells);
    let reason = run_one_simulation(&setup, out_dir, &mut manifest, "")?;
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    let mpath = resolve(out_dir, Path::new("manifest.json"));
    manifest.write(&mpath)?;
    println!("manifest written to {}", mpath.display());
    if reason == StopReason::NonFinite {
        return Err(fail(5, "time stepping produced non-finite values"));
    }
    Ok(())
}

fn cmd_experiment(
    args: ExperimentArgs,
    cfg: &Config,
    out_dir: &Option<PathBuf>,
) -> Result<(), Failure> {
    let started = Instant::now();
    let preset = args.preset.ok_or_else(|| fail(2, "missing --preset"))?;
    let n_cells = args.n_cells.or_else(|| cfg.get("N")).unwrap_or(500);
    let t_end = args.t_end.or_else(|| cfg.get("t-end")).unwrap_or(400.0);
    let tol = args
        .equilibrium_tol
        .or_else(|| cfg.get("equilibrium-tol"))
        .unwrap_or(1e-8);
    let scheme = SchemeConfig {
        n_cells,
        t_end,
        equilibrium_tol: tol,
        ..Default::default()
    };

    // preset runs: (L, M, lambda) plus the fixed initial-data constants
    let (name, runs): (&str, Vec<(f64, InitialData)>) = match preset {
        Preset::Exp1Left => (
            "exp1-left",
            vec![(
                4.0,
                InitialData::TanhStep {
                    offset: 0.3,
                    amplitude: -0.5,
                    gamma: 0.4,
                    sharpness: 1000.0,
                },
            )],
        ),
        Preset::Exp1Right => (
            "exp1-right",
            vec![(
                5.0,
                InitialData::TanhStep {
                    offset: 0.3,
                    amplitude: -0.5,
                    gamma: 0.4,
                    sharpness: 1000.0,
                },
            )],
        ),
        Preset::Fig9 => (
            "fig9",
            [(0.5, 0.2), (0.6, 0.1), (0.9, -0.2)]
                .into_iter()
                .map(|(gamma, beta)| {
                    (
                        8.0,
                        InitialData::TanhStep {
                            offset: beta,
                            amplitude: -0.5,
                            gamma,
                            sharpness: 1000.0,
                        },
                    )
                })
                .collect(),
        ),
        Preset::Fig11 => ("fig11", vec![(8.0, InitialData::TwoInterface)]),
    };
    let (length, mass) = match preset {
        Preset::Exp1Left | Preset::Exp1Right => (1.7, 0.2),
        Preset::Fig9 | Preset::Fig11 => (2.5, 0.2),
    };

    let mut manifest = RunManifest::new(&format!("experiment --preset {name}"));
    manifest
        .param("preset", name)
        .param("L", sig12(length))
        .param("M", sig12(mass))
        .param("N", n_cells);
    let multi = runs.len() > 1;
    let mut worst = StopReason::Equilibrium;
    for (i, (lambda, init)) in runs.into_iter().enumerate() {
        let params = ModelParams::new(length, mass, lambda).map_err(lib_fail)?;
        let setup = SimSetup {
            params,
            init,
            n_cells,
            scheme: scheme.clone(),
            label: format!("experiment --preset {name}"),
        };
        manifest.param(&format!("lambda-{}", i + 1), sig12(lambda));
        let suffix = if multi {
            format!("-{}", i + 1)
        } else {
            String::new()
        };
        let reason = run_one_simulation(&setup, out_dir, &mut manifest, &suffix)?;
        if reason == StopReason::NonFinite {
            worst = StopReason::NonFinite;
        }
    }
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    let mpath = resolve(out_dir, Path::new("manifest.json"));
    manifest.write(&mpath)?;
    println!("manifest written to {}", mpath.display());
    if worst == StopReason::NonFinite {
        return Err(fail(5, "time stepping produced non-finite values"));
    }
    Ok(())
}
