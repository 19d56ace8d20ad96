//! One function per subcommand.

use clap::{Args, Subcommand, ValueEnum};
use cubeavg_core::joining::{choose_folner_index, order_independence_check as order_check};
use cubeavg_core::random::{random_observable, seeded_system, ValueRange};
use cubeavg_core::{
    correspondence_system, csg_check, cube_average_at, cube_average_limit, cube_count, density_schedule,
    good_shift_set, iterated_limit_check, khintchine_bound_check, magic_extension, structure_check,
    syndeticity_probe, vdc_check, CountMethod, CubeAverageRequest, CubePattern, Element, GroupModel,
    IteratedStatus, Orientation,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::inputs::{self, SystemArgs, WindowArgs};
use crate::report::Outcome;
use crate::CliError;

#[derive(Subcommand, Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Cubic average A_N of observables on a finite system.
    CubeAvg(CubeAvgArgs),
    /// Limit L of the cubic averages along a Følner schedule.
    CubeLimit(CubeLimitArgs),
    /// Checks ∫L dμ ≥ (∫f dμ)^(2^d) on one system or on many random ones.
    CheckBound(CheckBoundArgs),
    /// Checks the Cauchy–Schwarz–Gowers inequality for a joining.
    CheckCsg(CheckCsgArgs),
    /// Checks that μ^P does not depend on the order of P.
    CheckOrder(CheckOrderArgs),
    /// Builds the magic extension of a system.
    MagicBuild(MagicBuildArgs),
    /// Checks that f − E(f|Z*_ε) has zero seminorm on the magic extension.
    StructureCheck(StructureCheckArgs),
    /// Densities of a subset window along a Følner schedule.
    Density(DensityArgs),
    /// Counts cube configurations inside a subset window.
    CubeCount(CubeCountArgs),
    /// Shifts h whose cube count beats density^(2^d) − c.
    GoodShifts(GoodShiftsArgs),
    /// Probes a subset window with boxes of given sides.
    SyndeticProbe(SyndeticProbeArgs),
    /// Builds the empirical correspondence system of a subset window.
    Correspond(CorrespondArgs),
    /// Van der Corput inequality for rotation vectors on Z.
    VdcCheck(VdcCheckArgs),
    /// Compares the joint and iterated limits of the cubic averages.
    IteratedCheck(IteratedCheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CubeAvg(_) => "cube-avg",
            Command::CubeLimit(_) => "cube-limit",
            Command::CheckBound(_) => "check-bound",
            Command::CheckCsg(_) => "check-csg",
            Command::CheckOrder(_) => "check-order",
            Command::MagicBuild(_) => "magic-build",
            Command::StructureCheck(_) => "structure-check",
            Command::Density(_) => "density",
            Command::CubeCount(_) => "cube-count",
            Command::GoodShifts(_) => "good-shifts",
            Command::SyndeticProbe(_) => "syndetic-probe",
            Command::Correspond(_) => "correspond",
            Command::VdcCheck(_) => "vdc-check",
            Command::IteratedCheck(_) => "iterated-check",
        }
    }

    pub fn run(&self, seed: u64) -> Result<Outcome, CliError> {
        match self {
            Command::CubeAvg(a) => cube_avg(a, seed),
            Command::CubeLimit(a) => cube_limit(a, seed),
            Command::CheckBound(a) => check_bound(a, seed),
            Command::CheckCsg(a) => check_csg(a, seed),
            Command::CheckOrder(a) => check_order(a, seed),
            Command::MagicBuild(a) => magic_build(a, seed),
            Command::StructureCheck(a) => structure(a, seed),
            Command::Density(a) => density(a, seed),
            Command::CubeCount(a) => count(a, seed),
            Command::GoodShifts(a) => good_shifts(a, seed),
            Command::SyndeticProbe(a) => syndetic(a, seed),
            Command::Correspond(a) => correspond(a, seed),
            Command::VdcCheck(a) => vdc(a),
            Command::IteratedCheck(a) => iterated(a, seed),
        }
    }
}

/// Observables and cube dimension shared by the averaging commands.
#[derive(Args, Clone, Debug, Serialize)]
pub struct CubeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Cube dimension: the averages use actions 0..d.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Observable specs: one for every vertex, or 2^d in vertex order.
    #[arg(long = "f", required = true)]
    pub f: Vec<String>,
}

fn default_schedule() -> Vec<usize> {
    (0..11).map(|k| 1 << k).collect()
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct CubeAvgArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub cube: CubeArgs,
    /// Følner index, one for all axes or one per axis.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub n: Vec<usize>,
}

fn cube_avg(a: &CubeAvgArgs, seed: u64) -> Result<Outcome, CliError> {
    let sys = a.cube.system.load(seed, a.cube.d)?;
    let fs = inputs::vertex_observables(&a.cube.f, &sys, a.cube.d)?;
    let n = match a.n.len() {
        1 => vec![a.n[0]; a.cube.d],
        _ => a.n.clone(),
    };
    let req = CubeAverageRequest::new(&sys, fs, vec![1]);
    let avg = cube_average_at(&req, &n)?;
    Outcome::data(json!({
        "d": a.cube.d,
        "n": n,
        "points": sys.labels(),
        "values": avg.values,
        "integral": sys.integral(&avg),
    }))
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct CubeLimitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub cube: CubeArgs,
    /// Strictly increasing Følner indices.
    #[arg(long, value_delimiter = ',', default_values_t = default_schedule())]
    pub schedule: Vec<usize>,
}

fn cube_limit(a: &CubeLimitArgs, seed: u64) -> Result<Outcome, CliError> {
    let sys = a.cube.system.load(seed, a.cube.d)?;
    let fs = inputs::vertex_observables(&a.cube.f, &sys, a.cube.d)?;
    let report = cube_average_limit(&CubeAverageRequest::new(&sys, fs, a.schedule.clone()))?;
    let converged = report.converged;
    Outcome::check(report, converged)
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct CheckBoundArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Cube dimension on a given system; on random trials the largest one.
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Nonnegative observable on a given system.
    #[arg(long = "f")]
    pub f: Option<String>,
    /// Random systems to try (with --random).
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    #[arg(long, value_delimiter = ',', default_values_t = default_schedule())]
    pub schedule: Vec<usize>,
}

fn check_bound(a: &CheckBoundArgs, seed: u64) -> Result<Outcome, CliError> {
    if a.d == 0 {
        return Err(CliError::Input("--d must be positive".into()));
    }
    if !a.system.random {
        let sys = a.system.load(seed, a.d)?;
        let spec = a.f.as_deref().ok_or_else(|| CliError::Input("--f is required with --system".into()))?;
        let f = inputs::observable(spec, &sys)?;
        let r = khintchine_bound_check(&sys, &f, &vec![sys.group().clone(); a.d], &a.schedule)?;
        let passed = r.passed;
        return Outcome::check(r, passed);
    }
    let mut failures = Vec::new();
    let mut min_margin = f64::INFINITY;
    for t in 0..a.trials {
        let s = seed.wrapping_add(t);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let d = rng.gen_range(1..=a.d);
        let sys = seeded_system(s, &a.system.random_config(d)?);
        let f = random_observable(&mut rng, sys.len(), ValueRange::Unit, "f");
        let r = khintchine_bound_check(&sys, &f, &vec![sys.group().clone(); d], &a.schedule)?;
        min_margin = min_margin.min(r.integral - r.power);
        if !r.passed {
            failures.push(json!({ "seed": s, "d": d, "integral": r.integral, "power": r.power, "chain": r.chain }));
        }
    }
    let passed = failures.is_empty();
    Outcome::check(
        json!({ "trials": a.trials, "failures": failures, "min_margin": min_margin }),
        passed,
    )
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct CheckCsgArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Index set η (0-based action indices).
    #[arg(long, value_delimiter = ',', required = true)]
    pub eta: Vec<usize>,
    /// Observables with sup norm ≤ 1: one for every vertex or 2^|η|.
    #[arg(long = "f", required = true)]
    pub f: Vec<String>,
}

fn check_csg(a: &CheckCsgArgs, seed: u64) -> Result<Outcome, CliError> {
    let needed = a.eta.iter().max().map_or(1, |m| m + 1);
    let sys = a.system.load(seed, needed)?;
    let fs = inputs::vertex_observables(&a.f, &sys, a.eta.len())?;
    let r = csg_check(&sys, &a.eta, &fs)?;
    let passed = r.passed;
    Outcome::check(r, passed)
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct CheckOrderArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Index sequence P (0-based); defaults to every action.
    #[arg(long, value_delimiter = ',')]
    pub order: Option<Vec<usize>>,
    /// Random systems to try (with --random).
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
}

fn check_order(a: &CheckOrderArgs, seed: u64) -> Result<Outcome, CliError> {
    let d = a.order.as_ref().map_or(3, |o| o.iter().max().map_or(1, |m| m + 1));
    let trials = if a.system.random { a.trials } else { 1 };
    let mut reports = Vec::new();
    let mut passed = true;
    for t in 0..trials {
        let s = seed.wrapping_add(t);
        let sys = a.system.load(s, d)?;
        let order: Vec<usize> = a.order.clone().unwrap_or_else(|| (0..sys.d()).collect());
        let r = order_check(&sys, &order)?;
        passed &= r.passed;
        reports.push(json!({ "seed": s, "report": r }));
    }
    Outcome::check(json!({ "trials": trials, "reports": reports }), passed)
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct MagicBuildArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
}

fn magic_build(a: &MagicBuildArgs, seed: u64) -> Result<Outcome, CliError> {
    let sys = a.system.load(seed, 2)?;
    let m = magic_extension(&sys)?;
    let (push, inv) = (m.pushforward_defect(), m.invariance_defect());
    let intertwining = m.intertwining_failure();
    let passed = push <= 1e-12 && inv <= 1e-12 && intertwining.is_none();
    Outcome::check(
        json!({
            "base_points": sys.len(),
            "star_points": m.star().len(),
            "pushforward_defect": push,
            "invariance_defect": inv,
            "intertwining_failure": intertwining,
            "star_system": m.star().to_spec(),
        }),
        passed,
    )
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct StructureCheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Index set ε (0-based); defaults to every action.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<usize>>,
    /// Observable on the star space (labels are the star tuples).
    #[arg(long = "f", default_value = "signed:0")]
    pub f: String,
}

fn structure(a: &StructureCheckArgs, seed: u64) -> Result<Outcome, CliError> {
    let sys = a.system.load(seed, 2)?;
    let m = magic_extension(&sys)?;
    let eps = a.eps.clone().unwrap_or_else(|| (0..sys.d()).collect());
    let f = inputs::observable(&a.f, m.star())?;
    let r = structure_check(&m, &eps, &f)?;
    let passed = r.passed;
    Outcome::check(json!({ "star_points": m.star().len(), "report": r }), passed)
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct DensityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub window: WindowArgs,
    /// Følner indices of the ambient boxes [0, N)^d.
    #[arg(long, value_delimiter = ',', required = true)]
    pub schedule: Vec<usize>,
}

fn density(a: &DensityArgs, seed: u64) -> Result<Outcome, CliError> {
    let w = a.window.load(seed)?;
    let (values, max) = density_schedule(&w, &a.schedule)?;
    Outcome::data(json!({ "schedule": a.schedule, "densities": values, "max": max, "members": w.members() }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Brute,
    Fast,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrientationArg {
    Left,
    Right,
}

impl From<OrientationArg> for Orientation {
    fn from(o: OrientationArg) -> Orientation {
        match o {
            OrientationArg::Left => Orientation::Left,
            OrientationArg::Right => Orientation::Right,
        }
    }
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct CubeCountArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub window: WindowArgs,
    /// Shift h, one integer per axis; write `--h=-2,3` when it starts with a minus.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub h: Vec<i64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Fast)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = OrientationArg::Left)]
    pub orientation: OrientationArg,
}

fn count(a: &CubeCountArgs, seed: u64) -> Result<Outcome, CliError> {
    let w = a.window.load(seed)?;
    let h: Vec<Element> = a.h.iter().map(|&v| Element(vec![v])).collect();
    let pattern = CubePattern { h, orientation: a.orientation.into() };
    match a.method {
        MethodArg::Brute => Outcome::data(cube_count(&w, &pattern, CountMethod::Brute)?),
        MethodArg::Fast => Outcome::data(cube_count(&w, &pattern, CountMethod::Fast)?),
        MethodArg::Both => {
            let brute = cube_count(&w, &pattern, CountMethod::Brute)?;
            let fast = cube_count(&w, &pattern, CountMethod::Fast)?;
            let equal = brute == fast;
            Outcome::check(json!({ "brute": brute, "fast": fast, "equal": equal }), equal)
        }
    }
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct GoodShiftsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub window: WindowArgs,
    #[arg(long)]
    pub c: f64,
    /// Shift range `lo:hi` per axis; a single range applies to every axis.
    #[arg(long, value_delimiter = ',', required = true)]
    pub shifts: Vec<String>,
    /// Følner index for the density; defaults to the smallest window side.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value_t = OrientationArg::Left)]
    pub orientation: OrientationArg,
    /// Fail when the largest empty box of the good-shift set exceeds this.
    #[arg(long)]
    pub max_gap: Option<usize>,
}

fn good_shifts(a: &GoodShiftsArgs, seed: u64) -> Result<Outcome, CliError> {
    let w = a.window.load(seed)?;
    let d = w.dim();
    let ranges = a.shifts.iter().map(|s| inputs::range(s)).collect::<Result<Vec<_>, _>>()?;
    let ranges = match ranges.len() {
        1 => vec![ranges[0]; d],
        m if m == d => ranges,
        m => return Err(CliError::Input(format!("{m} shift ranges for dimension {d}"))),
    };
    let axes: Vec<Vec<Element>> = ranges.iter().map(|&(lo, hi)| (lo..hi).map(|v| Element(vec![v])).collect()).collect();
    let n = a.n.unwrap_or_else(|| w.shape().into_iter().min().unwrap_or(1));
    let r = good_shift_set(&w, a.c, &axes, n, a.orientation.into())?;
    match a.max_gap {
        Some(g) => {
            let passed = r.largest_empty_box <= g;
            Outcome::check(r, passed)
        }
        None => Outcome::data(r),
    }
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct SyndeticProbeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub window: WindowArgs,
    /// Probe boxes like `3x3`, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub boxes: Vec<String>,
}

fn syndetic(a: &SyndeticProbeArgs, seed: u64) -> Result<Outcome, CliError> {
    let w = a.window.load(seed)?;
    let boxes = a.boxes.iter().map(|b| inputs::box_sides(b)).collect::<Result<Vec<_>, _>>()?;
    Outcome::data(syndeticity_probe(&w, &boxes)?)
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct CorrespondArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub window: WindowArgs,
    #[arg(long, default_value_t = 1)]
    pub radius: usize,
    /// Side of Ψ_N = [0, N)^d; defaults to the smallest window side.
    #[arg(long)]
    pub n: Option<usize>,
    /// Shifts g_j for the intersection check, e.g. `--shift 0,0 --shift 1,2`.
    #[arg(long, allow_negative_numbers = true)]
    pub shift: Vec<String>,
}

fn correspond(a: &CorrespondArgs, seed: u64) -> Result<Outcome, CliError> {
    let w = a.window.load(seed)?;
    let n = a.n.unwrap_or_else(|| w.shape().into_iter().min().unwrap_or(1));
    let c = correspondence_system(&w, a.radius, n)?;
    let preserving = c.is_measure_preserving();
    let bound = 2.0 * (a.radius * w.dim()) as f64 / n as f64;
    let mut passed = preserving && c.boundary_error <= bound + 1e-15;
    let intersection = if a.shift.is_empty() {
        None
    } else {
        let shifts = a.shift.iter().map(|s| inputs::int_list(s)).collect::<Result<Vec<_>, _>>()?;
        let check = c.intersection_check(&shifts)?;
        passed &= check.passed;
        Some(check)
    };
    Outcome::check(
        json!({
            "n": n,
            "radius": c.radius,
            "classes": c.system.len(),
            "weights": c.system.weights(),
            "set_a": c.set_a,
            "weight_a": c.weight_a,
            "density": c.density,
            "boundary_error": c.boundary_error,
            "boundary_bound": bound,
            "wrapped_transitions": c.wrapped_transitions,
            "measure_preserving": preserving,
            "intersection": intersection,
        }),
        passed,
    )
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct VdcCheckArgs {
    /// Rotation number θ of the vectors x_g = r·(cos 2πθg, sin 2πθg).
    #[arg(long, default_value_t = 0.3)]
    pub theta: f64,
    /// Vector length r ≤ 1.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Small Følner index m (Ψ_m = [0, m)).
    #[arg(long, default_value_t = 8)]
    pub m: usize,
    #[arg(long, default_value_t = 0.05)]
    pub c: f64,
    /// Large Følner index N; chosen by doubling when omitted.
    #[arg(long)]
    pub n: Option<usize>,
}

fn vdc(a: &VdcCheckArgs) -> Result<Outcome, CliError> {
    let z = GroupModel::integers();
    let n = match a.n {
        Some(n) => n,
        None => choose_folner_index(&z, &z, a.m, a.c, 1 << 20)?,
    };
    let (theta, r) = (a.theta, a.r);
    let vectors = move |g: &Element| {
        let t = 2.0 * std::f64::consts::PI * theta * g.0[0] as f64;
        Some(vec![r * t.cos(), r * t.sin()])
    };
    let report = vdc_check(&vectors, &z, n, &z, a.m, a.c)?;
    let passed = report.passed;
    Outcome::check(report, passed)
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct IteratedCheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub cube: CubeArgs,
    #[arg(long, value_delimiter = ',', default_values_t = default_schedule())]
    pub schedule: Vec<usize>,
}

fn iterated(a: &IteratedCheckArgs, seed: u64) -> Result<Outcome, CliError> {
    let sys = a.cube.system.load(seed, a.cube.d)?;
    let fs = inputs::vertex_observables(&a.cube.f, &sys, a.cube.d)?;
    let r = iterated_limit_check(&CubeAverageRequest::new(&sys, fs, a.schedule.clone()))?;
    let passed = r.status != IteratedStatus::Failed;
    Outcome::check(r, passed)
}
