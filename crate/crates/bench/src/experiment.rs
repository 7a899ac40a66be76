//! Seed sweeps: build the instance once, run every seed on a worker pool,
//! collect traces and summaries in seed order, write them from one thread.

use std::path::{Path, PathBuf};

use acrcd_core::coupling::{
    acrcd_restart, acrcd_star, acrcd_star_strongly_convex, sc_restart_length, EpochParams, Monitor, RunConfig,
    Schedule, ScheduleKind, StarOptions,
};
use acrcd_core::problems::{
    newton_reference, recover_primal, Certificate, DualKind, DualReference, EntropyDual, InstanceSpec,
    QuadraticProblem,
};
use acrcd_core::sparse_engine::{acrcd_prime_run, acrcd_star_prime_run, SeparableObjective};
use acrcd_core::vrsum::{vr_driver, RidgeFiniteSum};
use acrcd_core::{wrap_inexact, CoordProblem, CoordinateGeometry, Error, Stream, TraceOptions, TraceRecord};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agd::{agd, weighted_lipschitz};
use crate::config::{ExperimentConfig, MethodSpec, StarSchedule};
use crate::csvio::{write_summary, write_trace};
use crate::error::BenchError;

/// Dual Newton stopping tolerance on the decrement `gᵀH⁺g ≈ 2·gap`.
const NEWTON_TOL: f64 = 1e-14;

/// A materialized instance.
#[derive(Clone, Debug)]
pub enum Instance {
    Quadratic(QuadraticProblem<f64>),
    Entropy { dual: EntropyDual<f64>, reference: DualReference, y_star: Vec<f64> },
    Sparse(SeparableObjective<f64>),
    Ridge(RidgeFiniteSum<f64>),
}

impl Instance {
    pub fn build(spec: &InstanceSpec, dual: DualKind) -> Result<Self, BenchError> {
        Ok(match spec {
            InstanceSpec::Example2 { .. } | InstanceSpec::Chain { .. } | InstanceSpec::Heterogeneous { .. } => {
                Instance::Quadratic(spec.quadratic()?)
            }
            InstanceSpec::EntropyLp { .. } => {
                let lp = spec.entropy_lp::<f64>()?;
                let reference = newton_reference(&lp, NEWTON_TOL)?;
                let y_star = match dual {
                    DualKind::LogSumExp => reference.y_star.clone(),
                    DualKind::Exponential => exponential_minimizer(&lp, &reference.y_star),
                };
                // both duals attain −f_*
                let d = lp.dual(dual).with_reference(y_star.clone(), reference.phi_star);
                Instance::Entropy { dual: d, reference, y_star }
            }
            InstanceSpec::LeastSquares { .. } => Instance::Sparse(spec.least_squares()?),
            InstanceSpec::Ridge { .. } => Instance::Ridge(spec.ridge()?),
        })
    }

    /// The instance as a coordinate problem; ridge sums are not one.
    pub fn coord(&self) -> Option<&dyn CoordProblem<f64>> {
        match self {
            Instance::Quadratic(q) => Some(q),
            Instance::Entropy { dual, .. } => Some(dual),
            Instance::Sparse(s) => Some(s),
            Instance::Ridge(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Instance::Ridge(r) => acrcd_core::vrsum::FiniteSumProblem::dim(r),
            other => other.coord().map(|p| p.dim()).unwrap_or(0),
        }
    }
}

/// The `φ₁` minimizer shifted along `e_m` so that `exp([Aᵀy]_i − 1)` equals
/// the softmax: the last row of `A` is the constant `c`, so the shift is
/// `(1 − ln Σ exp([Aᵀy]_i))/c`.
fn exponential_minimizer(lp: &acrcd_core::problems::EntropyLp<f64>, y1: &[f64]) -> Vec<f64> {
    let s = lp.at_y(y1);
    let c = lp.entry(lp.m - 1, 0);
    let mut y = y1.to_vec();
    y[lp.m - 1] += (1.0 - acrcd_core::problems::log_sum_exp(&s)) / c;
    y
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    BudgetExhausted,
    Diverged,
    Failed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::BudgetExhausted => "budget_exhausted",
            RunStatus::Diverged => "diverged",
            RunStatus::Failed => "failed",
        }
    }
}

/// One row of the summary table.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub run_id: u64,
    pub status: RunStatus,
    pub iterations: u64,
    /// Coordinate-oracle calls; component evaluations for finite sums.
    pub coordinate_calls: u64,
    pub value_calls: u64,
    pub final_gap: Option<f64>,
    pub final_is_gap: bool,
    pub touches: u64,
    pub certificate: Option<Certificate>,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub summary: RunSummary,
    pub records: Vec<TraceRecord>,
    /// Final point; empty when the run failed.
    pub x: Vec<f64>,
}

/// An experiment with its instance built and its run parameters resolved.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub instance: Instance,
    pub x0: Vec<f64>,
    /// `(Θ, d, ε)` for the methods that need them.
    pub levels: Option<(f64, f64, f64)>,
    /// Arithmetic logging stride; 0 disables it.
    pub stride: u64,
}

fn geometry(p: &dyn CoordProblem<f64>, beta: f64) -> Result<CoordinateGeometry<f64>, BenchError> {
    Ok(CoordinateGeometry::new(p, beta)?)
}

impl Prepared {
    pub fn new(config: ExperimentConfig) -> Result<Self, BenchError> {
        config.validate()?;
        let instance = Instance::build(&config.problem, config.run.dual)?;
        let x0 = config.run.start.materialize(instance.dim())?;
        let levels = resolve_levels(&config, &instance, &x0)?;
        let nominal = nominal_length(&config, &instance, levels)?;
        let stride = match (config.log.stride, config.log.per_decade) {
            (Some(s), _) => s,
            // a log grid on its own is a complete request
            (None, d) if d > 0 => 0,
            (None, _) => nominal.div_ceil(1000).max(1),
        };
        Ok(Self { config, instance, x0, levels, stride })
    }

    fn trace_options(&self, seed: u64) -> TraceOptions {
        TraceOptions { run_id: seed, stride: self.stride, per_decade: self.config.log.per_decade, timing: self.config.log.timing }
    }

    /// One seeded run. Divergence and solver errors are recorded in the
    /// summary, not returned.
    pub fn run_one(&self, seed: u64) -> RunResult {
        let mut monitor = Monitor::new(self.trace_options(seed));
        let outcome = self.dispatch(seed, &mut monitor);
        let records = monitor.tracer.records().to_vec();
        let mut summary = RunSummary {
            run_id: seed,
            status: RunStatus::Ok,
            iterations: monitor.iteration,
            coordinate_calls: monitor.counters.coordinate,
            value_calls: monitor.counters.value,
            final_gap: None,
            final_is_gap: false,
            touches: monitor.touches,
            certificate: None,
            message: String::new(),
        };
        match outcome {
            Ok(done) => {
                if let Some(n) = done.evaluations {
                    summary.coordinate_calls = n;
                }
                if done.budget_exhausted {
                    summary.status = RunStatus::BudgetExhausted;
                }
                let (g, is_gap) = self.final_objective(&done.x);
                if !g.is_finite() {
                    summary.status = RunStatus::Diverged;
                    summary.message = "final objective is not finite".into();
                }
                summary.final_gap = Some(g);
                summary.final_is_gap = is_gap;
                summary.certificate = done.certificate;
                RunResult { summary, records: if done.records.is_empty() { records } else { done.records }, x: done.x }
            }
            Err(Error::Divergence { iteration, trace }) => {
                summary.status = RunStatus::Diverged;
                summary.message = format!("diverged at iteration {iteration}");
                RunResult { summary, records: if trace.is_empty() { records } else { trace }, x: Vec::new() }
            }
            Err(e) => {
                summary.status = RunStatus::Failed;
                summary.message = e.to_string();
                RunResult { summary, records, x: Vec::new() }
            }
        }
    }

    fn final_objective(&self, x: &[f64]) -> (f64, bool) {
        match &self.instance {
            Instance::Ridge(r) => (r.gap(x), true),
            other => {
                let p = other.coord().expect("coordinate instance");
                match p.gap(x) {
                    Some(g) => (g, true),
                    None => (p.value(x), false),
                }
            }
        }
    }

    fn dispatch(&self, seed: u64, monitor: &mut Monitor<f64>) -> Result<Done, Error> {
        let run = &self.config.run;
        if let Instance::Ridge(r) = &self.instance {
            let MethodSpec::Vr { settings } = &self.config.method else {
                return Err(Error::Config("ridge instances run only with the vr method".into()));
            };
            let (_, _, eps) = self.levels.expect("levels resolved for ridge");
            let out = vr_driver(r, &self.x0, eps, &mut Stream::new(seed), settings)?;
            let records = out.trace.into_iter().map(|t| TraceRecord { run_id: seed, ..t }).collect();
            monitor.iteration = out.epochs as u64;
            return Ok(Done {
                x: out.x,
                budget_exhausted: out.budget_exhausted,
                certificate: None,
                evaluations: Some(out.evaluations),
                records,
            });
        }
        let base = self.instance.coord().expect("coordinate instance");
        if run.delta > 0.0 {
            let noisy = wrap_inexact(base, run.delta, seed);
            self.dispatch_coord(&noisy, seed, monitor)
        } else {
            self.dispatch_coord(base, seed, monitor)
        }
    }

    fn dispatch_coord<P: CoordProblem<f64> + ?Sized>(
        &self,
        problem: &P,
        seed: u64,
        monitor: &mut Monitor<f64>,
    ) -> Result<Done, Error> {
        let run = &self.config.run;
        let mut geom = CoordinateGeometry::new(problem, run.beta)?;
        let adaptive = run.adaptive_lipschitz || !problem.lipschitz_bounded();
        let x0 = &self.x0;
        let plain = |x: Vec<f64>| Done { x, budget_exhausted: false, certificate: None, evaluations: None, records: Vec::new() };
        match &self.config.method {
            MethodSpec::Acrcd => {
                let (theta, d, epsilon) = self.levels.expect("levels resolved");
                let cfg = RunConfig {
                    theta,
                    d,
                    epsilon,
                    sigma: run.sigma,
                    beta: run.beta,
                    seed,
                    epoch_constant: run.epoch_constant,
                    adaptive_lipschitz: adaptive,
                    max_iters: run.max_iters,
                };
                let out = acrcd_restart(problem, &mut geom, &cfg, x0, monitor)?;
                Ok(Done { budget_exhausted: out.budget_exhausted, ..plain(out.x) })
            }
            MethodSpec::AcrcdStar { iterations, schedule, stop_gap, stop_every } => {
                let kind = match schedule {
                    StarSchedule::Simple => ScheduleKind::Simple,
                    StarSchedule::Recurrence => ScheduleKind::Recurrence,
                };
                let mut sched = Schedule::new(kind, geom.n_eff())?;
                let recover = |y: &[f64]| match &self.instance {
                    Instance::Entropy { dual, .. } => dual.recover(y),
                    _ => Vec::new(),
                };
                let entropy = matches!(self.instance, Instance::Entropy { .. });
                let opts = StarOptions {
                    adaptive,
                    payload: if entropy { Some(&recover as &dyn Fn(&[f64]) -> Vec<f64>) } else { None },
                    stop: stop_gap.map(|g| (g, *stop_every)),
                };
                let n = if run.max_iters > 0 { (*iterations).min(run.max_iters) } else { *iterations };
                let st = acrcd_star(problem, &mut geom, x0, n, &mut sched, &mut Stream::new(seed), monitor, &opts)?;
                let certificate = match (&self.instance, &st.recovery) {
                    (Instance::Entropy { dual, y_star, .. }, Some(acc)) => {
                        let theta: f64 = y_star.iter().map(|v| v * v).sum();
                        Some(recover_primal(acc, dual, &st.y, theta)?.1)
                    }
                    _ => None,
                };
                Ok(Done { certificate, ..plain(st.y) })
            }
            MethodSpec::AcrcdStarSc { mu } => {
                let xs = problem
                    .minimizer_hint()
                    .ok_or_else(|| Error::Config("the strongly convex restart needs a known minimizer".into()))?
                    .to_vec();
                let mu = match (mu, &self.instance) {
                    (Some(m), _) => *m,
                    (None, Instance::Quadratic(q)) => q.strong_convexity_in(geom.norm.weights()),
                    (None, _) => return Err(Error::Config("method.mu is required for this instance".into())),
                };
                let theta0 = geom.norm.bregman(x0, &xs);
                if !(theta0 > 0.0) {
                    return Ok(plain(x0.clone()));
                }
                let eps = run.epsilon.unwrap_or(mu * theta0 / 1024.0);
                let out =
                    acrcd_star_strongly_convex(problem, &mut geom, x0, mu, theta0, eps, &mut Stream::new(seed), monitor)?;
                Ok(plain(out.x))
            }
            MethodSpec::AcrcdPrime { iterations } => {
                let Instance::Sparse(obj) = &self.instance else {
                    return Err(Error::Config("lazy methods need a least_squares instance".into()));
                };
                let (theta, d, _) = self.levels.expect("levels resolved");
                let mut params = EpochParams::for_level(theta, d, geom.n_eff(), run.epoch_constant);
                if let Some(k) = iterations {
                    params.k = *k;
                }
                let out = acrcd_prime_run(obj, &geom, x0, params, &mut Stream::new(seed), monitor)?;
                Ok(plain(out.xbar))
            }
            MethodSpec::AcrcdStarPrime { iterations } => {
                let Instance::Sparse(obj) = &self.instance else {
                    return Err(Error::Config("lazy methods need a least_squares instance".into()));
                };
                let mut sched = Schedule::new(ScheduleKind::Simple, geom.n_eff())?;
                let out = acrcd_star_prime_run(obj, &geom, x0, *iterations, &mut sched, &mut Stream::new(seed), monitor)?;
                Ok(plain(out.y))
            }
            MethodSpec::Agd { iterations, stop_gap, stop_every } => {
                let lip = weighted_lipschitz(problem, &geom.norm, x0);
                let x = agd(problem, &geom.norm, lip, x0, *iterations, stop_gap.map(|g| (g, *stop_every)), monitor)?;
                Ok(plain(x))
            }
            MethodSpec::Vr { .. } => Err(Error::Config("the vr method needs a ridge instance".into())),
        }
    }
}

struct Done {
    x: Vec<f64>,
    budget_exhausted: bool,
    certificate: Option<Certificate>,
    /// Finite-sum component evaluations, reported in place of coordinate calls.
    evaluations: Option<u64>,
    /// Trace produced outside the monitor.
    records: Vec<TraceRecord>,
}

/// `(Θ, d, ε)`: explicit values win; otherwise `d = f(x₀) − f_*`,
/// `ε = d/2¹⁰` and, for quadratics, the level-set `Θ` in the sampling norm.
fn resolve_levels(
    config: &ExperimentConfig,
    instance: &Instance,
    x0: &[f64],
) -> Result<Option<(f64, f64, f64)>, BenchError> {
    let run = &config.run;
    let needs_theta = matches!(config.method, MethodSpec::Acrcd | MethodSpec::AcrcdPrime { .. });
    let d = match (run.d, instance) {
        (Some(d), _) => Some(d),
        (None, Instance::Ridge(r)) => Some(r.gap(x0)),
        (None, other) => other.coord().and_then(|p| p.gap(x0)),
    };
    let Some(d) = d else {
        if needs_theta || matches!(config.method, MethodSpec::Vr { .. }) {
            return Err(BenchError::Invalid("run.d is required: the instance has no known optimum".into()));
        }
        return Ok(None);
    };
    if !(d > 0.0) {
        if needs_theta {
            return Err(BenchError::Invalid("the start point is optimal; nothing to run".into()));
        }
        return Ok(None);
    }
    let epsilon = run.epsilon.unwrap_or(d / 1024.0);
    let theta = match (run.theta, instance) {
        (Some(t), _) => Some(t),
        (None, Instance::Quadratic(q)) => {
            let geom = geometry(q, run.beta)?;
            Some(q.level_set_theta(geom.norm.weights(), d))
        }
        _ => None,
    };
    match theta {
        Some(t) => Ok(Some((t, d, epsilon))),
        None if needs_theta => Err(BenchError::Invalid("run.theta is required for this instance".into())),
        None => Ok(Some((f64::NAN, d, epsilon))),
    }
}

/// Iterations the method will nominally run, for the default logging stride.
fn nominal_length(
    config: &ExperimentConfig,
    instance: &Instance,
    levels: Option<(f64, f64, f64)>,
) -> Result<u64, BenchError> {
    let run = &config.run;
    let n_eff = match instance.coord() {
        Some(p) => geometry(p, run.beta)?.n_eff(),
        None => 1.0,
    };
    Ok(match &config.method {
        MethodSpec::Acrcd => {
            let (theta, d, epsilon) = levels.expect("levels resolved");
            let cfg = RunConfig::new(theta, d, epsilon, run.sigma);
            let per_round: u64 = (0..cfg.rounds().max(1))
                .map(|r| EpochParams::<f64>::for_level(theta, d / 2f64.powi(r as i32), n_eff, run.epoch_constant).k)
                .sum();
            per_round * cfg.replicas() as u64
        }
        MethodSpec::AcrcdStar { iterations, .. }
        | MethodSpec::AcrcdStarPrime { iterations }
        | MethodSpec::Agd { iterations, .. } => *iterations,
        MethodSpec::AcrcdPrime { iterations } => match iterations {
            Some(k) => *k,
            None => {
                let (theta, d, _) = levels.expect("levels resolved");
                EpochParams::<f64>::for_level(theta, d, n_eff, run.epoch_constant).k
            }
        },
        MethodSpec::AcrcdStarSc { mu } => {
            let mu = mu.or_else(|| match instance {
                Instance::Quadratic(q) => Some(q.strong_convexity_in(geometry(q, run.beta).ok()?.norm.weights())),
                _ => None,
            });
            mu.map(|m| sc_restart_length(n_eff, m) * 10).unwrap_or(1000)
        }
        MethodSpec::Vr { .. } => 1,
    })
}

/// Runs every seed on a pool of `workers` threads (0 = rayon's default);
/// results come back in seed order.
pub fn run_all(prepared: &Prepared, seeds: &[u64], workers: usize) -> Result<Vec<RunResult>, BenchError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BenchError::Invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| seeds.par_iter().map(|&s| prepared.run_one(s)).collect()))
}

pub fn trace_path(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("run_{seed}.csv"))
}

pub fn summary_path(out: &Path) -> PathBuf {
    out.join("summary.csv")
}

/// Runs the sweep and writes `run_<seed>.csv` per run plus `summary.csv`.
pub fn run(prepared: &Prepared, seeds: &[u64], out: &Path, workers: usize) -> Result<Vec<RunSummary>, BenchError> {
    std::fs::create_dir_all(out)?;
    let results = run_all(prepared, seeds, workers)?;
    for r in &results {
        let f = std::fs::File::create(trace_path(out, r.summary.run_id))?;
        write_trace(std::io::BufWriter::new(f), &r.records)?;
    }
    let summaries: Vec<RunSummary> = results.into_iter().map(|r| r.summary).collect();
    let f = std::fs::File::create(summary_path(out))?;
    write_summary(std::io::BufWriter::new(f), &summaries)?;
    Ok(summaries)
}

pub const COMPARE_THRESHOLDS: [f64; 3] = [1e-2, 1e-4, 1e-6];

/// Median coordinate calls to reach a gap threshold, per method.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub threshold: f64,
    pub median_a: Option<f64>,
    pub median_b: Option<f64>,
    pub reached_a: usize,
    pub reached_b: usize,
    /// `median_b / median_a`.
    pub ratio: Option<f64>,
}

/// Coordinate calls at the first logged point with gap ≤ `threshold`.
pub fn calls_to_reach(records: &[TraceRecord], threshold: f64) -> Option<u64> {
    records.iter().find(|r| r.objective_is_gap && r.objective <= threshold).map(|r| r.coordinate_calls)
}

/// Median over the runs that reached the threshold; `None` unless at least half did.
fn median_calls(results: &[RunResult], threshold: f64) -> (Option<f64>, usize) {
    let mut v: Vec<u64> = results.iter().filter_map(|r| calls_to_reach(&r.records, threshold)).collect();
    let reached = v.len();
    if results.is_empty() || 2 * reached < results.len() {
        return (None, reached);
    }
    v.sort_unstable();
    let m = if reached % 2 == 1 { v[reached / 2] as f64 } else { 0.5 * (v[reached / 2 - 1] + v[reached / 2]) as f64 };
    (Some(m), reached)
}

pub fn compare(
    a: &Prepared,
    b: &Prepared,
    seeds: &[u64],
    workers: usize,
) -> Result<Vec<ComparisonRow>, BenchError> {
    if a.config.problem != b.config.problem {
        return Err(BenchError::Invalid("compared configurations use different problems".into()));
    }
    let ra = run_all(a, seeds, workers)?;
    let rb = run_all(b, seeds, workers)?;
    Ok(COMPARE_THRESHOLDS
        .iter()
        .map(|&t| {
            let (ma, na) = median_calls(&ra, t);
            let (mb, nb) = median_calls(&rb, t);
            let ratio = match (ma, mb) {
                (Some(x), Some(y)) if x > 0.0 => Some(y / x),
                _ => None,
            };
            ComparisonRow { threshold: t, median_a: ma, median_b: mb, reached_a: na, reached_b: nb, ratio }
        })
        .collect())
}

pub fn write_comparison<W: std::io::Write>(out: W, rows: &[ComparisonRow]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["threshold", "median_calls_a", "median_calls_b", "reached_a", "reached_b", "ratio_b_over_a"])?;
    let f = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            format!("{:e}", r.threshold),
            f(r.median_a),
            f(r.median_b),
            r.reached_a.to_string(),
            r.reached_b.to_string(),
            f(r.ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}
