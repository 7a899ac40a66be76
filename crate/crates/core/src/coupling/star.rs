use super::acrcd::{coupled_step, couple};
use super::{CoordinateGeometry, CouplingState, Monitor, Schedule, ScheduleKind, WeightedAverage};
use crate::error::{Error, Result};
use crate::oracle::CoordProblem;
use crate::rng::Stream;
use crate::scalar::Scalar;

/// Map from a coupling point to the vector averaged alongside the run.
pub type Payload<'a, T> = &'a dyn Fn(&[T]) -> Vec<T>;

/// Optional behaviour of [`acrcd_star`].
pub struct StarOptions<'a, T> {
    pub adaptive: bool,
    /// Map whose values at the coupling points are averaged with weights `α_{k+1}`.
    pub payload: Option<Payload<'a, T>>,
    /// Stop once the gap at `y` is at most `threshold`, tested every `every` iterations.
    /// The test is instrumentation and books no oracle calls.
    pub stop: Option<(f64, u64)>,
}

impl<T> Default for StarOptions<'_, T> {
    fn default() -> Self {
        Self { adaptive: false, payload: None, stop: None }
    }
}

/// The coupled method with growing steps from `x_0 = y_0 = z_0`: for
/// `k = 0, …, N−1`, `x_{k+1} = τ_k z_k + (1 − τ_k) y_k`, then a gradient step
/// to `y_{k+1}` and a mirror step with input `α_{k+1} ∇_i f(x_{k+1})/p_i`.
///
/// The result's `y` is `y_N`; `k` may be smaller than `N` when a stop rule fired.
pub fn acrcd_star<T: Scalar, P: CoordProblem<T> + ?Sized>(
    problem: &P,
    geom: &mut CoordinateGeometry<T>,
    x0: &[T],
    n_iters: u64,
    schedule: &mut Schedule<T>,
    rng: &mut Stream,
    monitor: &mut Monitor<T>,
    options: &StarOptions<'_, T>,
) -> Result<CouplingState<T>> {
    if n_iters == 0 {
        return Err(Error::Contract("the method needs N ≥ 1".into()));
    }
    if matches!(schedule.kind, ScheduleKind::Constant { .. }) {
        return Err(Error::Config("growing-step method needs the simple or recurrence schedule".into()));
    }
    let mut st = CouplingState::start(x0);
    if options.payload.is_some() {
        st.recovery = Some(WeightedAverage::new(0));
    }
    for _ in 0..n_iters {
        let (tau, alpha) = schedule.advance();
        couple(&mut st, tau);
        st.tau = tau;
        st.alpha = alpha;
        st.xbar.add(T::one(), &st.x);
        if let (Some(map), Some(acc)) = (options.payload, st.recovery.as_mut()) {
            acc.add(alpha, &map(&st.x));
        }
        monitor.iteration += 1;
        st.k += 1;
        if monitor.wants_snapshot(monitor.iteration) {
            monitor.snapshot(monitor.iteration, &st.x);
        }
        coupled_step(problem, geom, &mut st, alpha, options.adaptive, rng, monitor)?;
        monitor.maybe_log(problem, &geom.norm, &st.y, &st.z);
        if let Some((threshold, every)) = options.stop {
            if every > 0 && st.k.is_multiple_of(every) {
                if let Some(g) = problem.gap(&st.y) {
                    if g.as_f64() <= threshold {
                        monitor.log_final(problem, &geom.norm, &st.y, &st.z);
                        break;
                    }
                }
            }
        }
    }
    Ok(st)
}

/// A-priori iteration count `⌈2 n_eff √(Θ/ε)⌉` after which
/// `E f(y_N) − f_* ≤ 4 n_eff² Θ/(N+1)² ≤ ε`, with `Θ = V_{x0}(x_*)` in the
/// sampling norm.
pub fn star_iterations(n_eff: f64, theta: f64, epsilon: f64) -> Result<u64> {
    if !(n_eff > 0.0 && theta >= 0.0 && epsilon > 0.0) || !(theta / epsilon).is_finite() {
        return Err(Error::Config(format!("iteration bound needs n_eff > 0, Θ ≥ 0, ε > 0 (got {n_eff}, {theta}, {epsilon})")));
    }
    Ok((2.0 * n_eff * (theta / epsilon).sqrt()).ceil().max(1.0) as u64)
}

/// Restart length `⌈n_eff √(8/μ)⌉` that halves `V(x_*)` in expectation.
///
/// From `E f(y_N) − f_* ≤ 4 n_eff² Θ/(N+1)²` and `μ/2 ‖y − x_*‖² ≤ f(y) − f_*`.
pub fn sc_restart_length(n_eff: f64, mu: f64) -> u64 {
    (n_eff * (8.0 / mu).sqrt()).ceil().max(1.0) as u64
}

#[derive(Clone, Debug)]
pub struct StrongOutcome<T> {
    pub x: Vec<T>,
    pub rounds: u32,
    /// Start point followed by the output of every round.
    pub round_points: Vec<Vec<T>>,
}

/// Restarts [`acrcd_star`] with the simple schedule from its last `y`,
/// halving the distance bound `Θ` each round, until `μΘ ≤ ε`.
///
/// `mu` is the strong convexity modulus in the sampling norm.
pub fn acrcd_star_strongly_convex<T: Scalar, P: CoordProblem<T> + ?Sized>(
    problem: &P,
    geom: &mut CoordinateGeometry<T>,
    x0: &[T],
    mu: f64,
    theta0: f64,
    epsilon: f64,
    rng: &mut Stream,
    monitor: &mut Monitor<T>,
) -> Result<StrongOutcome<T>> {
    if !(mu > 0.0) {
        return Err(Error::Config(format!("strong convexity modulus must be positive, got {mu}")));
    }
    if !(theta0 > 0.0 && epsilon > 0.0) {
        return Err(Error::Config("Θ₀ and ε must be positive".into()));
    }
    let mut x = x0.to_vec();
    let mut theta = theta0;
    let mut rounds = 0;
    let mut round_points = vec![x.clone()];
    while mu * theta > epsilon {
        let n = sc_restart_length(geom.n_eff().as_f64(), mu);
        let mut schedule = Schedule::new(ScheduleKind::Simple, geom.n_eff())?;
        monitor.tracer.epoch = rounds;
        let st = acrcd_star(problem, geom, &x, n, &mut schedule, rng, monitor, &StarOptions::default())?;
        x = st.y;
        round_points.push(x.clone());
        theta *= 0.5;
        rounds += 1;
    }
    Ok(StrongOutcome { x, rounds, round_points })
}
