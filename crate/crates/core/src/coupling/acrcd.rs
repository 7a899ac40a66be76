use super::{adapt_lipschitz, CoordinateGeometry, CouplingState, EpochParams, Monitor, RunConfig};
use crate::error::{Error, Result};
use crate::oracle::{checked_partial, CoordProblem};
use crate::rng::{substream_seed, Stream};
use crate::scalar::Scalar;

/// One coupled step at the current coupling point `state.x`:
/// draws `i`, sets `y = x − g/L_i e_i` and `z_i −= α g/(p_i w_i)`.
///
/// Returns `(i, g)`.
#[inline]
pub(crate) fn coupled_step<T: Scalar, P: CoordProblem<T> + ?Sized>(
    problem: &P,
    geom: &mut CoordinateGeometry<T>,
    state: &mut CouplingState<T>,
    alpha: T,
    adaptive: bool,
    rng: &mut Stream,
    monitor: &mut Monitor<T>,
) -> Result<(usize, T)> {
    let i = geom.tree.sample(rng);
    let g = checked_partial(problem, i, &state.x)?;
    monitor.counters.coordinate += 1;
    let p = geom.probability(i);
    let w = geom.norm.weight(i);
    let lip = if adaptive {
        adapt_lipschitz(problem, geom, i, &state.x, g, &mut monitor.counters)?
    } else {
        geom.lip(i)
    };
    state.y.copy_from_slice(&state.x);
    state.y[i] -= g / lip;
    let xi = alpha * g / p;
    state.z[i] -= xi / w;
    if !(state.y[i].is_finite() && state.z[i].is_finite()) {
        return Err(monitor.divergence());
    }
    Ok((i, g))
}

#[inline]
pub(crate) fn couple<T: Scalar>(state: &mut CouplingState<T>, tau: T) {
    let s = T::one() - tau;
    for ((x, &z), &y) in state.x.iter_mut().zip(&state.z).zip(&state.y) {
        *x = tau * z + s * y;
    }
}

/// `K` iterations of the coupled method with constant `(α, τ)` from
/// `x_0 = y_0 = z_0`; returns the final state, whose `xbar` averages the
/// coupling points `x_1, …, x_K`.
pub fn acrcd_epoch_state<T: Scalar, P: CoordProblem<T> + ?Sized>(
    problem: &P,
    geom: &mut CoordinateGeometry<T>,
    x0: &[T],
    params: EpochParams<T>,
    adaptive: bool,
    rng: &mut Stream,
    monitor: &mut Monitor<T>,
) -> Result<CouplingState<T>> {
    let EpochParams { alpha, tau, k } = params;
    if !(tau > T::zero() && tau < T::one() && alpha > T::zero() && k >= 1) {
        return Err(Error::Contract(format!("epoch needs τ ∈ (0,1), α > 0, K ≥ 1; got {tau}, {alpha}, {k}")));
    }
    let mut st = CouplingState::start(x0);
    st.tau = tau;
    st.alpha = alpha;
    let one = T::one();
    for _ in 0..k {
        couple(&mut st, tau);
        st.xbar.add(one, &st.x);
        monitor.iteration += 1;
        st.k += 1;
        if monitor.wants_snapshot(monitor.iteration) {
            monitor.snapshot(monitor.iteration, &st.x);
        }
        coupled_step(problem, geom, &mut st, alpha, adaptive, rng, monitor)?;
        monitor.maybe_log(problem, &geom.norm, &st.y, &st.z);
    }
    Ok(st)
}

/// [`acrcd_epoch_state`] returning `x̄_K`.
pub fn acrcd_epoch<T: Scalar, P: CoordProblem<T> + ?Sized>(
    problem: &P,
    geom: &mut CoordinateGeometry<T>,
    x0: &[T],
    params: EpochParams<T>,
    rng: &mut Stream,
    monitor: &mut Monitor<T>,
) -> Result<Vec<T>> {
    acrcd_epoch_state(problem, geom, x0, params, false, rng, monitor).map(|s| s.average())
}

/// Result of [`markov_amplify`].
#[derive(Clone, Debug)]
pub struct Amplified<T> {
    pub x: Vec<T>,
    pub index: usize,
    pub values: Vec<T>,
}

/// Runs `replicas` candidates and keeps the one with the least `f`
/// (first on ties). Exactly `replicas` value evaluations beyond the runs.
pub fn markov_amplify<T, P, F>(problem: &P, replicas: usize, mut run: F) -> Result<Amplified<T>>
where
    T: Scalar,
    P: CoordProblem<T> + ?Sized,
    F: FnMut(usize) -> Result<Vec<T>>,
{
    if replicas == 0 {
        return Err(Error::Contract("at least one replica is required".into()));
    }
    let mut best: Option<(usize, Vec<T>)> = None;
    let mut values = Vec::with_capacity(replicas);
    for j in 0..replicas {
        let x = run(j)?;
        let v = problem.value(&x);
        let better = match &best {
            None => true,
            Some((b, _)) => v < values[*b],
        };
        values.push(v);
        if better {
            best = Some((j, x));
        }
    }
    let (index, x) = best.expect("at least one replica ran");
    Ok(Amplified { x, index, values })
}

#[derive(Clone, Debug)]
pub struct RestartOutcome<T> {
    pub x: Vec<T>,
    /// Rounds completed.
    pub rounds: u32,
    /// The coordinate-call budget stopped the run early; `x` is the best point so far.
    pub budget_exhausted: bool,
}

/// Restarted method: round `r = 0, …, R−1` (`R = ⌈log₂(d/ε)⌉`, at least one
/// round) runs amplified epochs at level `d_r = d/2^r`; replica `j` of round
/// `r` draws from substream `(substream(seed, r), j)`.
pub fn acrcd_restart<T: Scalar, P: CoordProblem<T> + ?Sized>(
    problem: &P,
    geom: &mut CoordinateGeometry<T>,
    config: &RunConfig,
    x0: &[T],
    monitor: &mut Monitor<T>,
) -> Result<RestartOutcome<T>> {
    config.validate()?;
    let rounds = config.rounds().max(1);
    let replicas = config.replicas();
    let mut x = x0.to_vec();
    for r in 0..rounds {
        let d_r = config.d / 2f64.powi(r as i32);
        let params = EpochParams::for_level(config.theta, d_r, geom.n_eff(), config.epoch_constant);
        let needed = params.k * replicas as u64;
        if config.max_iters > 0 && monitor.counters.coordinate + needed > config.max_iters {
            return Ok(RestartOutcome { x, rounds: r, budget_exhausted: true });
        }
        monitor.tracer.epoch = r;
        let round_seed = substream_seed(config.seed, r as u64);
        let start = x.clone();
        let amp = markov_amplify(problem, replicas, |j| {
            let mut rng = Stream::substream(round_seed, j as u64);
            if config.adaptive_lipschitz {
                let mut local = geom.clone();
                acrcd_epoch_state(problem, &mut local, &start, params, true, &mut rng, monitor)
                    .map(|s| s.average())
            } else {
                acrcd_epoch(problem, geom, &start, params, &mut rng, monitor)
            }
        })?;
        monitor.counters.value += replicas as u64;
        x = amp.x;
    }
    Ok(RestartOutcome { x, rounds, budget_exhausted: false })
}
