//! Lazy coupled methods for `f(x) = Σ φ_r(a_rᵀx) + ⟨c, x⟩`.
//!
//! With `e_k = y_k − z_k` the coupling point is `x_{k+1} = z_k + (1 − τ_k) e_k`.
//! A step at coordinate `i` changes `z` and `e` only at `i`, so storing
//! `z = u` and `e = s_k v` for a scalar `s_k` makes every step touch one
//! column of `A` while `Au` and `Av` stay current:
//!
//! * constant `τ`: `s_k = (1 − τ)^{k − base}`, rebased every `R` steps so
//!   that `s_k ≥ 2⁻⁶⁴`;
//! * `τ_k = 2/(k + 2)`: `s_k = Π_{j=1}^{k−1}(1 − τ_j) = 2/(k(k + 1))`.

use super::SeparableObjective;
use crate::coupling::{CoordinateGeometry, EpochParams, Monitor, Schedule, ScheduleKind};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::scalar::Scalar;

/// Compressed iterate: `z = u`, `y − z = scale · v`, with `Au`, `Av` cached.
#[derive(Clone, Debug)]
pub struct LazyState<T> {
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub au: Vec<T>,
    pub av: Vec<T>,
    /// Current multiplier of `v` in `y − z`.
    pub scale: T,
    pub rebases: u64,
}

impl<T: Scalar> LazyState<T> {
    fn start(obj: &SeparableObjective<T>, x0: &[T]) -> Self {
        Self {
            u: x0.to_vec(),
            v: vec![T::zero(); x0.len()],
            au: obj.matrix.matvec(x0),
            av: vec![T::zero(); obj.matrix.rows()],
            scale: T::one(),
            rebases: 0,
        }
    }

    /// `u + s v`.
    pub fn combine(&self, s: T) -> Vec<T> {
        self.u.iter().zip(&self.v).map(|(&u, &v)| u + s * v).collect()
    }

    pub fn y(&self) -> Vec<T> {
        self.combine(self.scale)
    }

    pub fn z(&self) -> &[T] {
        &self.u
    }

    /// Largest relative deviation of the cached products from a fresh `Au`, `Av`.
    pub fn cache_deviation(&self, obj: &SeparableObjective<T>) -> f64 {
        let dev = |cached: &[T], fresh: Vec<T>| {
            let scale = fresh.iter().fold(0.0f64, |m, v| m.max(v.as_f64().abs())).max(1e-300);
            cached.iter().zip(&fresh).fold(0.0f64, |m, (a, b)| m.max((*a - *b).as_f64().abs())) / scale
        };
        dev(&self.au, obj.matrix.matvec(&self.u)).max(dev(&self.av, obj.matrix.matvec(&self.v)))
    }

    /// One lazy step at coordinate `i` with `x = u + s v`: mirror decrement
    /// `dz`, gradient step `g/L`. Returns the touched column's length.
    #[inline]
    fn apply(&mut self, obj: &SeparableObjective<T>, i: usize, s: T, dz: T, gl: T) -> usize {
        let dv = (dz - gl) / s;
        self.u[i] -= dz;
        self.v[i] += dv;
        let (idx, val) = obj.matrix.col(i);
        for (&r, &a) in idx.iter().zip(val) {
            self.au[r] -= dz * a;
            self.av[r] += dv * a;
        }
        idx.len()
    }

    fn partial_at(&self, obj: &SeparableObjective<T>, i: usize, s: T) -> T {
        obj.partial_with(i, |r| self.au[r] + s * self.av[r])
    }
}

/// Data of step `k` needed to rebuild `x̄_K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contribution<T> {
    pub coord: usize,
    /// Mirror decrement `α g/(p_i w_i)`.
    pub dz: T,
    /// Gradient step `g/L_i`.
    pub gl: T,
}

#[derive(Clone, Debug)]
pub struct LazyOutcome<T> {
    pub xbar: Vec<T>,
    pub state: LazyState<T>,
    pub log: Vec<Contribution<T>>,
}

/// `R = ⌈64 / (−log₂(1 − τ))⌉`.
pub fn rebase_period(tau: f64) -> u64 {
    let per = -(1.0 - tau).log2();
    if per <= 0.0 || !per.is_finite() {
        return u64::MAX;
    }
    (64.0 / per).ceil().max(1.0) as u64
}

/// Cost in touched entries of flattening the representation and rebuilding both caches.
fn rebase_cost<T: Scalar>(obj: &SeparableObjective<T>) -> u64 {
    (obj.matrix.cols() + 2 * obj.matrix.nnz()) as u64
}

/// Lazy counterpart of [`acrcd_epoch`](crate::coupling::acrcd_epoch): same
/// draws and iterates, `O(col nnz + log n)` work per step.
pub fn acrcd_prime_run<T: Scalar>(
    obj: &SeparableObjective<T>,
    geom: &CoordinateGeometry<T>,
    x0: &[T],
    params: EpochParams<T>,
    rng: &mut Stream,
    monitor: &mut Monitor<T>,
) -> Result<LazyOutcome<T>> {
    let EpochParams { alpha, tau, k } = params;
    if !(tau > T::zero() && tau < T::one() && alpha > T::zero() && k >= 1) {
        return Err(Error::Contract(format!("epoch needs τ ∈ (0,1), α > 0, K ≥ 1; got {tau}, {alpha}, {k}")));
    }
    let q = T::one() - tau;
    let period = rebase_period(tau.as_f64());
    let mut st = LazyState::start(obj, x0);
    let mut log = Vec::with_capacity(k as usize);
    let mut since_base: u64 = 0;
    for _ in 0..k {
        since_base += 1;
        // x_{k+1} = u + (1 − τ)^{t} v
        let s = q.powi(since_base as i32);
        monitor.iteration += 1;
        if monitor.wants_snapshot(monitor.iteration) {
            let x = st.combine(s);
            monitor.snapshot(monitor.iteration, &x);
        }
        let (i, visits) = geom.tree.sample_counted(rng);
        let g = st.partial_at(obj, i, s);
        if !g.is_finite() {
            return Err(Error::OracleFailure { coord: i, point: st.combine(s).iter().map(|v| v.as_f64()).collect() });
        }
        monitor.counters.coordinate += 1;
        let dz = alpha * g / geom.probability(i) / geom.norm.weight(i);
        let gl = g / geom.lip(i);
        let touched = st.apply(obj, i, s, dz, gl);
        if !(st.u[i].is_finite() && st.v[i].is_finite()) {
            return Err(monitor.divergence());
        }
        monitor.touches += (touched + visits) as u64;
        log.push(Contribution { coord: i, dz, gl });
        st.scale = s;
        if since_base >= period {
            rebase(obj, &mut st, s);
            since_base = 0;
            monitor.touches += rebase_cost(obj);
        }
        if monitor.tracer.wants(monitor.iteration) {
            let y = st.y();
            monitor.log(obj, &geom.norm, &y, &st.u);
        }
    }
    let xbar = assemble_average(x0, &log, tau, k)?;
    Ok(LazyOutcome { xbar, state: st, log })
}

/// Folds `s` into `v` and rebuilds both caches from scratch.
fn rebase<T: Scalar>(obj: &SeparableObjective<T>, st: &mut LazyState<T>, s: T) {
    for v in st.v.iter_mut() {
        *v *= s;
    }
    st.au = obj.matrix.matvec(&st.u);
    st.av = obj.matrix.matvec(&st.v);
    st.scale = T::one();
    st.rebases += 1;
}

/// `x̄_K = (1/K) Σ_{k=1}^{K} x_k` in closed form from the step log:
///
/// `x̄_K = x_0 + (1/K) Σ_k [c_k ((1−τ)/τ)(1 − (1−τ)^{K−k}) − dz_k (K − k)] e_{i_k}`
///
/// with `c_k = dz_k − g_k/L_{i_k}`.
pub fn assemble_average<T: Scalar>(x0: &[T], log: &[Contribution<T>], tau: T, k: u64) -> Result<Vec<T>> {
    if log.len() as u64 != k || k == 0 {
        return Err(Error::Contract(format!("step log holds {} entries, expected {k}", log.len())));
    }
    let q = T::one() - tau;
    let ratio = q / tau;
    let kk = T::lit(k as f64);
    let mut acc = vec![T::zero(); x0.len()];
    for (step, c) in log.iter().enumerate() {
        let rest = k - (step as u64 + 1);
        let geo = ratio * (T::one() - q.powi(rest.min(i32::MAX as u64) as i32));
        acc[c.coord] += (c.dz - c.gl) * geo - c.dz * T::lit(rest as f64);
    }
    Ok(x0.iter().zip(&acc).map(|(&x, &a)| x + a / kk).collect())
}

/// `Π_{j=1}^{k}(1 − 2/(j + 2)) = 2/((k + 1)(k + 2))`.
#[inline]
pub fn star_product<T: Scalar>(k: u64) -> T {
    let k = k as f64;
    T::lit(2.0 / ((k + 1.0) * (k + 2.0)))
}

#[derive(Clone, Debug)]
pub struct StarLazyOutcome<T> {
    pub y: Vec<T>,
    pub state: LazyState<T>,
}

/// Lazy counterpart of [`acrcd_star`](crate::coupling::acrcd_star) with the
/// simple schedule: `z = w`, `y − z = Q v`, `x_{k+1} = w_k + Q_{k+1} v_k`,
/// `Q_{k+1} = 2/((k+1)(k+2))`. `y_N` is emitted by a final gradient step at `x_N`.
pub fn acrcd_star_prime_run<T: Scalar>(
    obj: &SeparableObjective<T>,
    geom: &CoordinateGeometry<T>,
    x0: &[T],
    n_iters: u64,
    schedule: &mut Schedule<T>,
    rng: &mut Stream,
    monitor: &mut Monitor<T>,
) -> Result<StarLazyOutcome<T>> {
    if schedule.kind != ScheduleKind::Simple || schedule.k() != 0 {
        return Err(Error::Config("the lazy growing-step engine needs a fresh simple schedule".into()));
    }
    if n_iters == 0 {
        return Err(Error::Contract("the method needs N ≥ 1".into()));
    }
    let mut st = LazyState::start(obj, x0);
    let mut y = Vec::new();
    for k in 0..n_iters {
        let (_tau, alpha) = schedule.advance();
        let s = star_product::<T>(k);
        monitor.iteration += 1;
        let last = k + 1 == n_iters;
        let x = if last || monitor.wants_snapshot(monitor.iteration) { Some(st.combine(s)) } else { None };
        if let Some(x) = &x {
            if monitor.wants_snapshot(monitor.iteration) {
                monitor.snapshot(monitor.iteration, x);
            }
        }
        let (i, visits) = geom.tree.sample_counted(rng);
        let g = st.partial_at(obj, i, s);
        if !g.is_finite() {
            return Err(Error::OracleFailure { coord: i, point: st.combine(s).iter().map(|v| v.as_f64()).collect() });
        }
        monitor.counters.coordinate += 1;
        let dz = alpha * g / geom.probability(i) / geom.norm.weight(i);
        let gl = g / geom.lip(i);
        let touched = st.apply(obj, i, s, dz, gl);
        if !(st.u[i].is_finite() && st.v[i].is_finite()) {
            return Err(monitor.divergence());
        }
        monitor.touches += (touched + visits) as u64;
        st.scale = s;
        if let Some(mut x) = x.filter(|_| last) {
            x[i] -= gl;
            y = x;
        }
        if monitor.tracer.wants(monitor.iteration) {
            let yk = st.y();
            monitor.log(obj, &geom.norm, &yk, &st.u);
        }
    }
    Ok(StarLazyOutcome { y, state: st })
}
