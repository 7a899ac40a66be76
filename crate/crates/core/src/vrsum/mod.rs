//! Variance-reduced gradient method for finite sums `f = (1/m) Σ_k f_k`.
//!
//! Each epoch fixes a snapshot `y`, computes `∇f(y)` once, and runs inner
//! gradient steps with the estimator `∇f_ξ(x) − ∇f_ξ(y) + ∇f(y)`, whose
//! variance vanishes as both `x` and `y` approach the minimizer.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::scalar::{all_finite, dot, Scalar};
use crate::trace::TraceRecord;

pub trait FiniteSumProblem<T: Scalar> {
    fn dim(&self) -> usize;
    /// Number of components `m`.
    fn components(&self) -> usize;
    fn component_value(&self, k: usize, x: &[T]) -> T;
    /// Writes `∇f_k(x)` into `out`.
    fn component_grad(&self, k: usize, x: &[T], out: &mut [T]);
    /// Common smoothness constant `L` of the components.
    fn smoothness(&self) -> T;
    /// Strong convexity `μ` of the average.
    fn strong_convexity(&self) -> T;

    fn value(&self, x: &[T]) -> T {
        let m = self.components();
        (0..m).map(|k| self.component_value(k, x)).sum::<T>() / T::from_usize_lossy(m)
    }

    fn full_gradient(&self, x: &[T]) -> Vec<T> {
        let m = self.components();
        let mut g = vec![T::zero(); self.dim()];
        let mut buf = vec![T::zero(); self.dim()];
        for k in 0..m {
            self.component_grad(k, x, &mut buf);
            for (a, &b) in g.iter_mut().zip(&buf) {
                *a += b;
            }
        }
        let mm = T::from_usize_lossy(m);
        g.iter_mut().for_each(|v| *v /= mm);
        g
    }

    fn minimizer_hint(&self) -> Option<&[T]> {
        None
    }

    fn fstar_hint(&self) -> Option<T> {
        None
    }

    /// The variance bound is established only when `∇f(x_*) = 0`.
    fn is_unconstrained(&self) -> bool {
        true
    }
}

/// `f_k(x) = ½(a_kᵀx − b_k)² + λ/2 ‖x‖²`.
#[derive(Clone, Debug)]
pub struct RidgeFiniteSum<T> {
    m: usize,
    n: usize,
    a: Vec<T>,
    b: Vec<T>,
    lambda: T,
    l: T,
    mu: T,
    xstar: Vec<T>,
    fstar: T,
}

impl<T: Scalar> RidgeFiniteSum<T> {
    /// `a` is row-major `m × n`.
    pub fn new(a: Vec<T>, b: Vec<T>, m: usize, n: usize, lambda: f64) -> Result<Self> {
        if m == 0 || n == 0 || a.len() != m * n || b.len() != m || lambda < 0.0 {
            return Err(Error::Config("ridge sum needs an m×n matrix, m targets and λ ≥ 0".into()));
        }
        let ad = DMatrix::from_fn(m, n, |r, c| a[r * n + c].as_f64());
        let bd = DVector::from_fn(m, |r, _| b[r].as_f64());
        let h = ad.transpose() * &ad / m as f64 + DMatrix::identity(n, n) * lambda;
        let mu = SymmetricEigen::new(h.clone()).eigenvalues.min();
        if !(mu > 0.0) {
            return Err(Error::Config("ridge objective is not strongly convex".into()));
        }
        let rhs = ad.transpose() * bd / m as f64;
        let xs = h.cholesky().ok_or_else(|| Error::Config("ridge Hessian is singular".into()))?.solve(&rhs);
        let l = (0..m).map(|r| (0..n).map(|c| a[r * n + c].as_f64().powi(2)).sum::<f64>()).fold(0.0, f64::max) + lambda;
        let mut p = Self {
            m,
            n,
            a,
            b,
            lambda: T::lit(lambda),
            l: T::lit(l),
            mu: T::lit(mu),
            xstar: xs.iter().map(|&v| T::lit(v)).collect(),
            fstar: T::zero(),
        };
        p.fstar = p.value(&p.xstar.clone());
        Ok(p)
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Row-major `A` and targets `b`.
    pub fn data(&self) -> (&[T], &[T]) {
        (&self.a, &self.b)
    }

    /// `f(x) − f_*` computed as `½(x − x_*)ᵀH(x − x_*)`, free of cancellation.
    pub fn gap(&self, x: &[T]) -> T {
        let d: Vec<T> = x.iter().zip(&self.xstar).map(|(&a, &b)| a - b).collect();
        let mut s = T::zero();
        for r in 0..self.m {
            let t = dot(&self.a[r * self.n..(r + 1) * self.n], &d);
            s += t * t;
        }
        T::lit(0.5) * (s / T::from_usize_lossy(self.m) + self.lambda * dot(&d, &d))
    }
}

fn gaussian_rows(m: usize, n: usize, rng: &mut Stream) -> Vec<f64> {
    let scale = 1.0 / (n as f64).sqrt();
    (0..m * n).map(|_| scale * rng.normal()).collect()
}

/// Ridge regression with Gaussian rows `a_k ~ N(0, I/n)` and noisy targets.
pub fn make_ridge<T: Scalar>(m: usize, n: usize, lambda: f64, seed: u64) -> Result<RidgeFiniteSum<T>> {
    let mut rng = Stream::new(seed);
    let a = gaussian_rows(m, n, &mut rng);
    let w: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let b: Vec<T> = (0..m)
        .map(|r| T::lit((0..n).map(|c| a[r * n + c] * w[c]).sum::<f64>() + 0.1 * rng.normal()))
        .collect();
    RidgeFiniteSum::new(a.into_iter().map(T::lit).collect(), b, m, n, lambda)
}

/// [`make_ridge`] with `λ` chosen so that `L/μ = kappa`.
pub fn make_ridge_conditioned<T: Scalar>(m: usize, n: usize, kappa: f64, seed: u64) -> Result<RidgeFiniteSum<T>> {
    let probe = make_ridge::<T>(m, n, 0.0, seed).or_else(|_| make_ridge::<T>(m, n, 1e-12, seed))?;
    let la = probe.l.as_f64() - probe.lambda.as_f64();
    let lo = probe.mu.as_f64() - probe.lambda.as_f64();
    // (la + λ)/(lo + λ) = κ
    let lambda = (la - kappa * lo) / (kappa - 1.0);
    if !(kappa > 1.0 && lambda >= 0.0) {
        return Err(Error::Config(format!("condition number {kappa} exceeds the unregularized {:.3}; λ can only lower it", la / lo)));
    }
    make_ridge(m, n, lambda, seed)
}

impl<T: Scalar> FiniteSumProblem<T> for RidgeFiniteSum<T> {
    fn dim(&self) -> usize {
        self.n
    }
    fn components(&self) -> usize {
        self.m
    }
    fn component_value(&self, k: usize, x: &[T]) -> T {
        let r = dot(&self.a[k * self.n..(k + 1) * self.n], x) - self.b[k];
        T::lit(0.5) * (r * r + self.lambda * dot(x, x))
    }
    fn component_grad(&self, k: usize, x: &[T], out: &mut [T]) {
        let row = &self.a[k * self.n..(k + 1) * self.n];
        let r = dot(row, x) - self.b[k];
        for ((o, &a), &xi) in out.iter_mut().zip(row).zip(x) {
            *o = r * a + self.lambda * xi;
        }
    }
    fn smoothness(&self) -> T {
        self.l
    }
    fn strong_convexity(&self) -> T {
        self.mu
    }
    fn minimizer_hint(&self) -> Option<&[T]> {
        Some(&self.xstar)
    }
    fn fstar_hint(&self) -> Option<T> {
        Some(self.fstar)
    }
}

/// Snapshot data of one epoch.
#[derive(Clone, Debug)]
pub struct EpochState<T> {
    pub snapshot: Vec<T>,
    pub snapshot_grad: Vec<T>,
    pub x: Vec<T>,
    pub epoch: u32,
    /// Component-gradient evaluations booked by this epoch.
    pub evaluations: u64,
    buf: Vec<T>,
}

impl<T: Scalar> EpochState<T> {
    /// Computes `∇f(y)` with `m` component evaluations.
    pub fn new<P: FiniteSumProblem<T> + ?Sized>(problem: &P, y: &[T], epoch: u32) -> Self {
        Self {
            snapshot: y.to_vec(),
            snapshot_grad: problem.full_gradient(y),
            x: y.to_vec(),
            epoch,
            evaluations: problem.components() as u64,
            buf: vec![T::zero(); y.len()],
        }
    }
}

/// `∇f_ξ(x) − ∇f_ξ(y) + ∇f(y)`, two component evaluations.
pub fn vr_estimator<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    state: &mut EpochState<T>,
    x: &[T],
    xi: usize,
) -> Vec<T> {
    let mut out = vec![T::zero(); x.len()];
    problem.component_grad(xi, x, &mut out);
    problem.component_grad(xi, &state.snapshot, &mut state.buf);
    for ((o, &gy), &full) in out.iter_mut().zip(&state.buf).zip(&state.snapshot_grad) {
        *o = *o - gy + full;
    }
    state.evaluations += 2;
    out
}

/// Inner steps `x ← x − η · mean_{j ≤ r} estimator(x, ξ_j)` from the snapshot.
pub fn run_inner<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    state: &mut EpochState<T>,
    n_inner: u64,
    step: T,
    batch: usize,
    rng: &mut Stream,
) -> Result<()> {
    if !(step > T::zero()) || batch == 0 {
        return Err(Error::Config("inner loop needs a positive step and batch ≥ 1".into()));
    }
    let m = problem.components();
    let inv_r = T::one() / T::from_usize_lossy(batch);
    let mut dir = vec![T::zero(); state.x.len()];
    for t in 0..n_inner {
        dir.iter_mut().for_each(|d| *d = T::zero());
        let x = state.x.clone();
        for _ in 0..batch {
            let xi = rng.index(m);
            let e = vr_estimator(problem, state, &x, xi);
            for (d, v) in dir.iter_mut().zip(&e) {
                *d += *v;
            }
        }
        for (xv, &d) in state.x.iter_mut().zip(&dir) {
            *xv -= step * inv_r * d;
        }
        if !all_finite(&state.x) {
            return Err(Error::Divergence { iteration: t, trace: Vec::new() });
        }
    }
    Ok(())
}

/// One epoch from snapshot `y`; returns `x_N` and the epoch state.
/// Books `m + 2 r N` component evaluations.
pub fn vr_epoch<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    y: &[T],
    n_inner: u64,
    step: T,
    batch: usize,
    rng: &mut Stream,
) -> Result<EpochState<T>> {
    let mut st = EpochState::new(problem, y, 0);
    run_inner(problem, &mut st, n_inner, step, batch, rng)?;
    Ok(st)
}

/// How [`variance_probe`] averages over `ξ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeMode {
    /// Every component once (exact expectation).
    Exhaustive,
    Sampled(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceProbe {
    /// `E_ξ ‖estimator − ∇f(x)‖²`.
    pub d: f64,
    /// `L (f(y) − f_*) + L (f(x) − f_*)` when `f_*` is known.
    pub reference: Option<f64>,
}

impl VarianceProbe {
    pub fn ratio(&self) -> Option<f64> {
        self.reference.map(|r| if r > 0.0 { self.d / r } else if self.d == 0.0 { 0.0 } else { f64::INFINITY })
    }
}

/// Estimates the estimator variance at `x` for the snapshot in `state`.
/// The probe's evaluations are not booked on `state`.
pub fn variance_probe<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    state: &EpochState<T>,
    x: &[T],
    mode: ProbeMode,
    rng: &mut Stream,
) -> Result<VarianceProbe> {
    if !problem.is_unconstrained() {
        return Err(Error::Contract("the variance bound needs ∇f(x_*) = 0".into()));
    }
    let m = problem.components();
    let full = problem.full_gradient(x);
    let mut scratch = state.clone();
    let mut one = |xi: usize| -> f64 {
        let e = vr_estimator(problem, &mut scratch, x, xi);
        e.iter().zip(&full).map(|(&a, &b)| (a - b).as_f64().powi(2)).sum()
    };
    let d = match mode {
        ProbeMode::Exhaustive => (0..m).map(&mut one).sum::<f64>() / m as f64,
        ProbeMode::Sampled(s) => {
            if s == 0 {
                return Err(Error::Contract("at least one probe sample is required".into()));
            }
            (0..s).map(|_| one(rng.index(m))).sum::<f64>() / s as f64
        }
    };
    let reference = problem.fstar_hint().map(|fs| {
        let l = problem.smoothness().as_f64();
        let dy = (problem.value(&state.snapshot) - fs).as_f64().max(0.0);
        let dx = (problem.value(x) - fs).as_f64().max(0.0);
        l * (dy + dx)
    });
    Ok(VarianceProbe { d, reference })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VrConfig {
    /// Inner step; default `1/(10L)`.
    #[serde(default)]
    pub step: Option<f64>,
    /// Inner iterations; default `⌈4L/μ⌉`.
    #[serde(default)]
    pub n_inner: Option<u64>,
    #[serde(default = "one")]
    pub batch: usize,
    #[serde(default = "default_max_epochs")]
    pub max_epochs: u32,
    /// 0 means unlimited.
    #[serde(default)]
    pub max_evaluations: u64,
}

fn one() -> usize {
    1
}

fn default_max_epochs() -> u32 {
    1000
}

impl Default for VrConfig {
    fn default() -> Self {
        Self { step: None, n_inner: None, batch: 1, max_epochs: default_max_epochs(), max_evaluations: 0 }
    }
}

impl VrConfig {
    pub fn resolve<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(&self, problem: &P) -> (f64, u64) {
        let l = problem.smoothness().as_f64();
        let mu = problem.strong_convexity().as_f64();
        let step = self.step.unwrap_or(1.0 / (10.0 * l));
        let n = self.n_inner.unwrap_or((4.0 * l / mu).ceil() as u64);
        (step, n)
    }
}

#[derive(Clone, Debug)]
pub struct VrOutcome<T> {
    pub x: Vec<T>,
    pub epochs: u32,
    pub evaluations: u64,
    /// Gap proxy `‖∇f(y^s)‖²/(2μ)` at every snapshot, including the last.
    pub gap_estimates: Vec<f64>,
    pub budget_exhausted: bool,
    pub trace: Vec<TraceRecord>,
}

/// Epochs from `x0` until `‖∇f(y)‖²/(2μ) ≤ ε`.
pub fn vr_driver<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x0: &[T],
    epsilon: f64,
    rng: &mut Stream,
    config: &VrConfig,
) -> Result<VrOutcome<T>> {
    let mu = problem.strong_convexity().as_f64();
    if !(mu > 0.0 && epsilon > 0.0) {
        return Err(Error::Config("driver needs μ > 0 and ε > 0".into()));
    }
    let (step, n_inner) = config.resolve(problem);
    let mut y = x0.to_vec();
    let mut evaluations = 0;
    let mut gaps = Vec::new();
    let mut trace = Vec::new();
    let mut epoch = 0;
    loop {
        let mut st = EpochState::new(problem, &y, epoch);
        let proxy = dot(&st.snapshot_grad, &st.snapshot_grad).as_f64() / (2.0 * mu);
        gaps.push(proxy);
        evaluations += st.evaluations;
        let gap = problem.fstar_hint().map(|fs| (problem.value(&y) - fs).as_f64());
        trace.push(TraceRecord {
            run_id: 0,
            epoch,
            iteration: epoch as u64 * n_inner,
            coordinate_calls: evaluations,
            value_calls: 0,
            objective: gap.unwrap_or(proxy),
            objective_is_gap: gap.is_some(),
            distance_sq: None,
            elapsed_ns: 0,
        });
        if proxy <= epsilon {
            return Ok(VrOutcome { x: y, epochs: epoch, evaluations, gap_estimates: gaps, budget_exhausted: false, trace });
        }
        let cost = 2 * config.batch as u64 * n_inner;
        if epoch >= config.max_epochs
            || (config.max_evaluations > 0 && evaluations + cost > config.max_evaluations)
        {
            return Ok(VrOutcome { x: y, epochs: epoch, evaluations, gap_estimates: gaps, budget_exhausted: true, trace });
        }
        run_inner(problem, &mut st, n_inner, T::lit(step), config.batch, rng)?;
        evaluations += cost;
        y = st.x;
        epoch += 1;
    }
}
