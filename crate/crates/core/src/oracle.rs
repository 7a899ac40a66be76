//! Coordinate oracles, the weighted Euclidean geometry, and the two primitive
//! steps every coupled method is assembled from.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::rng::mix64;
use crate::scalar::{to_f64_vec, Scalar};

/// A smooth objective over `ℝⁿ` exposed through coordinate oracles.
pub trait CoordProblem<T: Scalar> {
    fn dim(&self) -> usize;

    fn value(&self, x: &[T]) -> T;

    /// `∂f(x)/∂x_i`.
    fn partial(&self, i: usize, x: &[T]) -> T;

    /// Coordinate Lipschitz constant `L_i > 0` of `∂f/∂x_i` along `e_i`.
    fn lip(&self, i: usize) -> T;

    fn full_gradient(&self, _x: &[T]) -> Option<Vec<T>> {
        None
    }

    fn minimizer_hint(&self) -> Option<&[T]> {
        None
    }

    fn fstar_hint(&self) -> Option<T> {
        None
    }

    /// `f(x) − f_*` when the optimum is known. Implementations may override
    /// this with a cancellation-free formula.
    fn gap(&self, x: &[T]) -> Option<T> {
        self.fstar_hint().map(|fs| self.value(x) - fs)
    }

    /// False when the `lip` values are only initial guesses, i.e. the true
    /// coordinate constants are unbounded and runs must backtrack.
    fn lipschitz_bounded(&self) -> bool {
        true
    }
}

impl<T: Scalar, P: CoordProblem<T> + ?Sized> CoordProblem<T> for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[T]) -> T {
        (**self).value(x)
    }
    fn partial(&self, i: usize, x: &[T]) -> T {
        (**self).partial(i, x)
    }
    fn lip(&self, i: usize) -> T {
        (**self).lip(i)
    }
    fn full_gradient(&self, x: &[T]) -> Option<Vec<T>> {
        (**self).full_gradient(x)
    }
    fn minimizer_hint(&self) -> Option<&[T]> {
        (**self).minimizer_hint()
    }
    fn fstar_hint(&self) -> Option<T> {
        (**self).fstar_hint()
    }
    fn gap(&self, x: &[T]) -> Option<T> {
        (**self).gap(x)
    }
    fn lipschitz_bounded(&self) -> bool {
        (**self).lipschitz_bounded()
    }
}

/// Diagonal norm `‖x‖² = Σ L_i^{1−2β} x_i²` paired with sampling `p_i ∝ L_i^β`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedNorm<T> {
    beta: T,
    weights: Vec<T>,
}

impl<T: Scalar> WeightedNorm<T> {
    pub fn from_lipschitz(lips: &[T], beta: T) -> Result<Self> {
        if !(beta >= T::zero() && beta <= T::one()) {
            return Err(Error::Config(format!("beta must lie in [0, 1], got {beta}")));
        }
        if let Some((i, l)) = lips.iter().enumerate().find(|(_, l)| !(**l > T::zero() && l.is_finite()))
        {
            return Err(Error::Config(format!("L_{i} = {l} is not a positive finite number")));
        }
        let weights = lips.iter().map(|&l| Self::weight_for(l, beta)).collect();
        Ok(Self { beta, weights })
    }

    #[inline]
    pub(crate) fn weight_for(lip: T, beta: T) -> T {
        if beta == T::zero() {
            lip
        } else {
            lip.powf(T::one() - (beta + beta))
        }
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, i: usize) -> T {
        self.weights[i]
    }

    /// Re-derives the weight of coordinate `i` from a new Lipschitz estimate.
    pub fn set_lipschitz(&mut self, i: usize, lip: T) {
        self.weights[i] = Self::weight_for(lip, self.beta);
    }

    pub fn norm_sq(&self, x: &[T]) -> T {
        self.weights.iter().zip(x).map(|(&w, &v)| w * v * v).sum()
    }

    pub fn dual_norm_sq(&self, g: &[T]) -> T {
        self.weights.iter().zip(g).map(|(&w, &v)| v * v / w).sum()
    }

    /// Dual norm of a one-hot vector with value `g` at coordinate `i`.
    #[inline]
    pub fn dual_norm_sq_onehot(&self, i: usize, g: T) -> T {
        g * g / self.weights[i]
    }

    /// Bregman distance of the prox function `½‖·‖²`: `V_x(y) = ½‖y − x‖²`.
    pub fn bregman(&self, x: &[T], y: &[T]) -> T {
        let half = T::lit(0.5);
        half * self
            .weights
            .iter()
            .zip(x.iter().zip(y))
            .map(|(&w, (&a, &b))| w * (a - b) * (a - b))
            .sum::<T>()
    }
}

#[inline]
pub(crate) fn checked_partial<T: Scalar, P: CoordProblem<T> + ?Sized>(
    problem: &P,
    i: usize,
    x: &[T],
) -> Result<T> {
    let g = problem.partial(i, x);
    if g.is_finite() {
        Ok(g)
    } else {
        Err(Error::OracleFailure { coord: i, point: to_f64_vec(x) })
    }
}

/// Coordinate gradient step `x − (1/L_i) ∇_i f(x)`.
pub fn grad_step<T: Scalar, P: CoordProblem<T> + ?Sized>(
    problem: &P,
    x: &[T],
    i: usize,
) -> Result<Vec<T>> {
    grad_step_with(problem, x, i, problem.lip(i))
}

/// [`grad_step`] with an explicit step constant in place of `L_i`.
pub fn grad_step_with<T: Scalar, P: CoordProblem<T> + ?Sized>(
    problem: &P,
    x: &[T],
    i: usize,
    lip: T,
) -> Result<Vec<T>> {
    if i >= x.len() {
        return Err(Error::Contract(format!("coordinate {i} out of range for dimension {}", x.len())));
    }
    if !(lip > T::zero()) {
        return Err(Error::Contract(format!("step constant for coordinate {i} must be positive")));
    }
    let g = checked_partial(problem, i, x)?;
    let mut y = x.to_vec();
    y[i] -= g / lip;
    Ok(y)
}

/// Mirror step under [`WeightedNorm`]: `z_i − ξ_i / w_i` at the single
/// nonzero of `xi`, other components copied.
///
/// `xi` is given as `(index, value)` pairs; explicit zeros are ignored.
pub fn mirr_step<T: Scalar>(norm: &WeightedNorm<T>, z: &[T], xi: &[(usize, T)]) -> Result<Vec<T>> {
    let mut nonzero = xi.iter().filter(|(_, v)| *v != T::zero());
    let first = nonzero.next().copied();
    if nonzero.next().is_some() {
        return Err(Error::Contract("mirror step expects at most one nonzero component".into()));
    }
    let mut out = z.to_vec();
    if let Some((i, v)) = first {
        if i >= z.len() {
            return Err(Error::Contract(format!("coordinate {i} out of range for dimension {}", z.len())));
        }
        out[i] -= v / norm.weight(i);
    }
    Ok(out)
}

/// Largest relative mismatch between central differences of `value` and
/// `partial` over all coordinates:
/// `max_i |(f(x+he_i) − f(x−he_i))/2h − ∂_i f(x)| / (1 + |∂_i f(x)|)`.
pub fn fd_check<T: Scalar, P: CoordProblem<T> + ?Sized>(problem: &P, x: &[T], h: T) -> T {
    assert!(h > T::zero(), "finite-difference step must be positive");
    let mut probe = x.to_vec();
    let two_h = h + h;
    let mut worst = T::zero();
    for i in 0..problem.dim() {
        let xi = probe[i];
        probe[i] = xi + h;
        let fp = problem.value(&probe);
        probe[i] = xi - h;
        let fm = problem.value(&probe);
        probe[i] = xi;
        let exact = problem.partial(i, x);
        let err = ((fp - fm) / two_h - exact).abs() / (T::one() + exact.abs());
        if err > worst || err.is_nan() {
            worst = err;
        }
    }
    worst
}

/// Default finite-difference step for [`fd_check`].
pub const FD_STEP: f64 = 1e-5;

/// A coordinate oracle whose partial derivatives carry bounded noise.
///
/// Each call returns `∂_i f(x) + u·δ` with `u ∈ {−1, +1}` drawn from a
/// SplitMix hash of `(seed, i, call index)`, so `|error| ≤ δ` (constant 1).
/// The call index is a per-wrapper counter, so a wrapper should be owned by
/// one sequential run. Values are passed through unchanged.
#[derive(Debug)]
pub struct InexactOracle<P> {
    inner: P,
    delta: f64,
    seed: u64,
    calls: AtomicU64,
}

/// Error bound multiplier: `|perturbed − exact| ≤ INEXACT_BOUND · δ`.
pub const INEXACT_BOUND: f64 = 1.0;

pub fn wrap_inexact<P>(inner: P, delta: f64, seed: u64) -> InexactOracle<P> {
    assert!(delta >= 0.0, "noise level must be non-negative");
    InexactOracle { inner, delta, seed, calls: AtomicU64::new(0) }
}

impl<P> InexactOracle<P> {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    fn sign(&self, i: usize) -> f64 {
        let call = self.calls.fetch_add(1, Ordering::Relaxed);
        let h = mix64(self.seed ^ mix64(i as u64 ^ mix64(call)));
        if h & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl<T: Scalar, P: CoordProblem<T>> CoordProblem<T> for InexactOracle<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[T]) -> T {
        self.inner.value(x)
    }
    fn partial(&self, i: usize, x: &[T]) -> T {
        let exact = self.inner.partial(i, x);
        if self.delta == 0.0 {
            return exact;
        }
        exact + T::lit(self.sign(i) * self.delta)
    }
    fn lip(&self, i: usize) -> T {
        self.inner.lip(i)
    }
    fn minimizer_hint(&self) -> Option<&[T]> {
        self.inner.minimizer_hint()
    }
    fn fstar_hint(&self) -> Option<T> {
        self.inner.fstar_hint()
    }
    fn gap(&self, x: &[T]) -> Option<T> {
        self.inner.gap(x)
    }
    fn lipschitz_bounded(&self) -> bool {
        self.inner.lipschitz_bounded()
    }
}
