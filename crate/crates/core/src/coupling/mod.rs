//! Accelerated coordinate methods built by coupling a coordinate gradient
//! step with a coordinate mirror step.
//!
//! Every method keeps three sequences: `y` (gradient steps), `z` (mirror
//! steps) and the coupling point `x = τz + (1 − τ)y` where the partial
//! derivative is evaluated. Under weighted sampling `p_i ∝ L_i^β` the mirror
//! input is `α ∇_i f(x) / p_i` in the norm with weights `L_i^{1−2β}`, and `n`
//! in every formula becomes `n_eff = Σ L_i^β`.

mod acrcd;
mod adaptive;
mod monitor;
mod star;

pub use acrcd::{acrcd_epoch, acrcd_epoch_state, acrcd_restart, markov_amplify, Amplified, RestartOutcome};
pub use adaptive::{adapt_lipschitz, LIP_CAP_FACTOR, LIP_FLOOR_FACTOR};
pub use monitor::Monitor;
pub use star::{acrcd_star, acrcd_star_strongly_convex, sc_restart_length, star_iterations, StarOptions, StrongOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{CoordProblem, WeightedNorm};
use crate::sampler::SamplingTree;
use crate::scalar::Scalar;

/// Lipschitz estimates together with the norm and the sampling tree they induce.
#[derive(Clone, Debug)]
pub struct CoordinateGeometry<T> {
    lips: Vec<T>,
    lips_init: Vec<T>,
    pub norm: WeightedNorm<T>,
    pub tree: SamplingTree<T>,
}

impl<T: Scalar> CoordinateGeometry<T> {
    pub fn new<P: CoordProblem<T> + ?Sized>(problem: &P, beta: T) -> Result<Self> {
        let lips: Vec<T> = (0..problem.dim()).map(|i| problem.lip(i)).collect();
        Self::from_lipschitz(lips, beta)
    }

    pub fn from_lipschitz(lips: Vec<T>, beta: T) -> Result<Self> {
        let norm = WeightedNorm::from_lipschitz(&lips, beta)?;
        let tree = SamplingTree::from_lipschitz(&lips, beta)?;
        Ok(Self { lips_init: lips.clone(), lips, norm, tree })
    }

    pub fn dim(&self) -> usize {
        self.lips.len()
    }

    pub fn beta(&self) -> T {
        self.norm.beta()
    }

    /// `n_eff = Σ L_i^β` (`n` for uniform sampling).
    #[inline]
    pub fn n_eff(&self) -> T {
        self.tree.total()
    }

    #[inline]
    pub fn lip(&self, i: usize) -> T {
        self.lips[i]
    }

    pub fn lips(&self) -> &[T] {
        &self.lips
    }

    #[inline]
    pub fn lip_init(&self, i: usize) -> T {
        self.lips_init[i]
    }

    #[inline]
    pub fn probability(&self, i: usize) -> T {
        self.tree.probability(i)
    }

    /// Replaces `L_i`, refreshing the norm weight and the sampling weight.
    pub fn set_lip(&mut self, i: usize, lip: T) -> Result<()> {
        let w = if self.beta() == T::zero() { T::one() } else { lip.powf(self.beta()) };
        self.tree.update_weight(i, w)?;
        self.norm.set_lipschitz(i, lip);
        self.lips[i] = lip;
        Ok(())
    }
}

/// Step-size policy of the coupled method.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ScheduleKind {
    Constant { alpha: f64, tau: f64 },
    /// `α_{k+1} = (k + 2)/(2 n_eff²)`, `τ_k = 2/(k + 2)`.
    Simple,
    /// `α_1 = 1/n_eff²`, `α_{k+1}` the positive root of
    /// `α² n_eff² − α = α_k² n_eff²`, `τ_k = 1/(α_{k+1} n_eff²)`. Experimental.
    Recurrence,
}

/// Iterator over `(τ_k, α_{k+1})`, `k = 0, 1, …`.
#[derive(Clone, Debug)]
pub struct Schedule<T> {
    pub kind: ScheduleKind,
    n_eff: T,
    k: u64,
    alpha: T,
}

impl<T: Scalar> Schedule<T> {
    pub fn new(kind: ScheduleKind, n_eff: T) -> Result<Self> {
        if !(n_eff > T::zero()) {
            return Err(Error::Config("effective dimension must be positive".into()));
        }
        if let ScheduleKind::Constant { alpha, tau } = kind {
            if !(alpha > 0.0 && tau > 0.0 && tau <= 1.0) {
                return Err(Error::Config(format!("constant schedule needs α > 0, τ ∈ (0, 1], got {alpha}, {tau}")));
            }
        }
        Ok(Self { kind, n_eff, k: 0, alpha: T::zero() })
    }

    pub fn n_eff(&self) -> T {
        self.n_eff
    }

    /// Index `k` of the next pair to be produced.
    pub fn k(&self) -> u64 {
        self.k
    }

    /// `(τ_k, α_{k+1})` for the current `k`, then advances `k`.
    pub fn advance(&mut self) -> (T, T) {
        let n2 = self.n_eff * self.n_eff;
        let kp2 = T::lit((self.k + 2) as f64);
        let two = T::lit(2.0);
        let out = match self.kind {
            ScheduleKind::Constant { alpha, tau } => (T::lit(tau), T::lit(alpha)),
            ScheduleKind::Simple => (two / kp2, kp2 / (two * n2)),
            ScheduleKind::Recurrence => {
                let a = if self.k == 0 {
                    T::one() / n2
                } else {
                    let prev = self.alpha * self.alpha * n2;
                    (T::one() + (T::one() + T::lit(4.0) * n2 * prev).sqrt()) / (two * n2)
                };
                (T::one() / (a * n2), a)
            }
        };
        self.alpha = out.1;
        self.k += 1;
        out
    }
}

/// Running `Σ ω_k p_k` and `Σ ω_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedAverage<T> {
    pub sum: Vec<T>,
    pub weight: T,
    pub count: u64,
}

impl<T: Scalar> WeightedAverage<T> {
    pub fn new(dim: usize) -> Self {
        Self { sum: vec![T::zero(); dim], weight: T::zero(), count: 0 }
    }

    pub fn add(&mut self, omega: T, payload: &[T]) {
        if self.sum.len() != payload.len() {
            self.sum.resize(payload.len(), T::zero());
        }
        for (s, &p) in self.sum.iter_mut().zip(payload) {
            *s += omega * p;
        }
        self.weight += omega;
        self.count += 1;
    }

    pub fn mean(&self) -> Result<Vec<T>> {
        if self.count == 0 || !(self.weight > T::zero()) {
            return Err(Error::Contract("empty accumulator".into()));
        }
        Ok(self.sum.iter().map(|&s| s / self.weight).collect())
    }
}

/// The `(x, y, z)` triple of a coupled run.
#[derive(Clone, Debug)]
pub struct CouplingState<T> {
    /// Last coupling point `x_k`.
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub z: Vec<T>,
    /// Iterations performed by this run.
    pub k: u64,
    /// `τ` and `α` of the last step.
    pub tau: T,
    pub alpha: T,
    /// Unit-weight average of the coupling points `x_1, …, x_k`.
    pub xbar: WeightedAverage<T>,
    /// `Σ α_{k+1} · payload(x_{k+1})`, when a payload map is attached.
    pub recovery: Option<WeightedAverage<T>>,
}

impl<T: Scalar> CouplingState<T> {
    pub fn start(x0: &[T]) -> Self {
        Self {
            x: x0.to_vec(),
            y: x0.to_vec(),
            z: x0.to_vec(),
            k: 0,
            tau: T::one(),
            alpha: T::zero(),
            xbar: WeightedAverage::new(x0.len()),
            recovery: None,
        }
    }

    /// `x̄_k`; the start point when no step was taken.
    pub fn average(&self) -> Vec<T> {
        self.xbar.mean().unwrap_or_else(|_| self.x.clone())
    }
}

/// Parameters of the restarted method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `Θ ≥ max{V_x(x_*) : f(x) − f_* ≤ d}` in the sampling norm.
    pub theta: f64,
    /// `f(x_0) − f_* ≤ d`.
    pub d: f64,
    pub epsilon: f64,
    pub sigma: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_epoch_constant")]
    pub epoch_constant: f64,
    #[serde(default)]
    pub adaptive_lipschitz: bool,
    /// Budget of coordinate-oracle calls; 0 means unlimited.
    #[serde(default)]
    pub max_iters: u64,
}

fn default_epoch_constant() -> f64 {
    9.0
}

impl RunConfig {
    pub fn new(theta: f64, d: f64, epsilon: f64, sigma: f64) -> Self {
        Self {
            theta,
            d,
            epsilon,
            sigma,
            beta: 0.0,
            seed: 0,
            epoch_constant: default_epoch_constant(),
            adaptive_lipschitz: false,
            max_iters: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.epsilon > 0.0
            && self.sigma > 0.0
            && self.sigma < 1.0
            && self.d > 0.0
            && self.theta > 0.0
            && (0.0..=1.0).contains(&self.beta)
            && self.epoch_constant > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid run configuration {self:?}")))
        }
    }

    /// `⌈log₂(d/ε)⌉`, at least 0.
    pub fn rounds(&self) -> u32 {
        (self.d / self.epsilon).log2().ceil().max(0.0) as u32
    }

    /// Replicas per round so that all rounds succeed with probability `1 − σ`:
    /// `⌈log₂(max(R, 1)/σ)⌉`.
    pub fn replicas(&self) -> usize {
        let r = self.rounds().max(1) as f64;
        ((r / self.sigma).log2().ceil() as usize).max(1)
    }
}

/// `α = √(Θ/d)/n_eff`, `τ = 1/(α n_eff² + 1)`, `K = ⌈c n_eff √(Θ/d)⌉`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochParams<T> {
    pub alpha: T,
    pub tau: T,
    pub k: u64,
}

impl<T: Scalar> EpochParams<T> {
    pub fn for_level(theta: f64, d: f64, n_eff: T, c: f64) -> Self {
        let n = n_eff.as_f64();
        let ratio = (theta / d).sqrt();
        let alpha = ratio / n;
        let tau = 1.0 / (alpha * n * n + 1.0);
        let k = (c * n * ratio).ceil().max(1.0) as u64;
        Self { alpha: T::lit(alpha), tau: T::lit(tau), k }
    }
}
