//! Entropy linear programming `min Σ x_i ln x_i` over the simplex with
//! `Ax = b`, solved through one of its two smooth duals.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::coupling::WeightedAverage;
use crate::error::{Error, Result};
use crate::oracle::CoordProblem;
use crate::rng::Stream;
use crate::scalar::{dot, norm2, Scalar};

/// `A ∈ ℝ^{m×n}` (row-major), `b = A x̂` for an interior simplex point `x̂`.
#[derive(Clone, Debug)]
pub struct EntropyLp<T> {
    pub n: usize,
    pub m: usize,
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub x_hat: Option<Vec<T>>,
}

/// Which dual functional to expose.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualKind {
    /// `φ₁(y) = ln Σ exp([Aᵀy]_i) − ⟨y, b⟩`, recovery by softmax.
    LogSumExp,
    /// `φ₂(y) = Σ exp([Aᵀy]_i − 1) − ⟨y, b⟩`, recovery `exp([Aᵀy]_i − 1)`.
    Exponential,
}

/// `Σ x ln x` with `0 ln 0 = 0`.
pub fn entropy<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|&v| if v > T::zero() { v * v.ln() } else { T::zero() }).sum()
}

/// Numerically stable `ln Σ exp(s_i)`.
pub fn log_sum_exp<T: Scalar>(s: &[T]) -> T {
    let mx = s.iter().copied().fold(T::neg_infinity(), T::max);
    if !mx.is_finite() {
        return mx;
    }
    mx + s.iter().map(|&v| (v - mx).exp()).sum::<T>().ln()
}

impl<T: Scalar> EntropyLp<T> {
    pub fn new(a: Vec<T>, b: Vec<T>, m: usize, n: usize) -> Result<Self> {
        if m == 0 || n < 2 || a.len() != m * n || b.len() != m {
            return Err(Error::Config(format!("entropy LP needs an {m}×{n} matrix and length-{m} rhs")));
        }
        Ok(Self { n, m, a, b, x_hat: None })
    }

    #[inline]
    pub fn entry(&self, r: usize, i: usize) -> T {
        self.a[r * self.n + i]
    }

    /// `Aᵀy`.
    pub fn at_y(&self, y: &[T]) -> Vec<T> {
        let mut s = vec![T::zero(); self.n];
        for r in 0..self.m {
            let yr = y[r];
            if yr == T::zero() {
                continue;
            }
            for (acc, &a) in s.iter_mut().zip(&self.a[r * self.n..(r + 1) * self.n]) {
                *acc += a * yr;
            }
        }
        s
    }

    pub fn ax(&self, x: &[T]) -> Vec<T> {
        self.a.chunks(self.n).map(|row| dot(row, x)).collect()
    }

    /// `‖Ax − b‖₂`.
    pub fn residual_norm(&self, x: &[T]) -> T {
        let r: Vec<T> = self.ax(x).into_iter().zip(&self.b).map(|(u, &v)| u - v).collect();
        norm2(&r)
    }

    /// Primal point recovered from a dual point.
    pub fn recover(&self, kind: DualKind, y: &[T]) -> Vec<T> {
        let s = self.at_y(y);
        match kind {
            DualKind::LogSumExp => {
                let mx = s.iter().copied().fold(T::neg_infinity(), T::max);
                let e: Vec<T> = s.iter().map(|&v| (v - mx).exp()).collect();
                let z: T = e.iter().copied().sum();
                e.into_iter().map(|v| v / z).collect()
            }
            DualKind::Exponential => s.into_iter().map(|v| (v - T::one()).exp()).collect(),
        }
    }

    /// `max_{r,i} A_ri²`, the coordinate Lipschitz bound of `φ₁`.
    pub fn max_entry_sq(&self) -> T {
        self.a.iter().map(|&v| v * v).fold(T::zero(), T::max)
    }

    pub fn dual(&self, kind: DualKind) -> EntropyDual<T> {
        let lip = match kind {
            DualKind::LogSumExp => vec![self.max_entry_sq(); self.m],
            // curvature of φ₂ at y = 0; only a starting guess
            DualKind::Exponential => (0..self.m)
                .map(|r| {
                    let s: T = (0..self.n).map(|i| self.entry(r, i) * self.entry(r, i)).sum();
                    s * T::lit((-1.0f64).exp())
                })
                .collect(),
        };
        EntropyDual { lp: self.clone(), kind, lip, reference: None }
    }
}

/// Feasible instance with `A_ij ∈ [1, 2]`.
///
/// The last row is a constant `c·1` with `c ∈ [1, 2]` so that `Ax = b`
/// implies `Σ x_i = 1`; `x̂` is uniform on the simplex (normalized
/// exponentials) and `b = A x̂`.
pub fn make_entropy_lp<T: Scalar>(n: usize, m: usize, seed: u64) -> Result<EntropyLp<T>> {
    if n < 2 || m < 1 {
        return Err(Error::Config("entropy LP needs n ≥ 2 and m ≥ 1".into()));
    }
    let mut rng = Stream::new(seed);
    let mut a = vec![T::zero(); m * n];
    for r in 0..m - 1 {
        for i in 0..n {
            a[r * n + i] = T::lit(rng.uniform_in(1.0, 2.0));
        }
    }
    let c = T::lit(rng.uniform_in(1.0, 2.0));
    for i in 0..n {
        a[(m - 1) * n + i] = c;
    }
    let mut xh: Vec<f64> = (0..n).map(|_| -(1.0 - rng.uniform()).ln()).collect();
    let z: f64 = xh.iter().sum();
    xh.iter_mut().for_each(|v| *v /= z);
    let x_hat: Vec<T> = xh.iter().map(|&v| T::lit(v)).collect();
    let mut lp = EntropyLp::new(a, vec![T::zero(); m], m, n)?;
    lp.b = lp.ax(&x_hat);
    lp.x_hat = Some(x_hat);
    Ok(lp)
}

/// High-accuracy solution of the `φ₁` dual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualReference {
    /// Minimum-norm dual minimizer.
    pub y_star: Vec<f64>,
    pub phi_star: f64,
    /// `f_* = −φ_*` by strong duality.
    pub f_star: f64,
    pub x_star: Vec<f64>,
    /// Newton decrement `gᵀH⁺g` at termination, an estimate of twice the gap.
    pub decrement: f64,
}

/// Damped Newton on `φ₁` with a pseudo-inverse Hessian (the dual is flat along
/// directions `d` with `Aᵀd ∝ 1`), then projection onto the Hessian range to
/// return the minimum-norm solution.
pub fn newton_reference<T: Scalar>(lp: &EntropyLp<T>, tol: f64) -> Result<DualReference> {
    let (m, n) = (lp.m, lp.n);
    let a = DMatrix::from_fn(m, n, |r, i| lp.entry(r, i).as_f64());
    let b = DVector::from_iterator(m, lp.b.iter().map(|v| v.as_f64()));
    let phi = |y: &DVector<f64>| -> f64 {
        let s: Vec<f64> = (a.transpose() * y).iter().copied().collect();
        log_sum_exp(&s) - y.dot(&b)
    };
    let softmax = |y: &DVector<f64>| -> DVector<f64> {
        let s = a.transpose() * y;
        let mx = s.max();
        let e = s.map(|v| (v - mx).exp());
        let z = e.sum();
        e / z
    };
    let mut y = DVector::<f64>::zeros(m);
    let mut decrement = f64::INFINITY;
    let mut hess = DMatrix::<f64>::zeros(m, m);
    for _ in 0..200 {
        let x = softmax(&y);
        let g = &a * &x - &b;
        let cov = DMatrix::from_diagonal(&x) - &x * x.transpose();
        hess = &a * cov * a.transpose();
        let pinv = hess
            .clone()
            .pseudo_inverse(1e-12 * hess.norm().max(1e-300))
            .map_err(|e| Error::Contract(format!("pseudo-inverse failed: {e}")))?;
        let step = -(&pinv * &g);
        decrement = -g.dot(&step);
        if decrement <= tol {
            break;
        }
        let f0 = phi(&y);
        let mut t = 1.0;
        loop {
            let cand = &y + &step * t;
            if phi(&cand) <= f0 - 0.25 * t * decrement || t < 1e-12 {
                y = cand;
                break;
            }
            t *= 0.5;
        }
    }
    if !(decrement <= tol) {
        return Err(Error::Contract(format!("Newton reference stalled at decrement {decrement:e}")));
    }
    // drop components along the flat directions
    let eig = nalgebra::SymmetricEigen::new(hess.clone());
    let top = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    let mut y_min = y.clone();
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= 1e-9 * top {
            let v = eig.eigenvectors.column(k);
            let c = v.dot(&y_min);
            y_min -= v * c;
        }
    }
    let phi_star = phi(&y_min).min(phi(&y));
    let x_star: Vec<f64> = softmax(&y_min).iter().copied().collect();
    Ok(DualReference { y_star: y_min.iter().copied().collect(), phi_star, f_star: -phi_star, x_star, decrement })
}

/// Dual functional of an [`EntropyLp`] as a coordinate problem over `y ∈ ℝ^m`.
#[derive(Clone, Debug)]
pub struct EntropyDual<T> {
    pub lp: EntropyLp<T>,
    pub kind: DualKind,
    lip: Vec<T>,
    reference: Option<(Vec<T>, T)>,
}

impl<T: Scalar> EntropyDual<T> {
    /// Attaches a known dual minimizer and optimal value.
    pub fn with_reference(mut self, y_star: Vec<T>, phi_star: T) -> Self {
        self.reference = Some((y_star, phi_star));
        self
    }

    /// Value, or an overflow error reporting the largest exponent for `φ₂`.
    pub fn try_value(&self, y: &[T]) -> Result<T> {
        let s = self.lp.at_y(y);
        let lin = dot(y, &self.lp.b);
        match self.kind {
            DualKind::LogSumExp => Ok(log_sum_exp(&s) - lin),
            DualKind::Exponential => {
                let mx = s.iter().copied().fold(T::neg_infinity(), T::max) - T::one();
                let total: T = s.iter().map(|&v| (v - T::one()).exp()).sum();
                if !total.is_finite() {
                    return Err(Error::Overflow { what: "exponential dual", magnitude: mx.as_f64() });
                }
                Ok(total - lin)
            }
        }
    }

    pub fn recover(&self, y: &[T]) -> Vec<T> {
        self.lp.recover(self.kind, y)
    }

    /// `∇φ(y) = A x(y) − b`.
    pub fn gradient(&self, y: &[T]) -> Vec<T> {
        let x = self.recover(y);
        self.lp.ax(&x).into_iter().zip(&self.lp.b).map(|(u, &v)| u - v).collect()
    }
}

impl<T: Scalar> CoordProblem<T> for EntropyDual<T> {
    fn dim(&self) -> usize {
        self.lp.m
    }

    fn value(&self, y: &[T]) -> T {
        self.try_value(y).unwrap_or(T::infinity())
    }

    fn partial(&self, r: usize, y: &[T]) -> T {
        let x = self.recover(y);
        dot(&self.lp.a[r * self.lp.n..(r + 1) * self.lp.n], &x) - self.lp.b[r]
    }

    fn lip(&self, r: usize) -> T {
        self.lip[r]
    }

    fn full_gradient(&self, y: &[T]) -> Option<Vec<T>> {
        Some(self.gradient(y))
    }

    fn minimizer_hint(&self) -> Option<&[T]> {
        self.reference.as_ref().map(|(y, _)| y.as_slice())
    }

    fn fstar_hint(&self) -> Option<T> {
        self.reference.as_ref().map(|(_, v)| *v)
    }

    fn lipschitz_bounded(&self) -> bool {
        self.kind == DualKind::LogSumExp
    }
}

/// Feasibility and optimality certificate of a recovered primal point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// `‖A x̄ − b‖₂`.
    pub feasibility: f64,
    /// `|f(x̄) + φ(y)|`.
    pub gap: f64,
    /// `√Θ`.
    pub theta_scale: f64,
}

impl Certificate {
    pub fn scaled_feasibility(&self) -> f64 {
        self.theta_scale * self.feasibility
    }
}

/// `x̄ = Σ α_k x(·) / Σ α_k` and its certificate against the final dual point.
pub fn recover_primal<T: Scalar>(
    acc: &WeightedAverage<T>,
    dual: &EntropyDual<T>,
    y_final: &[T],
    theta: f64,
) -> Result<(Vec<T>, Certificate)> {
    let xbar = acc.mean()?;
    let feasibility = dual.lp.residual_norm(&xbar).as_f64();
    let gap = (entropy(&xbar) + dual.value(y_final)).as_f64().abs();
    Ok((xbar, Certificate { feasibility, gap, theta_scale: theta.max(0.0).sqrt() }))
}
