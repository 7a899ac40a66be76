use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::CoordProblem;
use crate::rng::Stream;
use crate::scalar::{dot, from_f64_vec, Scalar};

/// Generation metadata of a quadratic instance.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadraticMeta {
    pub min_entry: f64,
    pub max_entry: f64,
    /// Ridge `c` added to the diagonal to keep the minimum eigenvalue ≥ 1e-6.
    pub ridge_shift: f64,
    pub lambda_max: f64,
    pub lambda_min: f64,
}

/// `f(x) = ½⟨x, Sx⟩ − ⟨b, x⟩` with dense symmetric `S`.
#[derive(Clone, Debug)]
pub struct QuadraticProblem<T> {
    n: usize,
    s: Vec<T>,
    b: Vec<T>,
    minimizer: Option<Vec<T>>,
    fstar: Option<T>,
    pub meta: QuadraticMeta,
}

/// Smallest eigenvalue tolerated before a ridge shift is applied.
pub const MIN_EIGENVALUE: f64 = 1e-6;

impl<T: Scalar> QuadraticProblem<T> {
    /// `s` is row-major `n × n`; it must be symmetric with positive diagonal.
    pub fn new(s: Vec<T>, b: Vec<T>, n: usize) -> Result<Self> {
        if n == 0 || s.len() != n * n || b.len() != n {
            return Err(Error::Config(format!("quadratic needs an {n}×{n} matrix and length-{n} vector")));
        }
        for i in 0..n {
            if !(s[i * n + i] > T::zero()) {
                return Err(Error::Config(format!("S[{i},{i}] must be positive")));
            }
            for j in 0..i {
                if s[i * n + j] != s[j * n + i] {
                    return Err(Error::Config(format!("S is not symmetric at ({i},{j})")));
                }
            }
        }
        let (min_entry, max_entry) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v.as_f64()), hi.max(v.as_f64()))
        });
        let mut q = Self {
            n,
            s,
            b,
            minimizer: None,
            fstar: None,
            meta: QuadraticMeta { min_entry, max_entry, ..Default::default() },
        };
        let (lo, hi) = q.eigen_extremes();
        q.meta.lambda_min = lo;
        q.meta.lambda_max = hi;
        q.solve_minimizer();
        Ok(q)
    }

    /// Like [`new`](Self::new) but adds the smallest ridge `c·I` that lifts the
    /// minimum eigenvalue to [`MIN_EIGENVALUE`].
    pub fn new_convexified(mut s: Vec<T>, b: Vec<T>, n: usize) -> Result<Self> {
        let lam_min = symmetric_eigen(&s, n).0;
        let shift = if lam_min < MIN_EIGENVALUE { MIN_EIGENVALUE - lam_min } else { 0.0 };
        if shift > 0.0 {
            for i in 0..n {
                s[i * n + i] += T::lit(shift);
            }
        }
        let mut q = Self::new(s, b, n)?;
        q.meta.ridge_shift = shift;
        Ok(q)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &[T] {
        &self.s
    }

    pub fn rhs(&self) -> &[T] {
        &self.b
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> T {
        self.s[i * self.n + j]
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.entry(i, i)).sum()
    }

    pub fn lipschitz(&self) -> Vec<T> {
        (0..self.n).map(|i| self.entry(i, i)).collect()
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        self.s.chunks(self.n).map(|row| dot(row, x)).collect()
    }

    /// Largest eigenvalue by power iteration (used as the full-gradient `L`).
    pub fn lambda_max_power(&self, iters: usize) -> T {
        let mut v = vec![T::one(); self.n];
        let mut lam = T::zero();
        for _ in 0..iters {
            let w = self.matvec(&v);
            let nrm = dot(&w, &w).sqrt();
            if nrm == T::zero() {
                return T::zero();
            }
            lam = dot(&v, &w) / dot(&v, &v);
            v = w.into_iter().map(|e| e / nrm).collect();
        }
        lam
    }

    fn eigen_extremes(&self) -> (f64, f64) {
        symmetric_eigen(&self.s, self.n)
    }

    fn solve_minimizer(&mut self) {
        let n = self.n;
        let m = DMatrix::from_fn(n, n, |i, j| self.entry(i, j).as_f64());
        let b = DVector::from_iterator(n, self.b.iter().map(|v| v.as_f64()));
        if let Some(chol) = m.cholesky() {
            let x = chol.solve(&b);
            self.set_minimizer(from_f64_vec(x.as_slice()));
        }
    }

    /// Records a known minimizer (`S x_* = b`) and `f_* = −½⟨b, x_*⟩`.
    pub fn set_minimizer(&mut self, xstar: Vec<T>) {
        self.fstar = Some(-T::lit(0.5) * dot(&self.b, &xstar));
        self.minimizer = Some(xstar);
    }

    /// Strong convexity of `f` in the diagonal norm `Σ w_i x_i²`:
    /// `λ_min(W^{-1/2} S W^{-1/2})`.
    pub fn strong_convexity_in(&self, weights: &[T]) -> f64 {
        let n = self.n;
        let m = DMatrix::from_fn(n, n, |i, j| {
            self.entry(i, j).as_f64() / (weights[i].as_f64() * weights[j].as_f64()).sqrt()
        });
        SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Smallest `Θ` with `max{V_x(x_*) : f(x) − f_* ≤ d} ≤ Θ` in the diagonal
    /// norm with weights `w`: `d · λ_max(W^{1/2} S^{-1} W^{1/2})`.
    pub fn level_set_theta(&self, weights: &[T], d: f64) -> f64 {
        d / self.strong_convexity_in(weights)
    }
}

pub(crate) fn symmetric_eigen<T: Scalar>(s: &[T], n: usize) -> (f64, f64) {
    let m = DMatrix::from_fn(n, n, |i, j| s[i * n + j].as_f64());
    let e = SymmetricEigen::new(m).eigenvalues;
    let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

impl<T: Scalar> CoordProblem<T> for QuadraticProblem<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[T]) -> T {
        let sx = self.matvec(x);
        T::lit(0.5) * dot(x, &sx) - dot(&self.b, x)
    }

    #[inline]
    fn partial(&self, i: usize, x: &[T]) -> T {
        dot(&self.s[i * self.n..(i + 1) * self.n], x) - self.b[i]
    }

    #[inline]
    fn lip(&self, i: usize) -> T {
        self.entry(i, i)
    }

    fn full_gradient(&self, x: &[T]) -> Option<Vec<T>> {
        Some(self.matvec(x).into_iter().zip(&self.b).map(|(a, &b)| a - b).collect())
    }

    fn minimizer_hint(&self) -> Option<&[T]> {
        self.minimizer.as_deref()
    }

    fn fstar_hint(&self) -> Option<T> {
        self.fstar
    }

    /// `½(x − x_*)ᵀ S (x − x_*)`, free of the cancellation in `f(x) − f_*`.
    fn gap(&self, x: &[T]) -> Option<T> {
        let xs = self.minimizer.as_ref()?;
        let d: Vec<T> = x.iter().zip(xs).map(|(&a, &b)| a - b).collect();
        Some(T::lit(0.5) * dot(&d, &self.matvec(&d)))
    }
}

/// `1·1ᵀ + V Vᵀ` where the rows of `V` are non-negative with norms in
/// `[0, 1]`, so every entry lies in `[1, 2]`.
fn example2_matrix(n: usize, rng: &mut Stream) -> Vec<f64> {
    let mut v = vec![0.0f64; n * n];
    for i in 0..n {
        let row = &mut v[i * n..(i + 1) * n];
        for e in row.iter_mut() {
            *e = rng.uniform();
        }
        let nrm = row.iter().map(|e| e * e).sum::<f64>().sqrt();
        let radius = rng.uniform_in(0.0, 1.0);
        for e in row.iter_mut() {
            *e *= radius / nrm;
        }
    }
    let mut s = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let g: f64 = (0..n).map(|k| v[i * n + k] * v[j * n + k]).sum();
            let e = (1.0 + g).clamp(1.0, 2.0);
            s[i * n + j] = e;
            s[j * n + i] = e;
        }
    }
    s
}

/// Random symmetric PSD matrix with every entry in `[1, 2]` (diagonal
/// `L_i = S_ii ≤ 2`) and a planted minimizer `x̂ ∈ [−1, 1]ⁿ`, `b = S x̂`.
///
/// `S = 1·1ᵀ + V Vᵀ` where the rows of `V` are non-negative with norms in
/// `[0, 1]`, so `S_ij = 1 + ⟨v_i, v_j⟩ ∈ [1, 2]` and `λ_max(S) ≥ n`.
pub fn make_example2<T: Scalar>(n: usize, seed: u64) -> Result<QuadraticProblem<T>> {
    if n < 2 {
        return Err(Error::Config("example-2 quadratic needs n ≥ 2".into()));
    }
    let mut rng = Stream::new(seed);
    let s = from_f64_vec(&example2_matrix(n, &mut rng));
    let xhat: Vec<f64> = (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
    planted(s, &xhat, n)
}

/// Builds `b = S x̂` and pins `x̂` as the exact minimizer.
fn planted<T: Scalar>(s: Vec<T>, xhat: &[f64], n: usize) -> Result<QuadraticProblem<T>> {
    let b0 = vec![T::zero(); n];
    let mut q = QuadraticProblem::new_convexified(s, b0, n)?;
    let xs: Vec<T> = from_f64_vec(xhat);
    q.b = q.matvec(&xs);
    q.set_minimizer(xs);
    Ok(q)
}

/// `f(x) = x_1² + Σ_{k=1}^{n−1} (x_{k+1} − 2x_k)²`, minimizer 0, `f_* = 0`.
///
/// Hessian `2MᵀM` with `M` the lower bidiagonal `(1 on the diagonal, −2 below)`:
/// diagonal 10 except the last entry 2, off-diagonal −4.
pub fn make_chain_quadratic<T: Scalar>(n: usize) -> Result<QuadraticProblem<T>> {
    if n < 2 {
        return Err(Error::Config("chain quadratic needs n ≥ 2".into()));
    }
    let mut s = vec![T::zero(); n * n];
    for i in 0..n {
        s[i * n + i] = T::lit(if i + 1 < n { 10.0 } else { 2.0 });
        if i + 1 < n {
            s[i * n + i + 1] = T::lit(-4.0);
            s[(i + 1) * n + i] = T::lit(-4.0);
        }
    }
    let mut q = QuadraticProblem::new(s, vec![T::zero(); n], n)?;
    q.set_minimizer(vec![T::zero(); n]);
    Ok(q)
}

const HETEROGENEOUS_BLEND: f64 = 1e-4;

/// Quadratic with one stiff coordinate: `S = D^{1/2} C D^{1/2}` where `C` is
/// the unit-diagonal rescaling of an Example-2 matrix (dense, positive,
/// nearly rank one) blended as `(1 − γ)C + γI`, `γ = 10⁻⁴`, and
/// `D = diag(stiff, 1, …, 1)`, so `L_0 = stiff`, `L_i = 1` otherwise and
/// `λ_min(S) ≥ γ`.
pub fn make_heterogeneous<T: Scalar>(n: usize, stiff: f64, seed: u64) -> Result<QuadraticProblem<T>> {
    if n < 2 || !(stiff > 0.0) {
        return Err(Error::Config("heterogeneous quadratic needs n ≥ 2 and a positive stiffness".into()));
    }
    let mut rng = Stream::new(seed);
    let e = example2_matrix(n, &mut rng);
    let scale: Vec<f64> = (0..n).map(|i| if i == 0 { stiff.sqrt() } else { 1.0 } / e[i * n + i].sqrt()).collect();
    let mut s = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            // exact on the diagonal so the L_i come out as given
            let v = if i == j {
                if i == 0 { stiff } else { 1.0 }
            } else {
                (1.0 - HETEROGENEOUS_BLEND) * scale[i] * e[i * n + j] * scale[j]
            };
            s[i * n + j] = T::lit(v);
            s[j * n + i] = T::lit(v);
        }
    }
    let xhat: Vec<f64> = (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
    planted(s, &xhat, n)
}

/// Separable quadratic `½ Σ s_i (x_i − c_i)²`.
pub fn make_diagonal<T: Scalar>(diag: &[f64], center: &[f64]) -> Result<QuadraticProblem<T>> {
    let n = diag.len();
    let mut s = vec![T::zero(); n * n];
    for i in 0..n {
        s[i * n + i] = T::lit(diag[i]);
    }
    let b: Vec<T> = (0..n).map(|i| T::lit(diag[i] * center[i])).collect();
    let mut q = QuadraticProblem::new(s, b, n)?;
    q.set_minimizer(from_f64_vec(center));
    Ok(q)
}

/// `f(x) = ⟨c, x⟩`; every step constant satisfies the descent condition.
#[derive(Clone, Debug)]
pub struct LinearProblem<T> {
    c: Vec<T>,
}

impl<T: Scalar> LinearProblem<T> {
    pub fn new(c: Vec<T>) -> Self {
        Self { c }
    }
}

impl<T: Scalar> CoordProblem<T> for LinearProblem<T> {
    fn dim(&self) -> usize {
        self.c.len()
    }
    fn value(&self, x: &[T]) -> T {
        dot(&self.c, x)
    }
    fn partial(&self, i: usize, _x: &[T]) -> T {
        self.c[i]
    }
    fn lip(&self, _i: usize) -> T {
        T::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{fd_check, FD_STEP};

    #[test]
    fn chain_values() {
        let q = make_chain_quadratic::<f64>(3).unwrap();
        assert_eq!(q.value(&[0.0; 3]), 0.0);
        assert_eq!(q.full_gradient(&[0.0; 3]).unwrap(), vec![0.0; 3]);
        assert!((q.value(&[1.0, 1.0, 1.0]) - 3.0).abs() < 1e-14);
        assert_eq!(q.lipschitz(), vec![10.0, 10.0, 2.0]);
        assert!(fd_check(&q, &[0.3, -1.2, 2.0], FD_STEP) <= 1e-6);
        assert_eq!(q.gap(&[1.0, 1.0, 1.0]), Some(3.0));
    }

    #[test]
    fn all_ones_has_lambda_max_n() {
        for n in [2usize, 5, 16] {
            let q = QuadraticProblem::new(vec![1.0f64; n * n], vec![0.0; n], n).unwrap();
            assert!((q.meta.lambda_max - n as f64).abs() < 1e-10);
            assert!((q.lambda_max_power(50) - n as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_rank_one_gets_regularized() {
        let q = QuadraticProblem::new_convexified(vec![1.0f64, 1.0, 1.0, 1.0], vec![0.0, 0.0], 2).unwrap();
        assert!(q.meta.ridge_shift > 0.0);
        assert!(q.meta.lambda_min >= MIN_EIGENVALUE * 0.999);
        assert!((q.meta.lambda_max - 2.0).abs() < 1e-5);
        assert_eq!(q.minimizer_hint().unwrap(), &[0.0, 0.0]);
    }

    #[test]
    fn example2_properties() {
        let q = make_example2::<f64>(64, 3).unwrap();
        assert!(q.meta.min_entry >= 1.0 && q.meta.max_entry <= 2.0 + q.meta.ridge_shift);
        assert!(q.lipschitz().iter().all(|&l| l <= 2.0 + q.meta.ridge_shift));
        let lam = q.lambda_max_power(200);
        assert!(lam >= 64.0 * q.meta.min_entry - 1e-9);
        let ratio = lam / (q.trace() / 64.0);
        assert!(ratio >= 32.0, "{ratio}");
        assert!(q.meta.lambda_min > 0.0);
        // planted minimizer
        let xs = q.minimizer_hint().unwrap().to_vec();
        let g = q.full_gradient(&xs).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-12));
        assert!(fd_check(&q, &vec![0.5; 64], FD_STEP) <= 1e-6);
    }

    #[test]
    fn heterogeneous_lipschitz() {
        let q = make_heterogeneous::<f64>(32, 100.0, 1).unwrap();
        let l = q.lipschitz();
        assert!((l[0] - 100.0).abs() < 1e-9);
        assert!(l[1..].iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(q.meta.lambda_min > 0.0);
    }

    #[test]
    fn gap_matches_value_difference() {
        let q = make_example2::<f64>(8, 5).unwrap();
        let x = vec![0.25; 8];
        let direct = q.value(&x) - q.fstar_hint().unwrap();
        assert!((q.gap(&x).unwrap() - direct).abs() < 1e-10);
    }

    #[test]
    fn works_in_single_precision() {
        let q = make_chain_quadratic::<f32>(4).unwrap();
        assert_eq!(q.lip(3), 2.0f32);
        assert!(fd_check(&q, &[0.5f32, 0.25, -0.5, 1.0], 1e-2) <= 1e-3);
    }
}
