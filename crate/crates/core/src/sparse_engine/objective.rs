use serde::{Deserialize, Serialize};

use super::SparseMatrix;
use crate::error::{Error, Result};
use crate::oracle::CoordProblem;
use crate::rng::Stream;
use crate::scalar::{dot, Scalar};

/// Scalar link `φ_r(t)`, parameterized by the row target `b_r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phi {
    /// `½(t − b)²`, `φ'' = 1`.
    LeastSquares,
    /// `ln(1 + eᵗ) − b t`, `φ'' ≤ ¼`.
    Softplus,
    /// `eᵗ − b t`; curvature unbounded, constants must be supplied.
    Exp,
}

impl Phi {
    #[inline]
    pub fn value<T: Scalar>(self, t: T, b: T) -> T {
        match self {
            Phi::LeastSquares => T::lit(0.5) * (t - b) * (t - b),
            Phi::Softplus => softplus(t) - b * t,
            Phi::Exp => t.exp() - b * t,
        }
    }

    #[inline]
    pub fn deriv<T: Scalar>(self, t: T, b: T) -> T {
        match self {
            Phi::LeastSquares => t - b,
            Phi::Softplus => sigmoid(t) - b,
            Phi::Exp => t.exp() - b,
        }
    }

    pub fn curvature_bound(self) -> Option<f64> {
        match self {
            Phi::LeastSquares => Some(1.0),
            Phi::Softplus => Some(0.25),
            Phi::Exp => None,
        }
    }
}

#[inline]
fn softplus<T: Scalar>(t: T) -> T {
    if t > T::zero() {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

#[inline]
fn sigmoid<T: Scalar>(t: T) -> T {
    if t >= T::zero() {
        T::one() / (T::one() + (-t).exp())
    } else {
        let e = t.exp();
        e / (T::one() + e)
    }
}

/// `f(x) = Σ_r φ(a_rᵀx; b_r) + ⟨c, x⟩`.
#[derive(Clone, Debug)]
pub struct SeparableObjective<T> {
    pub matrix: SparseMatrix<T>,
    pub phi: Phi,
    pub b: Vec<T>,
    pub c: Vec<T>,
    lip: Vec<T>,
    fstar: Option<T>,
    minimizer: Option<Vec<T>>,
}

impl<T: Scalar> SeparableObjective<T> {
    /// Coordinate constants `L_j = φ''_max Σ_{r ∈ col j} A_rj²`; for [`Phi::Exp`]
    /// supply them with [`with_lipschitz`](Self::with_lipschitz).
    pub fn new(matrix: SparseMatrix<T>, phi: Phi, b: Vec<T>, c: Vec<T>) -> Result<Self> {
        if b.len() != matrix.rows() || c.len() != matrix.cols() {
            return Err(Error::Config("objective vectors do not match the matrix shape".into()));
        }
        let lip = match phi.curvature_bound() {
            Some(k) => (0..matrix.cols()).map(|j| T::lit(k) * matrix.col_norm_sq(j)).collect(),
            None => vec![T::one(); matrix.cols()],
        };
        Ok(Self { matrix, phi, b, c, lip, fstar: None, minimizer: None })
    }

    pub fn with_lipschitz(mut self, lip: Vec<T>) -> Result<Self> {
        if lip.len() != self.matrix.cols() || lip.iter().any(|l| !(*l > T::zero())) {
            return Err(Error::Config("one positive constant per column is required".into()));
        }
        self.lip = lip;
        Ok(self)
    }

    pub fn with_fstar(mut self, fstar: T) -> Self {
        self.fstar = Some(fstar);
        self
    }

    pub fn with_minimizer(mut self, x: Vec<T>) -> Self {
        self.minimizer = Some(x);
        self
    }

    /// `φ_r'(t)`.
    #[inline]
    pub fn row_deriv(&self, r: usize, t: T) -> T {
        self.phi.deriv(t, self.b[r])
    }

    /// `∂_j f` given a way to read `a_rᵀx`.
    #[inline]
    pub fn partial_with<F: Fn(usize) -> T>(&self, j: usize, row_value: F) -> T {
        let (idx, val) = self.matrix.col(j);
        let mut g = self.c[j];
        for (&r, &a) in idx.iter().zip(val) {
            g += self.row_deriv(r, row_value(r)) * a;
        }
        g
    }

    /// `f` from the cached products `Ax`.
    pub fn value_from_ax(&self, ax: &[T], x: &[T]) -> T {
        let s: T = ax.iter().zip(&self.b).map(|(&t, &b)| self.phi.value(t, b)).sum();
        s + dot(&self.c, x)
    }
}

impl<T: Scalar> CoordProblem<T> for SeparableObjective<T> {
    fn dim(&self) -> usize {
        self.matrix.cols()
    }

    fn value(&self, x: &[T]) -> T {
        self.value_from_ax(&self.matrix.matvec(x), x)
    }

    fn partial(&self, j: usize, x: &[T]) -> T {
        self.partial_with(j, |r| self.matrix.row_dot(r, x))
    }

    fn lip(&self, j: usize) -> T {
        self.lip[j]
    }

    fn full_gradient(&self, x: &[T]) -> Option<Vec<T>> {
        let ax = self.matrix.matvec(x);
        let d: Vec<T> = ax.iter().enumerate().map(|(r, &t)| self.row_deriv(r, t)).collect();
        Some(self.matrix.tmatvec(&d).into_iter().zip(&self.c).map(|(g, &c)| g + c).collect())
    }

    fn minimizer_hint(&self) -> Option<&[T]> {
        self.minimizer.as_deref()
    }

    fn fstar_hint(&self) -> Option<T> {
        self.fstar
    }

    fn lipschitz_bounded(&self) -> bool {
        self.phi.curvature_bound().is_some()
    }
}

/// Consistent sparse least squares `½‖Ax − b‖²` with `b = A x̂`, `f_* = 0`.
pub fn make_least_squares<T: Scalar>(m: usize, n: usize, density: f64, seed: u64) -> Result<SeparableObjective<T>> {
    let a = SparseMatrix::random(m, n, density, seed)?;
    let mut rng = Stream::substream(seed, 1);
    let xhat: Vec<T> = (0..n).map(|_| T::lit(rng.normal())).collect();
    let b = a.matvec(&xhat);
    let obj = SeparableObjective::new(a, Phi::LeastSquares, b, vec![T::zero(); n])?;
    Ok(obj.with_fstar(T::zero()))
}
