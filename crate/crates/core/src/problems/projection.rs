//! Dual of the penalized projection `min_x μ/2‖x − x_g‖² + L/2‖Ax − b‖²`.
//!
//! With `f(x) = μ/2‖x − x_g‖²` and `g(z) = L/2‖z − b‖²` the Fenchel dual to
//! minimize is
//!
//! `ψ(y) = ‖Aᵀy‖²/(2μ) − ⟨A x_g, y⟩ + ‖y‖²/(2L) + ⟨y, b⟩`,
//!
//! with `x(y) = x_g − Aᵀy/μ` and `∇ψ(y) = −A x(y) + y/L + b`. As `L → ∞`
//! the primal becomes the Euclidean projection of `x_g` onto `{Ax = b}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::oracle::CoordProblem;
use crate::scalar::{dot, Scalar};

#[derive(Clone, Debug)]
pub struct ProjectionDual<T> {
    m: usize,
    n: usize,
    a: Vec<T>,
    b: Vec<T>,
    x_g: Vec<T>,
    mu: T,
    l: T,
    a_xg: Vec<T>,
    lip: Vec<T>,
    solution: Option<(Vec<T>, T)>,
}

/// `a` is row-major `m × n`.
pub fn make_projection_dual<T: Scalar>(
    a: Vec<T>,
    b: Vec<T>,
    m: usize,
    n: usize,
    x_g: Vec<T>,
    mu: T,
    l: T,
) -> Result<ProjectionDual<T>> {
    if !(mu > T::zero() && l > T::zero()) {
        return Err(Error::Config("projection dual needs μ > 0 and L > 0".into()));
    }
    if a.len() != m * n || b.len() != m || x_g.len() != n || m == 0 {
        return Err(Error::Config("projection dual dimensions disagree".into()));
    }
    let a_xg: Vec<T> = a.chunks(n).map(|row| dot(row, &x_g)).collect();
    let lip = a.chunks(n).map(|row| dot(row, row) / mu + T::one() / l).collect();
    let mut p = ProjectionDual { m, n, a, b, x_g, mu, l, a_xg, lip, solution: None };
    p.solution = p.solve_exact().ok();
    Ok(p)
}

impl<T: Scalar> ProjectionDual<T> {
    fn at_y(&self, y: &[T]) -> Vec<T> {
        let mut s = vec![T::zero(); self.n];
        for (row, &yr) in self.a.chunks(self.n).zip(y) {
            for (acc, &v) in s.iter_mut().zip(row) {
                *acc += v * yr;
            }
        }
        s
    }

    /// `x(y) = x_g − Aᵀy/μ`.
    pub fn recover(&self, y: &[T]) -> Vec<T> {
        self.at_y(y).into_iter().zip(&self.x_g).map(|(s, &g)| g - s / self.mu).collect()
    }

    /// Primal objective `μ/2‖x − x_g‖² + L/2‖Ax − b‖²`.
    pub fn primal_value(&self, x: &[T]) -> T {
        let half = T::lit(0.5);
        let dx: T = x.iter().zip(&self.x_g).map(|(&a, &b)| (a - b) * (a - b)).sum();
        let r: T = self.a.chunks(self.n).zip(&self.b).map(|(row, &bi)| (dot(row, x) - bi).powi(2)).sum();
        half * self.mu * dx + half * self.l * r
    }

    /// Solves `(AAᵀ/μ + I/L) y = A x_g − b` by Cholesky.
    pub fn solve_exact(&self) -> Result<(Vec<T>, T)> {
        let (m, n) = (self.m, self.n);
        let a = DMatrix::from_fn(m, n, |r, i| self.a[r * n + i].as_f64());
        let mu = self.mu.as_f64();
        let l = self.l.as_f64();
        let h = &a * a.transpose() / mu + DMatrix::identity(m, m) / l;
        let rhs = DVector::from_fn(m, |r, _| self.a_xg[r].as_f64() - self.b[r].as_f64());
        let y = h
            .cholesky()
            .ok_or_else(|| Error::Contract("dual Hessian is not positive definite".into()))?
            .solve(&rhs);
        let y: Vec<T> = y.iter().map(|&v| T::lit(v)).collect();
        let v = self.value(&y);
        Ok((y, v))
    }
}

impl<T: Scalar> CoordProblem<T> for ProjectionDual<T> {
    fn dim(&self) -> usize {
        self.m
    }

    fn value(&self, y: &[T]) -> T {
        let s = self.at_y(y);
        let half = T::lit(0.5);
        half * dot(&s, &s) / self.mu - dot(&self.a_xg, y) + half * dot(y, y) / self.l + dot(y, &self.b)
    }

    fn partial(&self, r: usize, y: &[T]) -> T {
        let x = self.recover(y);
        -dot(&self.a[r * self.n..(r + 1) * self.n], &x) + y[r] / self.l + self.b[r]
    }

    fn lip(&self, r: usize) -> T {
        self.lip[r]
    }

    fn full_gradient(&self, y: &[T]) -> Option<Vec<T>> {
        let x = self.recover(y);
        Some(
            self.a
                .chunks(self.n)
                .zip(y.iter().zip(&self.b))
                .map(|(row, (&yr, &br))| -dot(row, &x) + yr / self.l + br)
                .collect(),
        )
    }

    fn minimizer_hint(&self) -> Option<&[T]> {
        self.solution.as_ref().map(|(y, _)| y.as_slice())
    }

    fn fstar_hint(&self) -> Option<T> {
        self.solution.as_ref().map(|(_, v)| *v)
    }
}
