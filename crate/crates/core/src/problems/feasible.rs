//! Guard against feasible sets on which coordinate steps stall.

use crate::error::{Error, Result};
use crate::oracle::CoordProblem;
use crate::scalar::Scalar;

/// Feasible set description attached to a problem.
#[derive(Clone, Debug, PartialEq)]
pub enum FeasibleSet {
    Unconstrained,
    /// `lo_i ≤ x_i ≤ hi_i`; coordinate-separable but not supported by the methods.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `{x ≥ 0, Σ x_i ≤ radius}` or `= radius`.
    Simplex { radius: f64 },
    /// Any set given by coupled linear inequalities `Cx ≤ d`.
    Polyhedron { rows: usize },
}

impl FeasibleSet {
    pub fn is_coordinate_separable(&self) -> bool {
        matches!(self, Self::Unconstrained | Self::Box { .. })
    }
}

/// Accepts only sets the coordinate methods handle (`ℝⁿ`).
pub fn require_coordinate_separable(set: &FeasibleSet) -> Result<()> {
    match set {
        FeasibleSet::Unconstrained => Ok(()),
        FeasibleSet::Box { .. } => {
            Err(Error::Config("box constraints are separable but the methods run on ℝⁿ only".into()))
        }
        FeasibleSet::Simplex { .. } => Err(Error::NonSeparable(
            "the simplex couples coordinates; dualize Σx = 1 instead".into(),
        )),
        FeasibleSet::Polyhedron { rows } => {
            Err(Error::NonSeparable(format!("{rows} coupled linear inequalities")))
        }
    }
}

/// A problem paired with its feasible set, constructible only for `ℝⁿ`.
#[derive(Clone, Debug)]
pub struct Constrained<P> {
    pub problem: P,
    pub set: FeasibleSet,
}

impl<P> Constrained<P> {
    pub fn new<T: Scalar>(problem: P, set: FeasibleSet) -> Result<Self>
    where
        P: CoordProblem<T>,
    {
        require_coordinate_separable(&set)?;
        Ok(Self { problem, set })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_diagonal;

    #[test]
    fn stalling_counterexample_is_rejected() {
        // (x1 − 2)² + (x2 − 1)² over {x ≥ 0, x1 + x2 ≤ 2} from (1, 1)
        let q = make_diagonal::<f64>(&[2.0, 2.0], &[2.0, 1.0]).unwrap();
        let set = FeasibleSet::Polyhedron { rows: 3 };
        assert!(matches!(Constrained::new(q.clone(), set), Err(Error::NonSeparable(_))));
        assert!(matches!(
            Constrained::new(q.clone(), FeasibleSet::Simplex { radius: 2.0 }),
            Err(Error::NonSeparable(_))
        ));
        assert!(Constrained::new(q, FeasibleSet::Unconstrained).is_ok());
    }

    #[test]
    fn counterexample_really_stalls() {
        // Along e1 and e2 through (1, 1), the best feasible point is (1, 1) itself.
        let f = |a: f64, b: f64| (a - 2.0).powi(2) + (b - 1.0).powi(2);
        let feasible = |a: f64, b: f64| a >= 0.0 && b >= 0.0 && a + b <= 2.0 + 1e-15;
        let base = f(1.0, 1.0);
        for k in -1000..=1000 {
            let t = k as f64 * 1e-3;
            if feasible(1.0 + t, 1.0) {
                assert!(f(1.0 + t, 1.0) >= base);
            }
            if feasible(1.0, 1.0 + t) {
                assert!(f(1.0, 1.0 + t) >= base);
            }
        }
        assert!(f(1.5, 0.5) < base);
    }
}
