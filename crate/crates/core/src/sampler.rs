//! Weighted coordinate sampling with `O(log n)` draws and updates.
//!
//! A complete binary tree of partial sums stored in a flat array (heap
//! layout, root at index 1, leaves at `cap..cap + n`). Drawing descends from
//! the root comparing a scaled uniform against the left subtree sum.

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct SamplingTree<T> {
    n: usize,
    cap: usize,
    nodes: Vec<T>,
}

/// Leaf weights `L_i^β` for Lipschitz-weighted sampling.
pub fn lipschitz_weights<T: Scalar>(lips: &[T], beta: T) -> Vec<T> {
    lips.iter()
        .map(|&l| if beta == T::zero() { T::one() } else { l.powf(beta) })
        .collect()
}

impl<T: Scalar> SamplingTree<T> {
    pub fn build(weights: &[T]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Weights("no coordinates".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= T::zero() && w.is_finite())) {
            return Err(Error::Weights(format!("weight {i} = {w} is negative or not finite")));
        }
        let n = weights.len();
        let cap = n.next_power_of_two();
        let mut nodes = vec![T::zero(); 2 * cap];
        nodes[cap..cap + n].copy_from_slice(weights);
        for k in (1..cap).rev() {
            nodes[k] = nodes[2 * k] + nodes[2 * k + 1];
        }
        if !(nodes[1] > T::zero()) {
            return Err(Error::Weights("all weights are zero".into()));
        }
        Ok(Self { n, cap, nodes })
    }

    pub fn from_lipschitz(lips: &[T], beta: T) -> Result<Self> {
        Self::build(&lipschitz_weights(lips, beta))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `S = Σ_i w_i`; with `w_i = L_i^β` this is the effective dimension.
    #[inline]
    pub fn total(&self) -> T {
        self.nodes[1]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> T {
        self.nodes[self.cap + i]
    }

    #[inline]
    pub fn probability(&self, i: usize) -> T {
        self.weight(i) / self.total()
    }

    pub fn probabilities(&self) -> Vec<T> {
        (0..self.n).map(|i| self.probability(i)).collect()
    }

    pub fn weights(&self) -> &[T] {
        &self.nodes[self.cap..self.cap + self.n]
    }

    /// The unique `i` with `prefix(i) ≤ u < prefix(i + 1)`.
    pub fn draw(&self, u: T) -> Result<usize> {
        self.draw_counted(u).map(|(i, _)| i)
    }

    /// [`draw`](Self::draw) that also reports the number of nodes visited.
    pub fn draw_counted(&self, u: T) -> Result<(usize, usize)> {
        if !(u >= T::zero() && u < self.total()) {
            return Err(Error::Contract(format!("draw point {u} outside [0, {})", self.total())));
        }
        let mut u = u;
        let mut node = 1;
        let mut visits = 1;
        while node < self.cap {
            let left = self.nodes[2 * node];
            let right = self.nodes[2 * node + 1];
            // a zero-weight right subtree is unreachable even under roundoff
            if u < left || !(right > T::zero()) {
                node *= 2;
            } else {
                u -= left;
                node = 2 * node + 1;
            }
            visits += 1;
        }
        Ok((node - self.cap, visits))
    }

    /// Draws with a fresh uniform from `rng`.
    #[inline]
    pub fn sample(&self, rng: &mut Stream) -> usize {
        self.sample_counted(rng).0
    }

    pub fn sample_counted(&self, rng: &mut Stream) -> (usize, usize) {
        let total = self.total();
        let mut u = T::lit(rng.uniform()) * total;
        if u >= total {
            u = total.prev_below();
        }
        self.draw_counted(u).expect("scaled uniform lies in [0, total)")
    }

    pub fn update_weight(&mut self, i: usize, new_weight: T) -> Result<()> {
        if i >= self.n {
            return Err(Error::Contract(format!("coordinate {i} out of range")));
        }
        if !(new_weight >= T::zero() && new_weight.is_finite()) {
            return Err(Error::Weights(format!("weight {new_weight} is negative or not finite")));
        }
        let old = self.weight(i);
        self.set_leaf(i, new_weight);
        if !(self.total() > T::zero()) {
            self.set_leaf(i, old);
            return Err(Error::Weights("update would make every weight zero".into()));
        }
        Ok(())
    }

    fn set_leaf(&mut self, i: usize, w: T) {
        let mut k = self.cap + i;
        self.nodes[k] = w;
        while k > 1 {
            k /= 2;
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    /// Checks that every internal node is the sum of its children.
    pub fn is_consistent(&self, rel_tol: T) -> bool {
        (1..self.cap).all(|k| {
            let s = self.nodes[2 * k] + self.nodes[2 * k + 1];
            (self.nodes[k] - s).abs() <= rel_tol * s.abs()
        })
    }
}

trait PrevBelow {
    fn prev_below(self) -> Self;
}

impl<T: Scalar> PrevBelow for T {
    fn prev_below(self) -> Self {
        self * (T::one() - T::epsilon())
    }
}
