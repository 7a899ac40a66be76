//! Amortized engines for objectives `Σ_r φ_r(a_rᵀx)` over a sparse matrix.

mod lazy;
mod matrix;
mod objective;

pub use lazy::{
    acrcd_prime_run, acrcd_star_prime_run, assemble_average, rebase_period, star_product, Contribution,
    LazyOutcome, LazyState, StarLazyOutcome,
};
pub use matrix::SparseMatrix;
pub use objective::{make_least_squares, Phi, SeparableObjective};
