//! Accelerated randomized coordinate descent built by linearly coupling a
//! coordinate gradient step with a coordinate mirror step.
//!
//! * [`coupling`]: the restarted constant-step method, the growing-step method,
//!   its strongly convex restarts and adaptive Lipschitz estimation;
//! * [`sampler`]: `O(log n)` sampling with probabilities `∝ L_i^β`;
//! * [`sparse_engine`]: lazy variants whose steps touch one column of a sparse `A`;
//! * [`problems`]: quadratics, entropy-regularized LP duals, the projection dual;
//! * [`vrsum`]: variance-reduced gradient epochs for finite sums.
//!
//! Everything is generic over [`Scalar`] (`f32`, `f64`); the [`f64`] and
//! [`f32`] modules pin the most used types.

pub mod coupling;
pub mod error;
pub mod oracle;
pub mod problems;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod sparse_engine;
pub mod trace;
pub mod vrsum;

pub use coupling::{
    acrcd_epoch, acrcd_restart, acrcd_star, acrcd_star_strongly_convex, CoordinateGeometry, CouplingState,
    EpochParams, Monitor, RunConfig, Schedule, ScheduleKind, StarOptions,
};
pub use error::{Error, Result};
pub use oracle::{fd_check, wrap_inexact, CoordProblem, InexactOracle, WeightedNorm};
pub use rng::{substream_seed, Stream};
pub use sampler::SamplingTree;
pub use scalar::Scalar;
pub use trace::{Counters, TraceOptions, TraceRecord, Tracer};

macro_rules! aliases {
    ($t:ty) => {
        pub type CoordinateGeometry = crate::coupling::CoordinateGeometry<$t>;
        pub type CouplingState = crate::coupling::CouplingState<$t>;
        pub type Monitor = crate::coupling::Monitor<$t>;
        pub type Schedule = crate::coupling::Schedule<$t>;
        pub type SamplingTree = crate::sampler::SamplingTree<$t>;
        pub type WeightedNorm = crate::oracle::WeightedNorm<$t>;
        pub type QuadraticProblem = crate::problems::QuadraticProblem<$t>;
        pub type EntropyLp = crate::problems::EntropyLp<$t>;
        pub type SparseMatrix = crate::sparse_engine::SparseMatrix<$t>;
        pub type SeparableObjective = crate::sparse_engine::SeparableObjective<$t>;
        pub type RidgeFiniteSum = crate::vrsum::RidgeFiniteSum<$t>;
    };
}

/// Double-precision aliases.
pub mod f64 {
    aliases!(f64);
}

/// Single-precision aliases.
pub mod f32 {
    aliases!(f32);
}
