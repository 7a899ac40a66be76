//! Test instances: quadratics, entropy linear programs through their duals,
//! the projection dual, and serialized instance files.

mod entropy;
mod feasible;
mod instance;
mod projection;
mod quadratic;

pub use entropy::{
    entropy, log_sum_exp, make_entropy_lp, newton_reference, recover_primal, Certificate, DualKind,
    DualReference, EntropyDual, EntropyLp,
};
pub use feasible::{require_coordinate_separable, Constrained, FeasibleSet};
pub use instance::{InstanceFile, InstanceKind, InstanceSpec, MatrixData, INSTANCE_SCHEMA};
pub use projection::{make_projection_dual, ProjectionDual};
pub use quadratic::{
    make_chain_quadratic, make_diagonal, make_example2, make_heterogeneous, LinearProblem, QuadraticMeta,
    QuadraticProblem, MIN_EIGENVALUE,
};
