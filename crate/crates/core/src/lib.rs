//! Error-probability lower bounds and decoders for support recovery under
//! invariant causal prediction, viewed as a zero-rate Gaussian multiple
//! access channel with a shared codebook and an unknown number of senders.
//!
//! The numeric core is generic over [`Real`] (`f32`, `f64`); the aliases at
//! the crate root fix it to `f64`, which the harness and CLI use.

pub mod bounds;
pub mod cli;
pub mod datagen;
pub mod decoders;
pub mod error;
pub mod format;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod normal;
pub mod rng;
pub mod scalar;
pub mod support;

pub use bounds::{
    assemble_report, average_squared_distance, bound_data_dependent, bound_power_constraint,
    bound_power_constraint_simple, bound_signal_constraint, bound_signal_constraint_simple,
    tight_constraints_from_data, BoundKind, BoundReport, BoundValues, ConstraintSource,
    PowerConstraint,
};
pub use decoders::{
    decode_min_distance, icp_mdd, icp_mdd_known, mii_known, pooled_least_squares, DecodeOutcome,
    RegressionFit,
};
pub use error::{Error, Result};
pub use geometry::{detect_collisions, pairwise_distance, sent_signal, SignalBook};
pub use model::{CoefficientVector, EnvironmentData, ModelSpec, NoiseSpec};
pub use normal::std_normal_cdf;
pub use scalar::Real;
pub use support::{enumerate_supports, SupportSet, MAX_PREDICTORS};

pub type Environment = EnvironmentData<f64>;
pub type Environment32 = EnvironmentData<f32>;
pub type Coefficients = CoefficientVector<f64>;
pub type Coefficients32 = CoefficientVector<f32>;
pub type Noise = NoiseSpec<f64>;
pub type Model = ModelSpec<f64>;
pub type Model32 = ModelSpec<f32>;
pub type Budget = PowerConstraint<f64>;
pub type Report = BoundReport<f64>;
pub type Fit = RegressionFit<f64>;
pub type Sem = datagen::SemSpec<f64>;
pub type Dataset = datagen::Dataset<f64>;
