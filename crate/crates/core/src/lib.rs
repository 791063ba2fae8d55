//! Multivariate Lévy processes conditioned to stay in a half-space.
//!
//! Paths live on a regular time grid ([`GridPath`]). The crate provides
//! simulators for Brownian motion with drift plus compound Poisson jumps,
//! the pathwise splitting and conditioning constructions, an exact sampler
//! for Brownian motion conditioned to stay in `{x : ⟨x, η⟩ > 0}`, and the
//! statistical tests used to check them by Monte Carlo.
//!
//! Everything except the samplers and tests is generic over the scalar
//! type, so the combinatorial identities can be checked in exact rational
//! arithmetic.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditioned;
pub mod construct;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod path;
pub mod rng;
pub mod scalar;
pub mod sim;
pub mod stats;

pub use conditioned::{conditioned_bm_from_x, conditioned_bm_path, conditioning_transform, ConditionedBm, ConditioningTransform};
pub use construct::{
    conditioned_down, conditioned_up, discrete_conditioned_pair, split_at_directional_infimum, split_at_max_norm, ConstructionTrace,
    SplitPair,
};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use path::{project, Direction, GridPath};
pub use rng::RngStream;
pub use scalar::{Real, Scalar};
pub use sim::{classify_case, sample_path, Case, CompoundPoisson, JumpLaw, Kill, LevySpec, PathSampler};

/// Exact rational scalar used for the combinatorial checks.
pub type Rational = num_rational::Rational64;

pub type Path = GridPath<f64>;
pub type Path32 = GridPath<f32>;
pub type ExactPath = GridPath<Rational>;
pub type IntPath = GridPath<i64>;
pub type Dir = Direction<f64>;
pub type ExactDir = Direction<Rational>;
pub type Mat = Matrix<f64>;
pub type Trace = ConstructionTrace<f64>;
pub type Split = SplitPair<f64>;
pub type Spec = LevySpec<f64>;
