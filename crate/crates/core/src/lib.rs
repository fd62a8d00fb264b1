//! Simulation and verification toolkit for inhomogeneous random
//! intersection graphs.
//!
//! Vertices `v_1..v_n` carry weights `Y_j ~ P2`, attributes `w_1..w_m` carry
//! weights `X_i ~ P1`, and `w_i` is attached to `v_j` with probability
//! `min{1, X_i Y_j / sqrt(nm)}`. Two vertices are adjacent when they share an
//! attribute. The crate generates such graphs, measures degree
//! distributions, evaluates and samples the limiting degree laws, and
//! compares the two.
//!
//! The numeric modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

// `!(x >= 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bipartite;
pub mod error;
pub mod limit_laws;
pub mod pmf;
pub mod projector;
pub mod runner;
pub mod scalar;
pub mod stats;
pub mod weights;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type WeightModel = weights::WeightModel<f64>;
pub type MomentValue = weights::MomentValue<f64>;
pub type BipartiteInstance = bipartite::BipartiteInstance<f64>;
pub type DegreeSample = projector::DegreeSample<f64>;
pub type GenerationParams = projector::GenerationParams<f64>;
pub type PmfVector = pmf::PmfVector<f64>;
pub type RegimeLimit = limit_laws::RegimeLimit<f64>;
pub type LimitSampler = limit_laws::LimitSampler<f64>;

pub type WeightModelF32 = weights::WeightModel<f32>;
pub type PmfVectorF32 = pmf::PmfVector<f32>;
pub type RegimeLimitF32 = limit_laws::RegimeLimit<f32>;
