//! Star-shaped and hierarchical reasoning graph networks for pairwise (and
//! tri-subject) feature verification: a minimal reverse-mode engine, graph
//! construction, message passing, baselines, training, and a
//! cross-validation evaluation harness.
//!
//! Core math is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the `*64`/`*32` aliases below pin concrete types.

pub mod baselines;
pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod hrgn;
mod mlp;
pub mod model;
pub mod numerics;
pub mod pipeline;
pub mod srgn;
pub mod topology;
pub mod training;

pub use error::{Error, Result};
pub use model::{Model, ModelConfig};
pub use numerics::{
    init_params, InitScheme, Optimizer, OptimizerKind, ParameterStore, PoolKind, Real, Tape,
    Tensor, ValueId,
};

/// Default 64-bit instantiations.
pub type Tensor64 = Tensor<f64>;
pub type Tape64 = Tape<f64>;
pub type ParameterStore64 = ParameterStore<f64>;

/// Optional 32-bit instantiations (behind the CLI `precision` switch).
pub type Tensor32 = Tensor<f32>;
pub type Tape32 = Tape<f32>;
pub type ParameterStore32 = ParameterStore<f32>;
