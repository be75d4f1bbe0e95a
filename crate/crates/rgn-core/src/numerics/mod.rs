//! Minimal reverse-mode differentiation engine: tensors, the recording
//! tape, parameter storage, seeded initialization, optimizers, and the
//! binary checkpoint format.

pub mod checkpoint;
pub mod init;
pub mod optim;
pub mod params;
pub mod scalar;
pub mod tape;
pub mod tensor;

pub use init::{init_params, InitScheme};
pub use optim::{Optimizer, OptimizerKind};
pub use params::ParameterStore;
pub use scalar::Real;
pub use tape::{PoolKind, Tape, ValueId};
pub use tensor::Tensor;
