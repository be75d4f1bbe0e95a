use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::init::{init_params_from, InitScheme};
use crate::numerics::{ParameterStore, Real, Tape, Tensor, ValueId};

/// Feature-extraction front end. The deep CNN backbone is out of scope;
/// precomputed mode feeds table rows through unchanged, while the toy
/// trainable mode learns a small affine map raw -> D end-to-end with the
/// graph model behind it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtractorMode {
    Precomputed,
    ToyTrainable { out_dim: usize },
}

#[derive(Clone, Debug)]
pub struct FeatureExtractor {
    mode: ExtractorMode,
    raw_dim: usize,
}

impl FeatureExtractor {
    pub fn new(mode: ExtractorMode, raw_dim: usize) -> Result<Self> {
        if raw_dim == 0 {
            return Err(Error::config("extractor raw_dim must be positive"));
        }
        if let ExtractorMode::ToyTrainable { out_dim } = mode {
            if out_dim == 0 {
                return Err(Error::config("extractor out_dim must be positive"));
            }
        }
        Ok(FeatureExtractor { mode, raw_dim })
    }

    pub fn mode(&self) -> ExtractorMode {
        self.mode
    }

    pub fn raw_dim(&self) -> usize {
        self.raw_dim
    }

    /// Width of the vectors handed to the graph model.
    pub fn out_dim(&self) -> usize {
        match self.mode {
            ExtractorMode::Precomputed => self.raw_dim,
            ExtractorMode::ToyTrainable { out_dim } => out_dim,
        }
    }

    /// Register trainable parameters (a no-op in precomputed mode).
    pub fn add_params<T: Real>(
        &self,
        store: &mut ParameterStore<T>,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        if let ExtractorMode::ToyTrainable { out_dim } = self.mode {
            store.insert(
                "extractor.weight",
                init_params_from(&[self.raw_dim, out_dim], InitScheme::XavierUniform, rng),
            )?;
            store.insert(
                "extractor.bias",
                init_params_from(&[1, out_dim], InitScheme::Zeros, rng),
            )?;
        }
        Ok(())
    }

    /// Map one raw feature row onto the tape as a `1 x out_dim` value.
    pub fn apply<T: Real>(
        &self,
        tape: &mut Tape<T>,
        store: &ParameterStore<T>,
        raw: &[T],
    ) -> Result<ValueId> {
        if raw.len() != self.raw_dim {
            return Err(Error::shape(format!(
                "extractor expects raw width {}, got {}",
                self.raw_dim,
                raw.len()
            )));
        }
        let x = tape.constant(Tensor::new(raw.to_vec(), vec![1, self.raw_dim])?);
        match self.mode {
            ExtractorMode::Precomputed => Ok(x),
            ExtractorMode::ToyTrainable { .. } => {
                let w = tape.param(store, "extractor.weight")?;
                let b = tape.param(store, "extractor.bias")?;
                let y = tape.matmul(x, w)?;
                tape.add(y, b)
            }
        }
    }
}
