//! Face-matching baselines: an MLP over concatenated features and plain
//! cosine similarity (threshold fitted on training folds by the harness).

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mlp::{Activation, AffineStack};
use crate::numerics::{scalar, ParameterStore, Real, Tape, ValueId};

#[derive(Clone, Debug, PartialEq)]
pub struct MlpBaselineConfig {
    pub d: usize,
    pub subject_count: usize,
    /// Hidden widths; defaults to one layer of 64.
    pub hidden: Vec<usize>,
}

impl MlpBaselineConfig {
    pub fn new(d: usize) -> Self {
        MlpBaselineConfig {
            d,
            subject_count: 2,
            hidden: vec![64],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::config("mlp baseline: d must be positive"));
        }
        if !(2..=3).contains(&self.subject_count) {
            return Err(Error::config(format!(
                "mlp baseline: subject_count must be 2 or 3, got {}",
                self.subject_count
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct MlpBaseline {
    cfg: MlpBaselineConfig,
}

impl MlpBaseline {
    pub fn new(cfg: MlpBaselineConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(MlpBaseline { cfg })
    }

    pub fn config(&self) -> &MlpBaselineConfig {
        &self.cfg
    }

    fn stack(&self) -> AffineStack {
        AffineStack {
            prefix: "mlpbase".into(),
            input: self.cfg.subject_count * self.cfg.d,
            hidden: self.cfg.hidden.clone(),
            output: 1,
            activation: Activation::Relu,
        }
    }

    pub fn add_params<T: Real>(
        &self,
        store: &mut ParameterStore<T>,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        self.stack().add_params(store, rng)
    }

    /// Logit of the concatenated inputs `[gx || gy (|| gz)]`.
    pub fn logit<T: Real>(
        &self,
        tape: &mut Tape<T>,
        store: &ParameterStore<T>,
        gx: ValueId,
        gy: ValueId,
        gz: Option<ValueId>,
    ) -> Result<ValueId> {
        match (self.cfg.subject_count, gz) {
            (2, None) | (3, Some(_)) => {}
            (3, None) => return Err(Error::shape("mlp baseline: tri-subject model needs gz")),
            (2, Some(_)) => return Err(Error::shape("mlp baseline: pair model got a third input")),
            _ => unreachable!("subject_count validated to 2 or 3"),
        }
        let parts: Vec<ValueId> = [Some(gx), Some(gy), gz].into_iter().flatten().collect();
        for &p in &parts {
            if tape.value(p).shape() != [1, self.cfg.d] {
                return Err(Error::shape(format!(
                    "mlp baseline: inputs must be 1 x {}, got {:?}",
                    self.cfg.d,
                    tape.value(p).shape()
                )));
            }
        }
        let x = tape.concat(&parts, 1)?;
        self.stack().forward(tape, store, x)
    }

    pub(crate) fn mac_stages(&self) -> Vec<(String, u64)> {
        vec![("mlp".into(), self.stack().macs(1))]
    }
}

/// Cosine-similarity baseline score in [-1, 1]. No trainable parameters;
/// bi-subject only.
pub fn cos_baseline(gx: &[f64], gy: &[f64]) -> Result<f64> {
    if gx.len() != gy.len() {
        return Err(Error::shape(format!(
            "cosine baseline: length mismatch {} vs {}",
            gx.len(),
            gy.len()
        )));
    }
    Ok(scalar::cosine(gx, gy))
}
