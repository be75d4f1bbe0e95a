use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::numerics::params::ParameterStore;
use crate::numerics::scalar::Real;

/// Optimizer flavor plus hyperparameters. Defaults follow the crate-wide
/// choice: adam, lr 1e-3, betas (0.9, 0.999), eps 1e-8.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OptimizerKind {
    SgdMomentum { momentum: f64 },
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl OptimizerKind {
    pub fn adam_default() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
struct Slot<T> {
    /// Momentum buffer (sgd) or first-moment estimate (adam).
    m: Vec<T>,
    /// Second-moment estimate (adam only).
    v: Vec<T>,
}

/// In-place parameter updater with per-parameter state keyed by name.
#[derive(Clone, Debug)]
pub struct Optimizer<T> {
    pub kind: OptimizerKind,
    pub lr: f64,
    step: u64,
    state: HashMap<String, Slot<T>>,
}

impl<T: Real> Optimizer<T> {
    pub fn new(kind: OptimizerKind, lr: f64) -> Self {
        Optimizer {
            kind,
            lr,
            step: 0,
            state: HashMap::new(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Apply one update from the gradients currently held in `store`, then
    /// zero them. Every parameter must hold a gradient.
    pub fn step(&mut self, store: &mut ParameterStore<T>) -> Result<()> {
        for (name, t) in store.iter() {
            if t.grad().is_none() {
                return Err(Error::config(format!(
                    "optimizer step with missing gradient for parameter '{name}'"
                )));
            }
        }
        self.step += 1;
        let lr = T::from_f64(self.lr);
        let names: Vec<String> = store.names().map(str::to_owned).collect();
        for name in names {
            let t = store.get_mut(&name)?;
            let n = t.numel();
            let slot = self.state.entry(name.clone()).or_insert_with(|| Slot {
                m: vec![T::zero(); n],
                v: vec![T::zero(); n],
            });
            match self.kind {
                OptimizerKind::SgdMomentum { momentum } => {
                    let mu = T::from_f64(momentum);
                    let grad = t.grad().unwrap().to_vec();
                    let data = t.data_mut();
                    for i in 0..n {
                        slot.m[i] = mu * slot.m[i] + grad[i];
                        data[i] -= lr * slot.m[i];
                    }
                }
                OptimizerKind::Adam { beta1, beta2, eps } => {
                    let b1 = T::from_f64(beta1);
                    let b2 = T::from_f64(beta2);
                    let eps = T::from_f64(eps);
                    let bc1 = T::one() - T::from_f64(beta1.powi(self.step as i32));
                    let bc2 = T::one() - T::from_f64(beta2.powi(self.step as i32));
                    let grad = t.grad().unwrap().to_vec();
                    let data = t.data_mut();
                    for i in 0..n {
                        slot.m[i] = b1 * slot.m[i] + (T::one() - b1) * grad[i];
                        slot.v[i] = b2 * slot.v[i] + (T::one() - b2) * grad[i] * grad[i];
                        let m_hat = slot.m[i] / bc1;
                        let v_hat = slot.v[i] / bc2;
                        data[i] -= lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
            t.zero_grad();
        }
        Ok(())
    }
}
