//! Small affine-stack helper shared by the model heads, the attention
//! scorer, and the MLP baseline. Weights are Xavier-uniform, biases zero;
//! the hidden activation applies between layers but never after the last.

use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::numerics::init::{init_params_from, InitScheme};
use crate::numerics::{ParameterStore, Real, Tape, ValueId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Activation {
    Relu,
    Tanh,
}

#[derive(Clone, Debug)]
pub(crate) struct AffineStack {
    pub prefix: String,
    pub input: usize,
    pub hidden: Vec<usize>,
    pub output: usize,
    pub activation: Activation,
}

impl AffineStack {
    fn layer_dims(&self) -> Vec<(usize, usize)> {
        let widths: Vec<usize> = std::iter::once(self.input)
            .chain(self.hidden.iter().copied())
            .chain(std::iter::once(self.output))
            .collect();
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn add_params<T: Real>(
        &self,
        store: &mut ParameterStore<T>,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        for (i, (fan_in, fan_out)) in self.layer_dims().into_iter().enumerate() {
            store.insert(
                format!("{}.l{}.weight", self.prefix, i + 1),
                init_params_from(&[fan_in, fan_out], InitScheme::XavierUniform, rng),
            )?;
            store.insert(
                format!("{}.l{}.bias", self.prefix, i + 1),
                init_params_from(&[1, fan_out], InitScheme::Zeros, rng),
            )?;
        }
        Ok(())
    }

    /// Apply to an `n x input` value, row-wise.
    pub fn forward<T: Real>(
        &self,
        tape: &mut Tape<T>,
        store: &ParameterStore<T>,
        x: ValueId,
    ) -> Result<ValueId> {
        let n_layers = self.layer_dims().len();
        let mut cur = x;
        for i in 1..=n_layers {
            let w = tape.param(store, &format!("{}.l{i}.weight", self.prefix))?;
            let b = tape.param(store, &format!("{}.l{i}.bias", self.prefix))?;
            let y = tape.matmul(cur, w)?;
            let rows = tape.value(y).shape()[0];
            let bias = if rows == 1 {
                b
            } else {
                tape.broadcast_rows(b, rows)?
            };
            cur = tape.add(y, bias)?;
            if i < n_layers {
                cur = match self.activation {
                    Activation::Relu => tape.relu(cur),
                    Activation::Tanh => tape.tanh(cur),
                };
            }
        }
        Ok(cur)
    }

    /// Multiply-accumulates of the affine maps for `n_rows` applications
    /// (bias adds and activations excluded).
    pub fn macs(&self, n_rows: u64) -> u64 {
        self.layer_dims()
            .iter()
            .map(|&(a, b)| n_rows * a as u64 * b as u64)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Tensor;
    use rand::SeedableRng;

    #[test]
    fn stack_shapes_and_macs() {
        let stack = AffineStack {
            prefix: "t".into(),
            input: 4,
            hidden: vec![3],
            output: 1,
            activation: Activation::Relu,
        };
        let mut store = ParameterStore::<f64>::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        stack.add_params(&mut store, &mut rng).unwrap();
        assert_eq!(store.len(), 4);
        assert_eq!(store.get("t.l1.weight").unwrap().shape(), &[4, 3]);
        assert_eq!(store.get("t.l2.weight").unwrap().shape(), &[3, 1]);

        let mut tape = Tape::new();
        let x = tape.constant(Tensor::new(vec![0.5; 8], vec![2, 4]).unwrap());
        let y = stack.forward(&mut tape, &store, x).unwrap();
        assert_eq!(tape.value(y).shape(), &[2, 1]);

        assert_eq!(stack.macs(1), 4 * 3 + 3);
        assert_eq!(stack.macs(5), 5 * (4 * 3 + 3));
    }
}
