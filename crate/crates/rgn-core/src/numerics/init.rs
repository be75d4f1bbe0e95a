use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::scalar::Real;
use crate::numerics::tensor::Tensor;

/// Parameter initialization scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitScheme {
    /// Uniform on ±sqrt(6 / (fan_in + fan_out)).
    XavierUniform,
    Zeros,
}

/// Deterministic seeded initialization. `fan_in`/`fan_out` are taken from a
/// rank-2 shape `[fan_in, fan_out]`; for vectors both fans are the length.
pub fn init_params<T: Real>(shape: &[usize], scheme: InitScheme, seed: u64) -> Tensor<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    init_params_from(shape, scheme, &mut rng)
}

/// Same, drawing from a caller-owned stream (used when building a whole
/// store from a single master seed).
pub fn init_params_from<T: Real>(
    shape: &[usize],
    scheme: InitScheme,
    rng: &mut ChaCha8Rng,
) -> Tensor<T> {
    let numel: usize = shape.iter().product();
    match scheme {
        InitScheme::Zeros => Tensor::zeros(shape.to_vec()),
        InitScheme::XavierUniform => {
            let (fan_in, fan_out) = match shape {
                [r, c] => (*r, *c),
                other => {
                    let n: usize = other.iter().product();
                    (n, n)
                }
            };
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            // Sampled in f64 so f32 and f64 runs share the same stream.
            let data: Vec<T> = (0..numel)
                .map(|_| T::from_f64(rng.random_range(-bound..bound)))
                .collect();
            Tensor::new(data, shape.to_vec()).unwrap()
        }
    }
}
