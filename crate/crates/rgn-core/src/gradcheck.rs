//! Finite-difference gradient verification.
//!
//! The check never touches the backward pass it validates: losses for the
//! difference quotient come from fresh forward evaluations with perturbed
//! parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{Model, ModelConfig};
use crate::numerics::{ParameterStore, Tape};
use crate::pipeline::{
    ExtractorMode, FeatureExtractor, FeatureTable, PairBatch, PairSample, Relation,
};

/// Central-difference step matching the acceptance setting.
pub const DEFAULT_STEP: f64 = 1e-6;

/// Relative-error denominators are floored here so difference-quotient
/// noise on near-zero gradients cannot dominate the ratio.
pub const DENOM_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct GradCheckEntry {
    pub name: String,
    pub max_rel_err: f64,
}

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub model: String,
    pub entries: Vec<GradCheckEntry>,
    pub max_rel_err: f64,
}

impl GradCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_err <= tolerance
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(DENOM_FLOOR)
}

/// Random features in [-1, 1] shaped like a batch of `n` pairs (triples
/// when `subject_count` is 3), half of them labeled positive.
pub fn random_pair_batch(d: usize, n: usize, subject_count: usize, seed: u64) -> PairBatch<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = FeatureTable::new(d);
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = |tag: &str| -> String {
            let id = format!("{tag}{i}");
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            table.insert(&id, v).unwrap();
            id
        };
        let parent = row("p");
        let child = row("c");
        let parent2 = (subject_count == 3).then(|| row("q"));
        samples.push(PairSample {
            parent,
            child,
            parent2,
            relation: if subject_count == 3 {
                Relation::FatherMotherSon
            } else {
                Relation::FatherSon
            },
            label: i % 2 == 0,
        });
    }
    PairBatch::assemble(&samples, &table).unwrap()
}

fn batch_loss_value(
    model: &Model,
    store: &ParameterStore<f64>,
    batch: &PairBatch<f64>,
    extractor: &FeatureExtractor,
) -> Result<f64> {
    let mut tape = Tape::new();
    let loss = model.batch_loss(&mut tape, store, batch, extractor)?;
    tape.value(loss).item()
}

/// Compare every parameter's backward gradient on the batch loss against
/// central finite differences.
#[allow(clippy::needless_range_loop)] // parallel walk over grads and the perturbed store
pub fn check_model_gradients(
    model_cfg: &ModelConfig,
    batch: &PairBatch<f64>,
    extractor_mode: ExtractorMode,
    seed: u64,
    step: f64,
) -> Result<GradCheckReport> {
    let model = model_cfg.build()?;
    let extractor = FeatureExtractor::new(extractor_mode, batch.feature_width())?;
    let mut store: ParameterStore<f64> = model.init_store(seed, &extractor)?;

    let mut tape = Tape::new();
    let loss = model.batch_loss(&mut tape, &store, batch, &extractor)?;
    tape.backward(loss, &mut store)?;
    let analytic: Vec<(String, Vec<f64>)> = store
        .iter()
        .map(|(name, t)| (name.to_string(), t.grad().unwrap().to_vec()))
        .collect();

    let mut entries = Vec::with_capacity(analytic.len());
    let mut worst = 0.0_f64;
    for (name, grads) in analytic {
        let mut param_worst = 0.0_f64;
        for i in 0..grads.len() {
            store.get_mut(&name)?.data_mut()[i] += step;
            let hi = batch_loss_value(&model, &store, batch, &extractor)?;
            store.get_mut(&name)?.data_mut()[i] -= 2.0 * step;
            let lo = batch_loss_value(&model, &store, batch, &extractor)?;
            store.get_mut(&name)?.data_mut()[i] += step;
            let fd = (hi - lo) / (2.0 * step);
            param_worst = param_worst.max(rel_err(grads[i], fd));
        }
        worst = worst.max(param_worst);
        entries.push(GradCheckEntry {
            name,
            max_rel_err: param_worst,
        });
    }
    Ok(GradCheckReport {
        model: model.name().to_string(),
        entries,
        max_rel_err: worst,
    })
}
