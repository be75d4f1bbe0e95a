//! End-to-end training: balanced mini-batches, forward/backward through
//! the recording tape, optimizer updates, and periodic metric capture.
//! One run is strictly single-threaded and bitwise reproducible under a
//! fixed seed; fold- and seed-level parallelism happens in the caller.

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::metrics::verification_rate;
use crate::model::{Model, ModelConfig};
use crate::numerics::{Optimizer, OptimizerKind, ParameterStore, Real, Tape};
use crate::pipeline::{
    cv_split, sampling, ExtractorMode, FeatureExtractor, FeatureTable, PairBatch, PairSample,
    Relation, SampleManifest,
};

#[derive(Clone, Debug)]
pub struct TrainConfig {
    /// Total optimizer iterations.
    pub iterations: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub seed: u64,
    /// Rebuild training-fold negatives at every epoch boundary instead of
    /// keeping one fixed draw per run.
    pub resample_negatives: bool,
    /// Metric capture period (the final iteration is always captured).
    pub eval_every: usize,
    pub extractor: ExtractorMode,
}

impl TrainConfig {
    pub fn new(iterations: usize, seed: u64) -> Self {
        TrainConfig {
            iterations,
            batch_size: 32,
            optimizer: OptimizerKind::adam_default(),
            lr: 1e-3,
            seed,
            resample_negatives: false,
            eval_every: 50,
            extractor: ExtractorMode::Precomputed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::config("training needs at least one iteration"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be positive"));
        }
        if self.eval_every == 0 {
            return Err(Error::config("eval_every must be positive"));
        }
        Ok(())
    }

    /// Iterations for `epochs` passes over `n_samples` training pairs.
    pub fn iterations_for_epochs(epochs: usize, n_samples: usize, batch_size: usize) -> usize {
        epochs * n_samples.div_ceil(batch_size.max(1)).max(1)
    }
}

/// One captured metric point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EvalPoint {
    pub iteration: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub heldout_accuracy: f64,
}

/// Metrics log of one training run plus the checkpoint location once the
/// caller has written it.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunRecord {
    pub points: Vec<EvalPoint>,
    pub checkpoint: Option<std::path::PathBuf>,
}

/// Everything a fold evaluation needs from a finished run.
#[derive(Debug)]
pub struct TrainOutcome<T> {
    pub model: Model,
    pub store: ParameterStore<T>,
    pub record: RunRecord,
    pub test_scores: Vec<f64>,
    pub test_labels: Vec<bool>,
    pub test_relations: Vec<Relation>,
}

/// Cycles a per-class index order, reshuffling on wrap-around.
struct ClassCycler {
    order: Vec<usize>,
    cursor: usize,
    epochs_completed: usize,
}

impl ClassCycler {
    fn new(n: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        ClassCycler {
            order,
            cursor: 0,
            epochs_completed: 0,
        }
    }

    fn next(&mut self, rng: &mut ChaCha8Rng) -> usize {
        let i = self.order[self.cursor];
        self.cursor += 1;
        // Eager wrap so epoch boundaries are visible before the next batch.
        if self.cursor == self.order.len() {
            self.order.shuffle(rng);
            self.cursor = 0;
            self.epochs_completed += 1;
        }
        i
    }
}

fn split_by_label(samples: &[PairSample]) -> (Vec<PairSample>, Vec<PairSample>) {
    let (pos, neg): (Vec<_>, Vec<_>) = samples.iter().cloned().partition(|s| s.label);
    (pos, neg)
}

/// Per-batch class quotas: positives take the extra slot when the batch
/// size is odd.
pub fn batch_quotas(batch_size: usize) -> (usize, usize) {
    (batch_size.div_ceil(2), batch_size / 2)
}

/// Train one model on the four non-held-out folds and score the held-out
/// fold. Deterministic under `cfg.seed` on a single thread.
pub fn train<T: Real>(
    model_cfg: &ModelConfig,
    manifest: &SampleManifest,
    features: &FeatureTable,
    held_out_fold: u8,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    let model = model_cfg.build()?;
    let extractor = FeatureExtractor::new(cfg.extractor, features.width())?;

    let split = cv_split(manifest, held_out_fold, model.subject_count(), cfg.seed)?;
    if split.train.is_empty() || split.test.is_empty() {
        return Err(Error::data("empty train or test split"));
    }
    let (train_pos, mut train_neg) = split_by_label(&split.train);

    // Sub-seeds drawn in a fixed order from the master stream.
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init_seed = master.next_u64();
    let shuffle_seed = master.next_u64();
    let resample_base = master.next_u64();

    let mut store: ParameterStore<T> = model.init_store(init_seed, &extractor)?;
    let mut optimizer = Optimizer::new(cfg.optimizer, cfg.lr);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
    let mut pos_cycle = ClassCycler::new(train_pos.len(), &mut shuffle_rng);
    let mut neg_cycle = ClassCycler::new(train_neg.len(), &mut shuffle_rng);

    let (n_pos_per_batch, n_neg_per_batch) = batch_quotas(cfg.batch_size);
    let test_batch = PairBatch::<T>::assemble(&split.test, features)?;

    let mut record = RunRecord::default();
    let mut last_resampled_epoch = 0usize;
    for iter in 1..=cfg.iterations {
        // Epoch boundary: one full pass over the positives.
        if cfg.resample_negatives && pos_cycle.epochs_completed > last_resampled_epoch {
            last_resampled_epoch = pos_cycle.epochs_completed;
            train_neg = sampling::resample_train_negatives(
                manifest,
                held_out_fold,
                model.subject_count(),
                resample_base.wrapping_add(last_resampled_epoch as u64),
            )?;
            neg_cycle = ClassCycler::new(train_neg.len(), &mut shuffle_rng);
        }

        let mut batch_samples = Vec::with_capacity(cfg.batch_size);
        for _ in 0..n_pos_per_batch {
            batch_samples.push(train_pos[pos_cycle.next(&mut shuffle_rng)].clone());
        }
        for _ in 0..n_neg_per_batch {
            batch_samples.push(train_neg[neg_cycle.next(&mut shuffle_rng)].clone());
        }
        let batch = PairBatch::<T>::assemble(&batch_samples, features)?;

        let mut tape = Tape::new();
        let loss = model.batch_loss(&mut tape, &store, &batch, &extractor)?;
        tape.backward(loss, &mut store)?;
        optimizer.step(&mut store)?;

        if iter % cfg.eval_every == 0 || iter == cfg.iterations {
            let train_full = PairBatch::<T>::assemble(&split.train, features)?;
            let (train_probs, train_loss) = model.evaluate(&store, &train_full, &extractor)?;
            let train_labels: Vec<bool> = split.train.iter().map(|s| s.label).collect();
            let train_accuracy = verification_rate(&train_probs, &train_labels, 0.5)?;
            let (test_probs, _) = model.evaluate(&store, &test_batch, &extractor)?;
            let heldout_accuracy = verification_rate(&test_probs, &test_batch.labels, 0.5)?;
            record.points.push(EvalPoint {
                iteration: iter,
                train_loss,
                train_accuracy,
                heldout_accuracy,
            });
        }
    }

    let (test_scores, _) = model.evaluate(&store, &test_batch, &extractor)?;
    Ok(TrainOutcome {
        model,
        store,
        record,
        test_scores,
        test_labels: test_batch.labels.clone(),
        test_relations: test_batch.relations.clone(),
    })
}
