//! Balanced negative-pair construction and the five-fold split.
//!
//! Negatives pair a parent with an unrelated child drawn from the same fold
//! and the same relation type, so per-relation rates stay comparable and no
//! feature id ever crosses a fold boundary as a pair member.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pipeline::batch::PairSample;
use crate::pipeline::manifest::{ManifestRecord, Relation, SampleManifest};

/// Positive records of one fold as labeled samples.
pub fn positives_as_samples(records: &[&ManifestRecord]) -> Vec<PairSample> {
    records
        .iter()
        .map(|r| PairSample {
            parent: r.parent_ref.clone(),
            child: r.child_ref.clone(),
            parent2: r.parent2_ref.clone(),
            relation: r.relation,
            label: true,
        })
        .collect()
}

/// Build exactly one negative per positive by re-pairing each parent (and
/// second parent) with an unrelated child of the same relation, within the
/// given records (one fold). Deterministic under `seed`.
pub fn build_negatives(
    fold: u8,
    records: &[&ManifestRecord],
    seed: u64,
) -> Result<Vec<PairSample>> {
    if records.len() < 2 {
        return Err(Error::data(format!(
            "fold {fold} has {} positive pairs; need at least 2 to sample negatives",
            records.len()
        )));
    }
    let mut groups: BTreeMap<Relation, Vec<&ManifestRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.relation).or_default().push(r);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut negatives = Vec::with_capacity(records.len());
    for (relation, group) in groups {
        if group.len() < 2 {
            return Err(Error::data(format!(
                "fold {fold} relation {relation} has {} positive pairs; need at least 2 \
                 to sample within-relation negatives",
                group.len()
            )));
        }
        for (i, r) in group.iter().enumerate() {
            // Uniform over the group's children excluding the related one.
            let mut j = rng.random_range(0..group.len() - 1);
            if j >= i {
                j += 1;
            }
            negatives.push(PairSample {
                parent: r.parent_ref.clone(),
                child: group[j].child_ref.clone(),
                parent2: r.parent2_ref.clone(),
                relation,
                label: false,
            });
        }
    }
    Ok(negatives)
}

/// Train/test pair lists, both with negatives already attached.
#[derive(Clone, Debug)]
pub struct Split {
    pub train: Vec<PairSample>,
    pub test: Vec<PairSample>,
}

fn fold_seed(seed: u64, fold: u8) -> u64 {
    seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Hold out one fold: its positives plus fold-local negatives become the
/// test set; the remaining folds (each with its own fold-local negatives)
/// become the training set.
pub fn cv_split(
    manifest: &SampleManifest,
    held_out_fold: u8,
    subject_count: usize,
    seed: u64,
) -> Result<Split> {
    let records = manifest.for_subject_count(subject_count);
    if records.is_empty() {
        return Err(Error::data(format!(
            "manifest has no records for subject_count {subject_count}"
        )));
    }
    if !(1..=5).contains(&held_out_fold) {
        return Err(Error::data(format!(
            "held-out fold {held_out_fold} outside 1..5"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for fold in 1..=5u8 {
        let fold_records: Vec<&ManifestRecord> =
            records.iter().copied().filter(|r| r.fold == fold).collect();
        if fold_records.is_empty() {
            return Err(Error::data(format!(
                "fold {fold} is missing from the manifest"
            )));
        }
        let mut samples = positives_as_samples(&fold_records);
        samples.extend(build_negatives(fold, &fold_records, fold_seed(seed, fold))?);
        if fold == held_out_fold {
            test.extend(samples);
        } else {
            train.extend(samples);
        }
    }
    Ok(Split { train, test })
}

/// Rebuild only the training-fold negatives (per-epoch resampling mode).
pub fn resample_train_negatives(
    manifest: &SampleManifest,
    held_out_fold: u8,
    subject_count: usize,
    seed: u64,
) -> Result<Vec<PairSample>> {
    let records = manifest.for_subject_count(subject_count);
    let mut negatives = Vec::new();
    for fold in 1..=5u8 {
        if fold == held_out_fold {
            continue;
        }
        let fold_records: Vec<&ManifestRecord> =
            records.iter().copied().filter(|r| r.fold == fold).collect();
        negatives.extend(build_negatives(fold, &fold_records, fold_seed(seed, fold))?);
    }
    Ok(negatives)
}
