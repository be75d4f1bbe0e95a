//! Five-fold cross-validation orchestration.

use serde::Serialize;

use crate::baselines::cos_baseline;
use crate::error::{Error, Result};
use crate::eval::metrics::{roc_auc, verification_rate, ThresholdPolicy};
use crate::model::ModelConfig;
use crate::numerics::Real;
use crate::pipeline::{cv_split, FeatureTable, Relation, SampleManifest};
use crate::training::{train, TrainConfig};

/// Verification rates of one fold, one cell per relation (None when the
/// fold's test set has no pairs of that relation).
#[derive(Clone, Debug, Serialize)]
pub struct FoldRates {
    pub fold: u8,
    pub rates: Vec<Option<f64>>,
    pub mean: f64,
}

/// Cross-validation report: the per-relation/per-fold rate table plus the
/// pooled ROC curve.
#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub model: String,
    pub relations: Vec<String>,
    pub per_fold: Vec<FoldRates>,
    pub relation_means: Vec<f64>,
    pub overall_mean: f64,
    pub roc: Vec<(f64, f64)>,
    pub auc: f64,
}

fn fold_seed(seed: u64, fold: u8) -> u64 {
    seed ^ (fold as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct FoldScores {
    scores: Vec<f64>,
    labels: Vec<bool>,
    relations: Vec<Relation>,
    threshold: f64,
}

fn cos_baseline_fold(
    manifest: &SampleManifest,
    features: &FeatureTable,
    fold: u8,
    seed: u64,
) -> Result<FoldScores> {
    let split = cv_split(manifest, fold, 2, seed)?;
    let score = |samples: &[crate::pipeline::PairSample]| -> Result<(Vec<f64>, Vec<bool>)> {
        let mut scores = Vec::with_capacity(samples.len());
        let mut labels = Vec::with_capacity(samples.len());
        for s in samples {
            scores.push(cos_baseline(
                features.get(&s.parent)?,
                features.get(&s.child)?,
            )?);
            labels.push(s.label);
        }
        Ok((scores, labels))
    };
    let (train_scores, train_labels) = score(&split.train)?;
    let threshold = ThresholdPolicy::TrainFoldTuned.threshold(&train_scores, &train_labels)?;
    let (scores, labels) = score(&split.test)?;
    let relations = split.test.iter().map(|s| s.relation).collect();
    Ok(FoldScores {
        scores,
        labels,
        relations,
        threshold,
    })
}

/// Run the five-fold protocol: a fresh model per fold, per-relation rates
/// in the standard table layout, and one pooled ROC/AUC.
pub fn crossval<T: Real>(
    model_cfg: &ModelConfig,
    manifest: &SampleManifest,
    features: &FeatureTable,
    cfg: &TrainConfig,
) -> Result<EvalReport> {
    let subject_count = model_cfg.subject_count();
    let records = manifest.for_subject_count(subject_count);
    if records.is_empty() {
        return Err(Error::data(format!(
            "manifest has no records for subject_count {subject_count}"
        )));
    }
    let relations: Vec<Relation> = Relation::BI
        .into_iter()
        .chain(Relation::TRI)
        .filter(|rel| records.iter().any(|r| r.relation == *rel))
        .collect();

    let mut per_fold = Vec::with_capacity(5);
    let mut pooled_scores = Vec::new();
    let mut pooled_labels = Vec::new();
    for fold in 1..=5u8 {
        let fs = match model_cfg {
            ModelConfig::CosBaseline { .. } => {
                cos_baseline_fold(manifest, features, fold, fold_seed(cfg.seed, fold))?
            }
            _ => {
                let mut fold_cfg = cfg.clone();
                fold_cfg.seed = fold_seed(cfg.seed, fold);
                let outcome = train::<T>(model_cfg, manifest, features, fold, &fold_cfg)?;
                FoldScores {
                    scores: outcome.test_scores,
                    labels: outcome.test_labels,
                    relations: outcome.test_relations,
                    threshold: 0.5,
                }
            }
        };

        let mut rates = Vec::with_capacity(relations.len());
        for rel in &relations {
            let idx: Vec<usize> = (0..fs.relations.len())
                .filter(|&i| fs.relations[i] == *rel)
                .collect();
            if idx.is_empty() {
                rates.push(None);
            } else {
                let s: Vec<f64> = idx.iter().map(|&i| fs.scores[i]).collect();
                let l: Vec<bool> = idx.iter().map(|&i| fs.labels[i]).collect();
                rates.push(Some(verification_rate(&s, &l, fs.threshold)?));
            }
        }
        let present: Vec<f64> = rates.iter().flatten().copied().collect();
        let mean = present.iter().sum::<f64>() / present.len().max(1) as f64;
        per_fold.push(FoldRates { fold, rates, mean });
        pooled_scores.extend(fs.scores);
        pooled_labels.extend(fs.labels);
    }

    let relation_means: Vec<f64> = (0..relations.len())
        .map(|r| {
            let vals: Vec<f64> = per_fold.iter().filter_map(|f| f.rates[r]).collect();
            vals.iter().sum::<f64>() / vals.len().max(1) as f64
        })
        .collect();
    let overall_mean = relation_means.iter().sum::<f64>() / relation_means.len().max(1) as f64;
    let (roc, auc) = roc_auc(&pooled_scores, &pooled_labels)?;

    Ok(EvalReport {
        model: model_cfg.name().to_string(),
        relations: relations.iter().map(|r| r.as_str().to_string()).collect(),
        per_fold,
        relation_means,
        overall_mean,
        roc,
        auc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{synth_generate, SynthConfig};

    #[test]
    fn cos_baseline_report_shape_and_determinism() {
        let (manifest, features) = synth_generate(&SynthConfig {
            seed: 2,
            n_families: 80,
            d_raw: 16,
            shared_fraction: 0.6,
            noise_sigma: 0.1,
            tri_subject: false,
        })
        .unwrap();
        let cfg = TrainConfig::new(1, 31);
        let a = crossval::<f64>(
            &ModelConfig::CosBaseline { d: 16 },
            &manifest,
            &features,
            &cfg,
        )
        .unwrap();
        assert_eq!(a.relations, ["F-S", "F-D", "M-S", "M-D"]);
        assert_eq!(a.per_fold.len(), 5);
        assert_eq!(a.relation_means.len(), 4);
        assert!(a.auc > 0.6, "auc {}", a.auc);
        assert!(a.overall_mean > 0.5);

        let b = crossval::<f64>(
            &ModelConfig::CosBaseline { d: 16 },
            &manifest,
            &features,
            &cfg,
        )
        .unwrap();
        assert_eq!(a.overall_mean, b.overall_mean);
        assert_eq!(a.auc, b.auc);
    }

    #[test]
    fn indistinguishable_classes_sit_near_chance() {
        // shared_fraction 0: positives and negatives are identically
        // distributed, so held-out accuracy hovers at one half.
        let (manifest, features) = synth_generate(&SynthConfig {
            seed: 8,
            n_families: 400,
            d_raw: 16,
            shared_fraction: 0.0,
            noise_sigma: 0.1,
            tri_subject: false,
        })
        .unwrap();
        let cfg = TrainConfig::new(1, 5);
        let report = crossval::<f64>(
            &ModelConfig::CosBaseline { d: 16 },
            &manifest,
            &features,
            &cfg,
        )
        .unwrap();
        assert!((report.auc - 0.5).abs() < 0.06, "auc {}", report.auc);
        assert!(
            (report.overall_mean - 0.5).abs() < 0.08,
            "mean {}",
            report.overall_mean
        );
    }
}
