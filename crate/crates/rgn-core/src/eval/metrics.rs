//! Verification-rate and ROC/AUC metrics.

use crate::error::{Error, Result};

/// Thresholding rule for turning scores into kin/non-kin decisions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdPolicy {
    /// Compare sigmoid probabilities against 0.5 (trained models).
    FixedHalf,
    /// Fit the accuracy-maximizing threshold on training scores and apply
    /// it to test scores (cosine baseline).
    TrainFoldTuned,
}

impl ThresholdPolicy {
    /// Resolve the decision threshold; the training scores are consulted
    /// only in tuned mode.
    pub fn threshold(self, train_scores: &[f64], train_labels: &[bool]) -> Result<f64> {
        match self {
            ThresholdPolicy::FixedHalf => Ok(0.5),
            ThresholdPolicy::TrainFoldTuned => tune_threshold(train_scores, train_labels),
        }
    }
}

fn check_scores(scores: &[f64], labels: &[bool]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::data("empty score list"));
    }
    if scores.len() != labels.len() {
        return Err(Error::data(format!(
            "scores/labels length mismatch: {} vs {}",
            scores.len(),
            labels.len()
        )));
    }
    Ok(())
}

/// Fraction of correct decisions with rule `score >= threshold` counting
/// as positive (ties decide positive).
pub fn verification_rate(scores: &[f64], labels: &[bool], threshold: f64) -> Result<f64> {
    check_scores(scores, labels)?;
    let correct = scores
        .iter()
        .zip(labels)
        .filter(|(&s, &y)| (s >= threshold) == y)
        .count();
    Ok(correct as f64 / scores.len() as f64)
}

/// Accuracy-maximizing threshold over the candidate set of observed scores
/// plus one value above the maximum (the all-negative rule). Among equally
/// accurate candidates the smallest wins.
pub fn tune_threshold(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_scores(scores, labels)?;
    let mut candidates: Vec<f64> = scores.to_vec();
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    candidates.dedup();
    let max = *candidates.last().unwrap();
    candidates.push(max + 1.0);

    let mut best_t = candidates[0];
    let mut best_acc = -1.0;
    for &t in &candidates {
        let acc = verification_rate(scores, labels, t)?;
        if acc > best_acc {
            best_acc = acc;
            best_t = t;
        }
    }
    Ok(best_t)
}

/// Threshold-sweep ROC with tied scores grouped, from (0,0) to (1,1), and
/// the trapezoidal AUC (equal to the Mann-Whitney statistic with ties
/// counted half).
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<(Vec<(f64, f64)>, f64)> {
    check_scores(scores, labels)?;
    let pos = labels.iter().filter(|&&y| y).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::data(format!(
            "ROC needs both classes, got {pos} positive / {neg} negative"
        )));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut prev: Option<f64> = None;
    for &i in &order {
        if prev != Some(scores[i]) {
            if prev.is_some() {
                points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
            }
            prev = Some(scores[i]);
        }
        if labels[i] {
            tp += 1;
        } else {
            fp += 1;
        }
    }
    points.push((1.0, 1.0));

    let mut auc = 0.0;
    for w in points.windows(2) {
        let ((x1, y1), (x2, y2)) = (w[0], w[1]);
        auc += (x2 - x1) * (y1 + y2) / 2.0;
    }
    Ok((points, auc))
}
