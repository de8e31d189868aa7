//! Accuracy, ROC AUC and the composite model-selection score.

use crate::error::{Error, Result};

/// Decision threshold on the score.
pub const THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPrediction {
    pub score: f64,
    pub predicted: u8,
    pub truth: u8,
}

impl ScoredPrediction {
    /// Thresholded prediction; a score of exactly 0.5 predicts 1.
    pub fn from_score(score: f64, truth: u8) -> Self {
        ScoredPrediction {
            score,
            predicted: (score >= THRESHOLD) as u8,
            truth,
        }
    }
}

pub fn accuracy(preds: &[ScoredPrediction]) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::MetricUndefined("accuracy of an empty prediction list"));
    }
    let correct = preds.iter().filter(|p| p.predicted == p.truth).count();
    Ok(correct as f64 / preds.len() as f64)
}

/// Mann–Whitney AUC: the fraction of (positive, negative) pairs where the
/// positive scores higher, ties counting one half. Computed from mid-ranks
/// in `O(n log n)`.
pub fn auc(preds: &[ScoredPrediction]) -> Result<f64> {
    let n_pos = preds.iter().filter(|p| p.truth == 1).count();
    let n_neg = preds.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::MetricUndefined("AUC needs both classes"));
    }
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[a].score.total_cmp(&preds[b].score));

    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && preds[order[j + 1]].score == preds[order[i]].score {
            j += 1;
        }
        // 1-based ranks i+1 ..= j+1 share their mean
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if preds[k].truth == 1 {
                pos_rank_sum += mid;
            }
        }
        i = j + 1;
    }
    let (np, nn) = (n_pos as f64, n_neg as f64);
    let u = pos_rank_sum - np * (np + 1.0) / 2.0;
    Ok(u / (np * nn))
}

/// ROC curve points `(fpr, tpr)` from the strictest threshold to the
/// loosest, one point per distinct score.
pub fn roc_curve(preds: &[ScoredPrediction]) -> Result<Vec<(f64, f64)>> {
    let n_pos = preds.iter().filter(|p| p.truth == 1).count();
    let n_neg = preds.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::MetricUndefined("ROC needs both classes"));
    }
    let mut sorted: Vec<&ScoredPrediction> = preds.iter().collect();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let s = sorted[i].score;
        while i < sorted.len() && sorted[i].score == s {
            if sorted[i].truth == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    Ok(points)
}

/// Trapezoidal area under an ROC curve.
pub fn trapezoid_area(curve: &[(f64, f64)]) -> f64 {
    curve
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

/// Model-selection score: the mean of accuracy and AUC.
pub fn composite(acc: f64, auc: f64) -> f64 {
    0.5 * acc + 0.5 * auc
}
