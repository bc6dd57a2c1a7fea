//! Classifier evaluation: accuracy, confusion matrix, one-vs-rest ROC /
//! AUC, macro-average precision.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub classes: usize,
    pub samples: usize,
    pub accuracy: f64,
    /// confusion[true][predicted], prediction = argmax score.
    pub confusion: Vec<Vec<usize>>,
    /// One-vs-rest AUC per class; NaN when a class has no positives or no
    /// negatives in the set.
    pub auc: Vec<f64>,
    /// One-vs-rest ROC points (fpr, tpr) per class, threshold descending.
    pub roc: Vec<Vec<(f64, f64)>>,
    pub macro_precision: f64,
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Rank-statistic AUC with midrank tie handling.
pub fn auc_ovr(scores: &[f64], positive: &[bool]) -> f64 {
    let n = scores.len();
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return f64::NAN;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Average rank for the tie group [i, j] (ranks are 1-based).
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &k in &order[i..=j] {
            if positive[k] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    (rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0) / (n_pos as f64 * n_neg as f64)
}

pub fn roc_ovr(scores: &[f64], positive: &[bool]) -> Vec<(f64, f64)> {
    let n = scores.len();
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return vec![(0.0, 0.0), (1.0, 1.0)];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        for &k in &order[i..=j] {
            if positive[k] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
        i = j + 1;
    }
    points
}

/// Evaluate per-class sigmoid scores against ground-truth class ids.
pub fn evaluate_scores(scores: &[Vec<f64>], labels: &[usize], classes: usize) -> EvalMetrics {
    assert_eq!(scores.len(), labels.len());
    let n = scores.len();
    let mut confusion = vec![vec![0usize; classes]; classes];
    let mut correct = 0usize;
    for (row, &truth) in scores.iter().zip(labels.iter()) {
        assert_eq!(row.len(), classes, "score row width matches class count");
        assert!(truth < classes);
        let pred = argmax(row);
        confusion[truth][pred] += 1;
        if pred == truth {
            correct += 1;
        }
    }
    let mut auc = Vec::with_capacity(classes);
    let mut roc = Vec::with_capacity(classes);
    for c in 0..classes {
        let class_scores: Vec<f64> = scores.iter().map(|r| r[c]).collect();
        let positive: Vec<bool> = labels.iter().map(|&l| l == c).collect();
        auc.push(auc_ovr(&class_scores, &positive));
        roc.push(roc_ovr(&class_scores, &positive));
    }
    let mut precision_sum = 0.0f64;
    for c in 0..classes {
        let tp = confusion[c][c];
        let fp: usize = (0..classes).filter(|&t| t != c).map(|t| confusion[t][c]).sum();
        precision_sum += if tp + fp == 0 {
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
    }
    EvalMetrics {
        classes,
        samples: n,
        accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
        confusion,
        auc,
        roc,
        macro_precision: precision_sum / classes.max(1) as f64,
    }
}
