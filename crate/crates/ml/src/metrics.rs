use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub n: usize,
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    /// `None` when the targets are constant.
    pub r2: Option<f64>,
}

pub fn regression_metrics(y: &[f64], y_hat: &[f64]) -> Result<RegressionMetrics> {
    if y.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    if y.len() != y_hat.len() {
        return Err(MlError::Shape(format!("{} targets, {} predictions", y.len(), y_hat.len())));
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let (mut sse, mut sae, mut sst) = (0.0, 0.0, 0.0);
    for (&a, &b) in y.iter().zip(y_hat) {
        sse += (a - b) * (a - b);
        sae += (a - b).abs();
        sst += (a - mean) * (a - mean);
    }
    let mse = sse / n;
    Ok(RegressionMetrics {
        n: y.len(),
        mse,
        rmse: mse.sqrt(),
        mae: sae / n,
        r2: (sst > 0.0).then(|| 1.0 - sse / sst),
    })
}

/// Confusion counts for `value ≥ threshold` alarms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlarmMetrics {
    pub threshold: f64,
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_neg: u64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn alarm_metrics(y: &[f64], y_hat: &[f64], threshold: f64) -> AlarmMetrics {
    let (mut tp, mut fp, mut fn_, mut tn) = (0u64, 0u64, 0u64, 0u64);
    for (&a, &b) in y.iter().zip(y_hat) {
        match (a >= threshold, b >= threshold) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    AlarmMetrics {
        threshold,
        true_pos: tp,
        false_pos: fp,
        false_neg: fn_,
        true_neg: tn,
        precision,
        recall,
        f1,
    }
}
