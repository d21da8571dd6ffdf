use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};

pub const RIDGE_JITTER: f64 = 1e-8;

/// Ordinary least squares with an intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub weights: Vec<f64>,
}

impl LinearModel {
    /// Solves the centred normal equations `(XᵀX/n + εI) w = Xᵀy/n`.
    pub fn fit(x: &[f64], p: usize, y: &[f64]) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(MlError::EmptyDataset);
        }
        if x.len() != n * p {
            return Err(MlError::Shape(format!("{} values for {} rows of {} features", x.len(), n, p)));
        }
        let nf = n as f64;
        let mut x_mean = vec![0.0; p];
        for row in x.chunks_exact(p) {
            for (m, v) in x_mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        x_mean.iter_mut().for_each(|m| *m /= nf);
        let y_mean = y.iter().sum::<f64>() / nf;

        let mut gram = vec![0.0; p * p];
        let mut rhs = vec![0.0; p];
        let mut centred = vec![0.0; p];
        for (row, &yi) in x.chunks_exact(p).zip(y) {
            for j in 0..p {
                centred[j] = row[j] - x_mean[j];
            }
            let dy = yi - y_mean;
            for a in 0..p {
                rhs[a] += centred[a] * dy;
                for b in 0..=a {
                    gram[a * p + b] += centred[a] * centred[b];
                }
            }
        }
        for a in 0..p {
            rhs[a] /= nf;
            for b in 0..=a {
                gram[a * p + b] /= nf;
                gram[b * p + a] = gram[a * p + b];
            }
            gram[a * p + a] += RIDGE_JITTER;
        }
        let weights = cholesky_solve(&mut gram, p, &rhs)?;
        let intercept = y_mean - weights.iter().zip(&x_mean).map(|(w, m)| w * m).sum::<f64>();
        Ok(Self { intercept, weights })
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.intercept + self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>()
    }
}

/// In-place Cholesky factorisation and solve of a symmetric positive
/// definite system.
fn cholesky_solve(a: &mut [f64], p: usize, b: &[f64]) -> Result<Vec<f64>> {
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            d -= a[j * p + k] * a[j * p + k];
        }
        if !d.is_finite() || d <= RIDGE_JITTER * 1e-3 {
            return Err(MlError::RankDeficient);
        }
        let d = d.sqrt();
        a[j * p + j] = d;
        for i in j + 1..p {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= a[i * p + k] * a[j * p + k];
            }
            a[i * p + j] = s / d;
        }
    }
    let mut z = b.to_vec();
    for i in 0..p {
        for k in 0..i {
            z[i] -= a[i * p + k] * z[k];
        }
        z[i] /= a[i * p + i];
    }
    for i in (0..p).rev() {
        for k in i + 1..p {
            z[i] -= a[k * p + i] * z[k];
        }
        z[i] /= a[i * p + i];
    }
    Ok(z)
}
