use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{MlError, Result};

/// Mean imputation followed by z-scoring, fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population std of the imputed column; 1 for constant columns.
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Missing values are NaN.
    pub fn fit(x: &[f64], p: usize) -> Result<Self> {
        if p == 0 || x.is_empty() || !x.len().is_multiple_of(p) {
            return Err(MlError::EmptyDataset);
        }
        let n = x.len() / p;
        let mut mean = vec![0.0; p];
        let mut present = vec![0usize; p];
        for row in x.chunks_exact(p) {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_nan() {
                    mean[j] += v;
                    present[j] += 1;
                }
            }
        }
        for (m, &c) in mean.iter_mut().zip(&present) {
            *m = if c > 0 { *m / c as f64 } else { 0.0 };
        }
        let mut var = vec![0.0; p];
        for row in x.chunks_exact(p) {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_nan() {
                    var[j] += (v - mean[j]) * (v - mean[j]);
                }
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / n as f64).sqrt();
                if s > 0.0 && s.is_finite() {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn fit_dataset(data: &Dataset) -> Result<Self> {
        Self::fit(&data.x, data.n_features())
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_into(&self, row: &[f64], out: &mut [f64]) {
        for (j, (&v, o)) in row.iter().zip(out.iter_mut()).enumerate() {
            let v = if v.is_nan() { self.mean[j] } else { v };
            *o = (v - self.mean[j]) / self.std[j];
        }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; row.len()];
        self.transform_into(row, &mut out);
        out
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        let p = self.n_features();
        let mut out = vec![0.0; x.len()];
        for (row, o) in x.chunks_exact(p).zip(out.chunks_exact_mut(p)) {
            self.transform_into(row, o);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_case() {
        let s = Standardizer::fit(&[0.0, 10.0], 1).unwrap();
        assert_eq!((s.mean[0], s.std[0]), (5.0, 5.0));
        assert_eq!(s.transform_row(&[10.0]), [1.0]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let s = Standardizer::fit(&[3.0, 1.0, 3.0, 2.0, 3.0, 9.0], 2).unwrap();
        assert_eq!(s.std[0], 1.0);
        let t = s.transform(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!((t[0], t[2]), (0.0, 0.0));
    }

    #[test]
    fn missing_values_imputed_with_mean() {
        let s = Standardizer::fit(&[1.0, f64::NAN, 3.0], 1).unwrap();
        assert_eq!(s.mean[0], 2.0);
        assert_eq!(s.transform_row(&[f64::NAN]), [0.0]);
    }
}
