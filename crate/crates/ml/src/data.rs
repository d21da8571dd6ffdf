use corrosion_ingest::{FeatureRow, FEATURE_NAMES};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};

/// Row-major feature matrix with targets and ordering keys.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<String>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Minutes since the Unix epoch.
    pub timestamps: Vec<i64>,
    /// Station codes, the secondary sort key.
    pub groups: Vec<u32>,
}

impl Dataset {
    pub fn new(features: Vec<String>, x: Vec<f64>, y: Vec<f64>, timestamps: Vec<i64>, groups: Vec<u32>) -> Result<Self> {
        let p = features.len();
        let n = y.len();
        if p == 0 || x.len() != n * p || timestamps.len() != n || groups.len() != n {
            return Err(MlError::Shape(format!(
                "{} features, {} values, {} targets, {} timestamps, {} groups",
                p,
                x.len(),
                n,
                timestamps.len(),
                groups.len()
            )));
        }
        Ok(Self {
            features,
            x,
            y,
            timestamps,
            groups,
        })
    }

    /// Unordered data: timestamps are the row indices.
    pub fn from_matrix(features: Vec<String>, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        Self::new(features, x, y, (0..n as i64).collect(), vec![0; n])
    }

    pub fn from_feature_rows(rows: &[FeatureRow]) -> Self {
        let mut x = Vec::with_capacity(rows.len() * FEATURE_NAMES.len());
        for r in rows {
            x.extend_from_slice(&r.features());
        }
        Self {
            features: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            x,
            y: rows.iter().map(|r| r.target_cr).collect(),
            timestamps: rows.iter().map(|r| r.timestamp.and_utc().timestamp() / 60).collect(),
            groups: rows.iter().map(|r| r.station_code).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_features();
        &self.x[i * p..(i + 1) * p]
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        let p = self.n_features();
        let mut x = Vec::with_capacity(idx.len() * p);
        for &i in idx {
            x.extend_from_slice(self.row(i));
        }
        Self {
            features: self.features.clone(),
            x,
            y: idx.iter().map(|&i| self.y[i]).collect(),
            timestamps: idx.iter().map(|&i| self.timestamps[i]).collect(),
            groups: idx.iter().map(|&i| self.groups[i]).collect(),
        }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        let p = self.n_features();
        Self {
            features: self.features.clone(),
            x: self.x[range.start * p..range.end * p].to_vec(),
            y: self.y[range.clone()].to_vec(),
            timestamps: self.timestamps[range.clone()].to_vec(),
            groups: self.groups[range].to_vec(),
        }
    }

    /// Uniform sample of `k` rows without replacement, input order kept.
    pub fn sample(&self, k: usize, seed: u64) -> Self {
        if k >= self.len() {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = rand::seq::index::sample(&mut rng, self.len(), k).into_vec();
        idx.sort_unstable();
        self.select(&idx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train_fraction: 0.75 }
    }
}

impl SplitSpec {
    pub fn new(train_fraction: f64) -> Self {
        Self { train_fraction }
    }

    /// `floor(f · n)`.
    pub fn train_len(&self, n: usize) -> Result<usize> {
        let f = self.train_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(MlError::DegenerateSplit { n, fraction: f });
        }
        let k = (f * n as f64).floor() as usize;
        if k == 0 || k >= n {
            return Err(MlError::DegenerateSplit { n, fraction: f });
        }
        Ok(k)
    }
}

/// Row order by `(timestamp, group)`, ties kept in input order.
pub fn time_order(data: &Dataset) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.sort_by_key(|&i| (data.timestamps[i], data.groups[i]));
    idx
}

/// Sorts by time and puts the first `floor(f · n)` rows in the training set.
pub fn time_series_split(data: &Dataset, spec: SplitSpec) -> Result<(Dataset, Dataset)> {
    if data.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    let k = spec.train_len(data.len())?;
    let order = time_order(data);
    Ok((data.select(&order[..k]), data.select(&order[k..])))
}
