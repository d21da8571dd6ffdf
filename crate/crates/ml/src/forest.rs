use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};
use crate::rng::tree_seed;
use crate::tree::{Presorted, RegressionTree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<u32>,
    pub min_samples_leaf: u32,
    /// Fraction of features tried at each node.
    pub feature_subsample: f64,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: Some(8),
            min_samples_leaf: 1,
            feature_subsample: 1.0,
            bootstrap: true,
            seed: 42,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(MlError::InvalidHyperparams("n_trees must be at least 1".into()));
        }
        if !(self.feature_subsample > 0.0 && self.feature_subsample <= 1.0) {
            return Err(MlError::InvalidHyperparams(format!(
                "feature_subsample {} outside (0, 1]",
                self.feature_subsample
            )));
        }
        self.tree_params(1).validate()
    }

    pub(crate) fn tree_params(&self, p: usize) -> TreeParams {
        let k = ((self.feature_subsample * p as f64).ceil() as usize).clamp(1, p.max(1));
        TreeParams {
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            max_features: (k < p).then_some(k),
            lambda: 0.0,
            gamma: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<RegressionTree>,
}

impl RandomForest {
    pub fn fit(x: &[f64], p: usize, y: &[f64], params: &ForestParams) -> Result<Self> {
        if y.is_empty() {
            return Err(MlError::EmptyDataset);
        }
        if x.len() != y.len() * p {
            return Err(MlError::Shape(format!("{} values for {} rows of {} features", x.len(), y.len(), p)));
        }
        Self::fit_presorted(&Presorted::new(x, p), y, params)
    }

    /// Tree `i` depends only on the data and `tree_seed(seed, i)`, so
    /// any prefix of the forest equals a smaller forest.
    pub fn fit_presorted(pre: &Presorted, y: &[f64], params: &ForestParams) -> Result<Self> {
        params.validate()?;
        let n = y.len();
        let tree_params = params.tree_params(pre.n_features());
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(params.seed, t as u64));
                let mut w = vec![0.0; n];
                if params.bootstrap {
                    for _ in 0..n {
                        w[rng.random_range(0..n)] += 1.0;
                    }
                } else {
                    w.fill(1.0);
                }
                let g: Vec<f64> = y.iter().zip(&w).map(|(v, wi)| -v * wi).collect();
                pre.grow(&g, &w, &w, &tree_params, Some(&mut rng))
            })
            .collect();
        Ok(Self { trees })
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.predict_prefix(row, self.trees.len())
    }

    /// Mean over the first `k` trees.
    pub fn predict_prefix(&self, row: &[f64], k: usize) -> f64 {
        let k = k.min(self.trees.len());
        self.trees[..k].iter().map(|t| t.predict(row)).sum::<f64>() / k as f64
    }
}
