use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};
use crate::tree::{Presorted, RegressionTree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: Option<u32>,
    pub min_samples_leaf: u32,
    /// L2 leaf penalty; second-order variant only.
    pub lambda: f64,
    /// Minimum split gain; second-order variant only.
    pub gamma: f64,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self {
            n_rounds: 100,
            learning_rate: 0.1,
            max_depth: Some(5),
            min_samples_leaf: 1,
            lambda: 0.0,
            gamma: 0.0,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_rounds == 0 {
            return Err(MlError::InvalidHyperparams("n_rounds must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(MlError::InvalidHyperparams(format!(
                "learning_rate {} outside (0, 1]",
                self.learning_rate
            )));
        }
        self.tree_params().validate()
    }

    fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            max_features: None,
            lambda: self.lambda,
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoostKind {
    /// Leaf value is the mean residual.
    FirstOrder,
    /// Leaf value is `-G/(H+λ)` with regularised gain.
    SecondOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub base: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
}

impl GradientBoosting {
    pub fn fit(x: &[f64], p: usize, y: &[f64], params: &BoostParams, kind: BoostKind) -> Result<Self> {
        if y.is_empty() {
            return Err(MlError::EmptyDataset);
        }
        if x.len() != y.len() * p {
            return Err(MlError::Shape(format!("{} values for {} rows of {} features", x.len(), y.len(), p)));
        }
        Self::fit_presorted(&Presorted::new(x, p), y, params, kind, |_, _| {})
    }

    /// `on_round(k, predictions)` sees training predictions after round `k` (1-based).
    pub fn fit_presorted(
        pre: &Presorted,
        y: &[f64],
        params: &BoostParams,
        kind: BoostKind,
        mut on_round: impl FnMut(usize, &[f64]),
    ) -> Result<Self> {
        params.validate()?;
        let mut tp = params.tree_params();
        if kind == BoostKind::FirstOrder {
            tp.lambda = 0.0;
            tp.gamma = 0.0;
        }
        let n = y.len();
        let p = pre.n_features();
        let base = y.iter().sum::<f64>() / n as f64;
        let mut pred = vec![base; n];
        let ones = vec![1.0; n];
        let mut g = vec![0.0; n];
        let mut row = vec![0.0; p];
        let mut trees = Vec::with_capacity(params.n_rounds);
        for round in 1..=params.n_rounds {
            for i in 0..n {
                g[i] = match kind {
                    BoostKind::FirstOrder => -(y[i] - pred[i]),
                    BoostKind::SecondOrder => pred[i] - y[i],
                };
            }
            let tree = pre.grow(&g, &ones, &ones, &tp, None);
            for (i, pi) in pred.iter_mut().enumerate() {
                for (j, r) in row.iter_mut().enumerate() {
                    *r = pre.value(i, j);
                }
                *pi += params.learning_rate * tree.predict(&row);
            }
            trees.push(tree);
            on_round(round, &pred);
        }
        Ok(Self {
            base,
            learning_rate: params.learning_rate,
            trees,
        })
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.predict_prefix(row, self.trees.len())
    }

    /// Prediction using only the first `k` rounds.
    pub fn predict_prefix(&self, row: &[f64], k: usize) -> f64 {
        let mut out = self.base;
        for t in &self.trees[..k.min(self.trees.len())] {
            out += self.learning_rate * t.predict(row);
        }
        out
    }
}
