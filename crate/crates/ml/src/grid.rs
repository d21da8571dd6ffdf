use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boost::{BoostKind, BoostParams, GradientBoosting};
use crate::data::Dataset;
use crate::error::{MlError, Result};
use crate::forest::{ForestParams, RandomForest};
use crate::model::{Family, HyperParams, Predictor};
use crate::standardize::Standardizer;
use crate::tree::Presorted;

pub const N_FOLDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grid {
    pub learning_rates: Vec<f64>,
    /// Trees for the forest, rounds for boosting.
    pub n_estimators: Vec<usize>,
    /// `null` means unlimited.
    pub max_depths: Vec<Option<u32>>,
    pub feature_subsamples: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub min_samples_leaf: u32,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            learning_rates: vec![0.01, 0.05, 0.1],
            n_estimators: vec![50, 100, 200],
            max_depths: vec![Some(3), Some(5), Some(8)],
            feature_subsamples: vec![0.5, 1.0],
            lambdas: vec![0.0, 1.0],
            gammas: vec![0.0],
            min_samples_leaf: 1,
        }
    }
}

impl Grid {
    /// Points sharing everything but the estimator count, as
    /// `(point with the largest count, ascending counts)`.
    fn groups(&self, family: Family, seed: u64) -> Result<Vec<(HyperParams, Vec<usize>)>> {
        let mut counts = self.n_estimators.clone();
        counts.sort_unstable();
        counts.dedup();
        let max = counts.last().copied();
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(MlError::InvalidHyperparams(format!("grid has no {what}")))
            }
        };
        let mut out = Vec::new();
        match family {
            Family::Linear => out.push((HyperParams::Linear, vec![0])),
            Family::Forest => {
                need(max.is_some(), "n_estimators")?;
                need(!self.max_depths.is_empty(), "max_depths")?;
                need(!self.feature_subsamples.is_empty(), "feature_subsamples")?;
                for &max_depth in &self.max_depths {
                    for &feature_subsample in &self.feature_subsamples {
                        let hp = HyperParams::Forest(ForestParams {
                            n_trees: max.unwrap(),
                            max_depth,
                            min_samples_leaf: self.min_samples_leaf,
                            feature_subsample,
                            bootstrap: true,
                            seed,
                        });
                        out.push((hp, counts.clone()));
                    }
                }
            }
            Family::Gbm | Family::Gbm2 => {
                need(max.is_some(), "n_estimators")?;
                need(!self.max_depths.is_empty(), "max_depths")?;
                need(!self.learning_rates.is_empty(), "learning_rates")?;
                let (lambdas, gammas) = if family == Family::Gbm {
                    (vec![0.0], vec![0.0])
                } else {
                    need(!self.lambdas.is_empty() && !self.gammas.is_empty(), "lambdas or gammas")?;
                    (self.lambdas.clone(), self.gammas.clone())
                };
                for &learning_rate in &self.learning_rates {
                    for &max_depth in &self.max_depths {
                        for &lambda in &lambdas {
                            for &gamma in &gammas {
                                let bp = BoostParams {
                                    n_rounds: max.unwrap(),
                                    learning_rate,
                                    max_depth,
                                    min_samples_leaf: self.min_samples_leaf,
                                    lambda,
                                    gamma,
                                };
                                let hp = if family == Family::Gbm {
                                    HyperParams::Gbm(bp)
                                } else {
                                    HyperParams::Gbm2(bp)
                                };
                                out.push((hp, counts.clone()));
                            }
                        }
                    }
                }
            }
        }
        for (hp, _) in &out {
            hp.validate()?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScore {
    pub hyperparams: HyperParams,
    pub fold_rmse: Vec<f64>,
    pub mean_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub family: Family,
    pub best: HyperParams,
    pub best_rmse: f64,
    pub scores: Vec<GridScore>,
}

/// Walk-forward folds over `m` time-ordered rows: fold `k` trains on the
/// first `k` quarters and validates on quarter `k + 1`.
pub fn walk_forward_folds(m: usize) -> Result<Vec<(Range<usize>, Range<usize>)>> {
    let cut = |k: usize| m * k / (N_FOLDS + 1);
    let folds: Vec<_> = (1..=N_FOLDS).map(|k| (0..cut(k), cut(k)..cut(k + 1))).collect();
    if folds.iter().any(|(t, v)| t.is_empty() || v.is_empty()) {
        return Err(MlError::Shape(format!("{m} rows are too few for {N_FOLDS} walk-forward folds")));
    }
    Ok(folds)
}

fn rmse(y: &[f64], pred: &[f64]) -> f64 {
    let sse: f64 = y.iter().zip(pred).map(|(a, b)| (a - b) * (a - b)).sum();
    (sse / y.len() as f64).sqrt()
}

/// Validation RMSE of `hp` at each estimator count in `counts`.
fn staged_scores(pre: &Presorted, y: &[f64], z_val: &[f64], y_val: &[f64], hp: &HyperParams, counts: &[usize]) -> Result<Vec<f64>> {
    let p = pre.n_features();
    let n_val = y_val.len();
    let mut staged = vec![vec![0.0; n_val]; counts.len()];
    match hp {
        HyperParams::Linear => {
            let model = Predictor::fit(&pre_matrix(pre), p, y, hp)?;
            for (i, row) in z_val.chunks_exact(p).enumerate() {
                staged[0][i] = model.predict(row);
            }
        }
        HyperParams::Forest(fp) => {
            let forest = RandomForest::fit_presorted(pre, y, fp)?;
            for (i, row) in z_val.chunks_exact(p).enumerate() {
                let mut sum = 0.0;
                let mut c = 0;
                for (t, tree) in forest.trees.iter().enumerate() {
                    sum += tree.predict(row);
                    while c < counts.len() && counts[c] == t + 1 {
                        staged[c][i] = sum / (t + 1) as f64;
                        c += 1;
                    }
                }
            }
        }
        HyperParams::Gbm(bp) | HyperParams::Gbm2(bp) => {
            let kind = if matches!(hp, HyperParams::Gbm(_)) {
                BoostKind::FirstOrder
            } else {
                BoostKind::SecondOrder
            };
            let model = GradientBoosting::fit_presorted(pre, y, bp, kind, |_, _| {})?;
            for (i, row) in z_val.chunks_exact(p).enumerate() {
                let mut acc = model.base;
                let mut c = 0;
                for (t, tree) in model.trees.iter().enumerate() {
                    acc += model.learning_rate * tree.predict(row);
                    while c < counts.len() && counts[c] == t + 1 {
                        staged[c][i] = acc;
                        c += 1;
                    }
                }
            }
        }
    }
    Ok(staged.iter().map(|pred| rmse(y_val, pred)).collect())
}

fn pre_matrix(pre: &Presorted) -> Vec<f64> {
    let (n, p) = (pre.n_rows(), pre.n_features());
    let mut x = vec![0.0; n * p];
    for i in 0..n {
        for j in 0..p {
            x[i * p + j] = pre.value(i, j);
        }
    }
    x
}

fn tie_key(hp: &HyperParams) -> (usize, u32, f64) {
    (hp.n_estimators(), hp.max_depth().unwrap_or(u32::MAX), hp.learning_rate())
}

/// Walk-forward grid search inside a time-ordered training partition.
///
/// The lowest mean validation RMSE wins; ties go to fewer estimators, then
/// shallower trees, then the lower learning rate, then grid order.
pub fn grid_search(train: &Dataset, family: Family, grid: &Grid, seed: u64) -> Result<GridResult> {
    let groups = grid.groups(family, seed)?;
    let folds = walk_forward_folds(train.len())?;
    let p = train.n_features();
    let mut per_fold: Vec<Vec<Vec<f64>>> = Vec::with_capacity(folds.len());
    for (tr, va) in &folds {
        let fold_train = train.slice(tr.clone());
        let std = Standardizer::fit_dataset(&fold_train)?;
        let pre = Presorted::new(&std.transform(&fold_train.x), p);
        let z_val = std.transform(&train.x[va.start * p..va.end * p]);
        let y_val = &train.y[va.clone()];
        let scores = groups
            .par_iter()
            .map(|(hp, counts)| staged_scores(&pre, &fold_train.y, &z_val, y_val, hp, counts))
            .collect::<Result<Vec<_>>>()?;
        per_fold.push(scores);
    }

    let mut scores = Vec::new();
    for (g, (hp, counts)) in groups.iter().enumerate() {
        for (c, &count) in counts.iter().enumerate() {
            let fold_rmse: Vec<f64> = per_fold.iter().map(|f| f[g][c]).collect();
            let mean_rmse = fold_rmse.iter().sum::<f64>() / fold_rmse.len() as f64;
            scores.push(GridScore {
                hyperparams: hp.with_n_estimators(count),
                fold_rmse,
                mean_rmse,
            });
        }
    }
    let best = scores
        .iter()
        .filter(|s| s.mean_rmse.is_finite())
        .min_by(|a, b| {
            a.mean_rmse
                .total_cmp(&b.mean_rmse)
                .then_with(|| {
                    let (ka, kb) = (tie_key(&a.hyperparams), tie_key(&b.hyperparams));
                    ka.0.cmp(&kb.0).then(ka.1.cmp(&kb.1)).then(ka.2.total_cmp(&kb.2))
                })
        })
        .ok_or(MlError::NoFiniteScore)?;
    Ok(GridResult {
        family,
        best: best.hyperparams,
        best_rmse: best.mean_rmse,
        scores: scores.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_boundaries() {
        let f = walk_forward_folds(100).unwrap();
        assert_eq!(f, vec![(0..25, 25..50), (0..50, 50..75), (0..75, 75..100)]);
        assert!(walk_forward_folds(3).is_err());
    }

    #[test]
    fn default_grid_sizes() {
        let g = Grid::default();
        assert_eq!(g.groups(Family::Forest, 0).unwrap().len(), 6);
        assert_eq!(g.groups(Family::Gbm, 0).unwrap().len(), 9);
        assert_eq!(g.groups(Family::Gbm2, 0).unwrap().len(), 18);
        assert_eq!(g.groups(Family::Linear, 0).unwrap().len(), 1);
    }

    #[test]
    fn empty_grid_rejected() {
        let g = Grid {
            n_estimators: vec![],
            ..Default::default()
        };
        assert!(g.groups(Family::Forest, 0).is_err());
    }
}
