use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{time_series_split, Dataset, SplitSpec};
use crate::error::{MlError, Result};
use crate::grid::{grid_search, Grid, GridResult};
use crate::metrics::{alarm_metrics, regression_metrics, AlarmMetrics, RegressionMetrics};
use crate::model::{millis, Family, HyperParams, TrainedModel, TrainingMeta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub families: Vec<Family>,
    pub split: SplitSpec,
    pub sample_size: Option<usize>,
    pub seed: u64,
    pub grid: Grid,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            families: Family::ALL.to_vec(),
            split: SplitSpec::default(),
            sample_size: None,
            seed: 42,
            grid: Grid::default(),
        }
    }
}

impl TrainConfig {
    fn meta(&self) -> TrainingMeta {
        TrainingMeta {
            split_fraction: self.split.train_fraction,
            sample_size: self.sample_size,
            seed: self.seed,
            train_rows: 0,
        }
    }
}

/// Applies the optional sampling and the time-ordered split recorded in `meta`.
pub fn partition(data: &Dataset, meta: &TrainingMeta) -> Result<(Dataset, Dataset)> {
    let sampled;
    let data = match meta.sample_size {
        Some(k) => {
            sampled = data.sample(k, meta.seed);
            &sampled
        }
        None => data,
    };
    time_series_split(data, SplitSpec::new(meta.split_fraction))
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub models: Vec<TrainedModel>,
    pub searches: Vec<GridResult>,
    pub train: Dataset,
    pub test: Dataset,
}

/// Split, grid-search each family on the training partition, then refit
/// the winner on the whole training partition.
pub fn train_families(data: &Dataset, config: &TrainConfig) -> Result<TrainRun> {
    let meta = config.meta();
    let (train, test) = partition(data, &meta)?;
    let mut models = Vec::new();
    let mut searches = Vec::new();
    for &family in &config.families {
        let search = grid_search(&train, family, &config.grid, config.seed)?;
        models.push(TrainedModel::train(&train, &search.best, meta)?);
        searches.push(search);
    }
    Ok(TrainRun {
        models,
        searches,
        train,
        test,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalEntry {
    pub model_id: String,
    pub family: Family,
    pub hyperparams: HyperParams,
    pub metrics: RegressionMetrics,
    pub alarm: AlarmMetrics,
    pub train_seconds: f64,
    /// Whole test set, millisecond resolution.
    pub inference_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub split_fraction: f64,
    pub sample_size: Option<usize>,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub entries: Vec<EvalEntry>,
}

impl EvalReport {
    pub fn entry(&self, model_id: &str) -> Option<&EvalEntry> {
        self.entries.iter().find(|e| e.model_id == model_id)
    }
}

pub fn evaluate(model: &TrainedModel, test: &Dataset, alarm_threshold: f64) -> Result<EvalEntry> {
    if test.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    if test.features != model.features {
        return Err(MlError::SchemaMismatch {
            expected: test.features.clone(),
            found: model.features.clone(),
        });
    }
    let start = Instant::now();
    let pred = model.predict_dataset(test);
    let inference_seconds = millis(start);
    Ok(EvalEntry {
        model_id: model.id().to_string(),
        family: model.family,
        hyperparams: model.hyperparams,
        metrics: regression_metrics(&test.y, &pred)?,
        alarm: alarm_metrics(&test.y, &pred, alarm_threshold),
        train_seconds: model.train_seconds,
        inference_seconds,
    })
}

pub fn evaluate_all(models: &[TrainedModel], train_rows: usize, test: &Dataset, alarm_threshold: f64) -> Result<EvalReport> {
    let first = models.first().ok_or(MlError::EmptyDataset)?;
    Ok(EvalReport {
        split_fraction: first.meta.split_fraction,
        sample_size: first.meta.sample_size,
        seed: first.meta.seed,
        n_train: train_rows,
        n_test: test.len(),
        entries: models
            .iter()
            .map(|m| evaluate(m, test, alarm_threshold))
            .collect::<Result<_>>()?,
    })
}
