use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::boost::{BoostKind, BoostParams, GradientBoosting};
use crate::data::Dataset;
use crate::error::{MlError, Result};
use crate::forest::{ForestParams, RandomForest};
use crate::linear::LinearModel;
use crate::standardize::Standardizer;

pub const FORMAT_MAGIC: &str = "HCM-MODEL";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Linear,
    Forest,
    Gbm,
    Gbm2,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Linear, Family::Forest, Family::Gbm, Family::Gbm2];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Linear => "linear",
            Family::Forest => "forest",
            Family::Gbm => "gbm",
            Family::Gbm2 => "gbm2",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = MlError;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| MlError::InvalidHyperparams(format!("unknown model family `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum HyperParams {
    Linear,
    Forest(ForestParams),
    Gbm(BoostParams),
    Gbm2(BoostParams),
}

impl HyperParams {
    pub fn family(&self) -> Family {
        match self {
            HyperParams::Linear => Family::Linear,
            HyperParams::Forest(_) => Family::Forest,
            HyperParams::Gbm(_) => Family::Gbm,
            HyperParams::Gbm2(_) => Family::Gbm2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            HyperParams::Linear => Ok(()),
            HyperParams::Forest(p) => p.validate(),
            HyperParams::Gbm(p) => {
                if p.lambda != 0.0 || p.gamma != 0.0 {
                    return Err(MlError::InvalidHyperparams("gbm takes no lambda or gamma".into()));
                }
                p.validate()
            }
            HyperParams::Gbm2(p) => p.validate(),
        }
    }

    /// Trees or rounds; 0 for the linear model.
    pub fn n_estimators(&self) -> usize {
        match self {
            HyperParams::Linear => 0,
            HyperParams::Forest(p) => p.n_trees,
            HyperParams::Gbm(p) | HyperParams::Gbm2(p) => p.n_rounds,
        }
    }

    pub fn max_depth(&self) -> Option<u32> {
        match self {
            HyperParams::Linear => Some(0),
            HyperParams::Forest(p) => p.max_depth,
            HyperParams::Gbm(p) | HyperParams::Gbm2(p) => p.max_depth,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        match self {
            HyperParams::Gbm(p) | HyperParams::Gbm2(p) => p.learning_rate,
            _ => 0.0,
        }
    }

    pub(crate) fn with_n_estimators(mut self, n: usize) -> Self {
        match &mut self {
            HyperParams::Linear => {}
            HyperParams::Forest(p) => p.n_trees = n,
            HyperParams::Gbm(p) | HyperParams::Gbm2(p) => p.n_rounds = n,
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Predictor {
    Linear(LinearModel),
    Forest(RandomForest),
    Boosted(GradientBoosting),
}

impl Predictor {
    pub fn predict(&self, z: &[f64]) -> f64 {
        match self {
            Predictor::Linear(m) => m.predict(z),
            Predictor::Forest(m) => m.predict(z),
            Predictor::Boosted(m) => m.predict(z),
        }
    }

    /// Fits on already standardised rows.
    pub fn fit(z: &[f64], p: usize, y: &[f64], hp: &HyperParams) -> Result<Self> {
        hp.validate()?;
        Ok(match hp {
            HyperParams::Linear => Predictor::Linear(LinearModel::fit(z, p, y)?),
            HyperParams::Forest(fp) => Predictor::Forest(RandomForest::fit(z, p, y, fp)?),
            HyperParams::Gbm(bp) => Predictor::Boosted(GradientBoosting::fit(z, p, y, bp, BoostKind::FirstOrder)?),
            HyperParams::Gbm2(bp) => Predictor::Boosted(GradientBoosting::fit(z, p, y, bp, BoostKind::SecondOrder)?),
        })
    }
}

/// How the training rows were chosen, so evaluation can rebuild the test set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub split_fraction: f64,
    /// Rows sampled from the feature file before splitting; `None` means all.
    pub sample_size: Option<usize>,
    pub seed: u64,
    pub train_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub family: Family,
    pub hyperparams: HyperParams,
    pub features: Vec<String>,
    pub standardizer: Standardizer,
    pub predictor: Predictor,
    /// Wall-clock seconds of the final fit, millisecond resolution.
    pub train_seconds: f64,
    pub meta: TrainingMeta,
}

pub(crate) fn millis(start: Instant) -> f64 {
    start.elapsed().as_millis() as f64 / 1000.0
}

impl TrainedModel {
    /// Fits the standardiser and the predictor on `train`.
    pub fn train(train: &Dataset, hp: &HyperParams, meta: TrainingMeta) -> Result<Self> {
        if train.is_empty() {
            return Err(MlError::EmptyDataset);
        }
        let standardizer = Standardizer::fit_dataset(train)?;
        let z = standardizer.transform(&train.x);
        let start = Instant::now();
        let predictor = Predictor::fit(&z, train.n_features(), &train.y, hp)?;
        let train_seconds = millis(start);
        Ok(Self {
            family: hp.family(),
            hyperparams: *hp,
            features: train.features.clone(),
            standardizer,
            predictor,
            train_seconds,
            meta: TrainingMeta {
                train_rows: train.len(),
                ..meta
            },
        })
    }

    pub fn id(&self) -> &'static str {
        self.family.as_str()
    }

    /// `row` holds raw feature values in `self.features` order; NaN is missing.
    pub fn predict(&self, row: &[f64]) -> f64 {
        let z = self.standardizer.transform_row(row);
        self.predictor.predict(&z)
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Vec<f64> {
        let p = self.features.len();
        let mut z = vec![0.0; p];
        data.x
            .chunks_exact(p)
            .map(|row| {
                self.standardizer.transform_into(row, &mut z);
                self.predictor.predict(&z)
            })
            .collect()
    }

    /// Everything learned from data, as JSON; excludes timings.
    pub fn fingerprint(&self) -> String {
        serde_json::to_string(&(&self.hyperparams, &self.features, &self.standardizer, &self.predictor, &self.meta))
            .expect("model serialises")
    }

    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{FORMAT_MAGIC} {FORMAT_VERSION}")?;
        serde_json::to_writer(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn save_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.save(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load<R: BufRead>(mut r: R) -> Result<Self> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(FORMAT_MAGIC) {
            return Err(MlError::CorruptModel("missing format header".into()));
        }
        let version = parts.next().unwrap_or("").to_string();
        if version != FORMAT_VERSION.to_string() {
            return Err(MlError::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let model: TrainedModel = serde_json::from_reader(r).map_err(|e| MlError::CorruptModel(e.to_string()))?;
        model.check_consistency()?;
        Ok(model)
    }

    pub fn load_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::load(BufReader::new(File::open(path)?))
    }

    /// Loads and checks the feature list against `expected`.
    pub fn load_file_expecting(path: impl AsRef<Path>, expected: &[&str]) -> Result<Self> {
        let model = Self::load_file(path)?;
        if model.features.iter().map(String::as_str).ne(expected.iter().copied()) {
            return Err(MlError::SchemaMismatch {
                expected: expected.iter().map(|s| s.to_string()).collect(),
                found: model.features,
            });
        }
        Ok(model)
    }

    fn check_consistency(&self) -> Result<()> {
        let p = self.features.len();
        let ok = self.standardizer.mean.len() == p
            && self.standardizer.std.len() == p
            && self.hyperparams.family() == self.family
            && match &self.predictor {
                Predictor::Linear(m) => m.weights.len() == p && self.family == Family::Linear,
                Predictor::Forest(f) => !f.trees.is_empty() && self.family == Family::Forest,
                Predictor::Boosted(_) => matches!(self.family, Family::Gbm | Family::Gbm2),
            };
        let trees_ok = match &self.predictor {
            Predictor::Linear(_) => true,
            Predictor::Forest(f) => f.trees.iter().all(|t| tree_ok(t, p)),
            Predictor::Boosted(b) => b.trees.iter().all(|t| tree_ok(t, p)),
        };
        if ok && trees_ok {
            Ok(())
        } else {
            Err(MlError::CorruptModel("inconsistent model structure".into()))
        }
    }
}

fn tree_ok(t: &crate::tree::RegressionTree, p: usize) -> bool {
    use crate::tree::Node;
    let n = t.nodes().len();
    n > 0
        && t.nodes().iter().enumerate().all(|(i, node)| match *node {
            Node::Leaf { .. } => true,
            Node::Split {
                feature, left, right, ..
            } => (feature as usize) < p && (left as usize) > i && (right as usize) > i && (left as usize) < n && (right as usize) < n,
        })
}
