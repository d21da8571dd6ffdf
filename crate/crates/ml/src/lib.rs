//! Regressors for corrosion-rate forecasting: a linear baseline, bagged
//! CART forests and two gradient-boosting variants, trained under a
//! time-ordered split with walk-forward grid search.

mod boost;
mod data;
mod error;
mod forest;
mod grid;
mod linear;
mod metrics;
mod model;
mod pipeline;
mod rng;
mod standardize;
pub mod tree;

pub use boost::{BoostKind, BoostParams, GradientBoosting};
pub use data::{time_order, time_series_split, Dataset, SplitSpec};
pub use error::{MlError, Result};
pub use forest::{ForestParams, RandomForest};
pub use grid::{grid_search, walk_forward_folds, Grid, GridResult, GridScore, N_FOLDS};
pub use linear::{LinearModel, RIDGE_JITTER};
pub use metrics::{alarm_metrics, regression_metrics, AlarmMetrics, RegressionMetrics};
pub use model::{Family, HyperParams, Predictor, TrainedModel, TrainingMeta, FORMAT_MAGIC, FORMAT_VERSION};
pub use pipeline::{evaluate, evaluate_all, partition, train_families, EvalEntry, EvalReport, TrainConfig, TrainRun};
pub use rng::{splitmix64, tree_seed};
pub use standardize::Standardizer;
pub use tree::{Node, Presorted, RegressionTree, TreeParams};
