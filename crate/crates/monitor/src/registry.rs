use std::path::Path;
use std::sync::Arc;

use corrosion_ingest::FEATURE_NAMES;
use corrosion_ml::{EvalEntry, EvalReport, TrainedModel};
use serde::Serialize;

/// Id of the physics-formula fallback, always selectable.
pub const CONTINGENCY_ID: &str = "contingency";

#[derive(Debug, Clone)]
pub struct ModelEntry {
    pub id: String,
    pub model: Arc<TrainedModel>,
    pub metrics: Option<EvalEntry>,
}

#[derive(Debug, Clone, Default)]
pub struct ModelRegistry {
    entries: Vec<ModelEntry>,
    load_errors: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelInfo {
    pub id: String,
    pub family: Option<String>,
    pub metrics: Option<EvalEntry>,
}

impl ModelRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_models(models: impl IntoIterator<Item = TrainedModel>) -> Self {
        let mut entries: Vec<ModelEntry> = models
            .into_iter()
            .map(|m| ModelEntry {
                id: m.id().to_string(),
                model: Arc::new(m),
                metrics: None,
            })
            .collect();
        entries.sort_by(|a, b| a.id.cmp(&b.id));
        Self {
            entries,
            load_errors: Vec::new(),
        }
    }

    /// Loads every `*.model` file in `dir` plus `eval.json` if present.
    /// Unreadable files are recorded, not fatal.
    pub fn load_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        let mut reg = Self::default();
        let listing = match std::fs::read_dir(dir) {
            Ok(l) => l,
            Err(e) => {
                reg.load_errors.push(format!("{}: {e}", dir.display()));
                return reg;
            }
        };
        let mut paths: Vec<_> = listing
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "model"))
            .collect();
        paths.sort();
        for path in paths {
            match TrainedModel::load_file_expecting(&path, &FEATURE_NAMES) {
                Ok(m) => reg.entries.push(ModelEntry {
                    id: path.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
                    model: Arc::new(m),
                    metrics: None,
                }),
                Err(e) => reg.load_errors.push(format!("{}: {e}", path.display())),
            }
        }
        let eval_path = dir.join("eval.json");
        if eval_path.exists() {
            match std::fs::read(&eval_path)
                .map_err(|e| e.to_string())
                .and_then(|b| serde_json::from_slice::<EvalReport>(&b).map_err(|e| e.to_string()))
            {
                Ok(report) => {
                    for entry in &mut reg.entries {
                        entry.metrics = report.entry(&entry.id).cloned();
                    }
                }
                Err(e) => reg.load_errors.push(format!("{}: {e}", eval_path.display())),
            }
        }
        reg
    }

    pub fn get(&self, id: &str) -> Option<&ModelEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn contains(&self, id: &str) -> bool {
        id == CONTINGENCY_ID || self.get(id).is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn load_errors(&self) -> &[String] {
        &self.load_errors
    }

    /// Highest test R² when metrics are known, otherwise the first id;
    /// contingency when nothing loaded.
    pub fn default_id(&self) -> String {
        let scored = self
            .entries
            .iter()
            .filter_map(|e| e.metrics.as_ref().and_then(|m| m.metrics.r2).map(|r2| (r2, &e.id)))
            .max_by(|a, b| a.0.total_cmp(&b.0));
        match (scored, self.entries.first()) {
            (Some((_, id)), _) => id.clone(),
            (None, Some(e)) => e.id.clone(),
            (None, None) => CONTINGENCY_ID.to_string(),
        }
    }

    pub fn infos(&self) -> Vec<ModelInfo> {
        let mut out: Vec<ModelInfo> = self
            .entries
            .iter()
            .map(|e| ModelInfo {
                id: e.id.clone(),
                family: Some(e.model.family.to_string()),
                metrics: e.metrics.clone(),
            })
            .collect();
        out.push(ModelInfo {
            id: CONTINGENCY_ID.to_string(),
            family: None,
            metrics: None,
        });
        out
    }
}
