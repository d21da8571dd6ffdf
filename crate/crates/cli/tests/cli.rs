use std::path::Path;

use corrosion_cli::{
    cmd_calibrate, cmd_evaluate, cmd_gen_points, cmd_preprocess, cmd_simulate, cmd_train, parse_families, CalibrateArgs,
    EvaluateArgs, GenPointsArgs, PreprocessArgs, SimulateArgs, TrainArgs,
};
use corrosion_core::io::read_params_file;
use corrosion_ingest::{read_features_file, IngestReport};
use corrosion_ml::{EvalReport, Family};

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn pipeline_through_commands() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);

    cmd_gen_points(&GenPointsArgs { c: 2e10, n: 2.5, count: 40, noise: 0.0, seed: 1, out: p("points.csv") }).unwrap();
    cmd_calibrate(&CalibrateArgs { input: p("points.csv"), c0: 50.0, n0: 1.5, out: p("params.json") }).unwrap();
    let params = read_params_file(p("params.json")).unwrap();
    assert!((params.c / 2e10 - 1.0).abs() < 1e-6 && (params.n - 2.5).abs() < 1e-6, "{params:?}");

    cmd_simulate(&SimulateArgs {
        days: Some(2.0),
        seed: Some(3),
        loss_p: Some(0.2),
        config: None,
        out: p("corpus.csv"),
        retransmit: true,
    })
    .unwrap();
    cmd_preprocess(&PreprocessArgs {
        input: p("corpus.csv"),
        params: Some(p("params.json")),
        out: p("features.csv"),
        report: Some(p("report.json")),
        monthly: Some(p("monthly.csv")),
    })
    .unwrap();
    let report: IngestReport = read_json(&p("report.json"));
    assert_eq!(report.rows_read, 14 * 2880);
    assert!(report.is_conserved());
    assert_eq!(read_features_file(p("features.csv")).unwrap().len() as u64, report.feature_rows);
    assert!(std::fs::read_to_string(p("monthly.csv")).unwrap().starts_with("month,"));

    let grid = serde_json::json!({
        "learning_rates": [0.1],
        "n_estimators": [5, 10],
        "max_depths": [3],
        "feature_subsamples": [1.0],
        "lambdas": [0.0],
        "gammas": [0.0]
    });
    std::fs::write(p("grid.json"), grid.to_string()).unwrap();
    cmd_train(&TrainArgs {
        features: p("features.csv"),
        family: "all".into(),
        split: 0.75,
        seed: 42,
        grid: p("grid.json").to_string_lossy().into_owned(),
        sample: Some(3000),
        alarm_threshold: 50.0,
        out: p("models"),
    })
    .unwrap();
    for f in Family::ALL {
        assert!(p("models").join(format!("{f}.model")).exists());
    }
    cmd_evaluate(&EvaluateArgs {
        models: p("models"),
        features: p("features.csv"),
        report: p("eval.json"),
        alarm_threshold: 50.0,
    })
    .unwrap();
    let trained: EvalReport = read_json(&p("models").join("eval.json"));
    let evaluated: EvalReport = read_json(&p("eval.json"));
    assert_eq!((evaluated.n_train, evaluated.n_test), (2250, 750));
    for e in &evaluated.entries {
        let t = trained.entry(&e.model_id).unwrap();
        assert_eq!(t.metrics, e.metrics);
    }
}

#[test]
fn family_selection() {
    assert_eq!(parse_families("all").unwrap(), Family::ALL.to_vec());
    assert_eq!(parse_families("gbm2,linear").unwrap(), vec![Family::Gbm2, Family::Linear]);
    assert!(parse_families("svm").is_err());
}

#[test]
fn evaluate_rejects_mismatched_feature_file() {
    let dir = tempfile::tempdir().unwrap();
    let r = cmd_evaluate(&EvaluateArgs {
        models: dir.path().to_path_buf(),
        features: dir.path().join("missing.csv"),
        report: dir.path().join("eval.json"),
        alarm_threshold: 50.0,
    });
    assert!(r.is_err());
}
