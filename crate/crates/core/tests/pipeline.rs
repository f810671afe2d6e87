mod common;

use flexbound::data;
use flexbound::imputation::ImputerMethod;
use flexbound::pipeline::{self, Mode, PipelineConfig, Task, Winner};
use flexbound::signal::FeatureDomain;
use flexbound::{Error, ErrorClass};

fn pair(seed: u64) -> (PipelineConfig, PipelineConfig) {
    let base = PipelineConfig { seed, ..PipelineConfig::default() };
    (
        PipelineConfig { mode: Mode::Bounded, ..base.clone() },
        PipelineConfig { mode: Mode::FlexiblyBounded, ..base },
    )
}

#[test]
fn complete_data_gives_identical_modes() {
    let d = common::decision_truth(7, 200);
    let (b, f) = pair(3);
    let r = pipeline::compare_modes_on(&d, &b, &f, "y").unwrap();
    assert_eq!(r.delta, 0.0);
    assert_eq!(r.winner, Winner::Tie);
    assert_eq!(r.winner_mode, None);
    assert_eq!(r.first.train, r.second.train);
    assert!(r.second.imputation.report.filled_cells.is_empty());
}

#[test]
fn reruns_are_byte_identical() {
    let truth = common::decision_truth(11, 150);
    let (d, _) = data::mask_mcar(&truth, 0.2, &[0, 1, 2], 5).unwrap();
    let (_, f) = pair(9);
    let a = pipeline::run_pipeline_on(&d, &f, "y").unwrap();
    let b = pipeline::run_pipeline_on(&d, &f, "y").unwrap();
    assert_eq!(a.report.to_json(), b.report.to_json());
    assert_eq!(a.model, b.model);
}

#[test]
fn flexible_mode_wins_on_missing_features() {
    let mut wins = 0;
    for s in 0..4u64 {
        let truth = common::decision_truth(100 + s, 500);
        let (d, _) = data::mask_mcar(&truth, 0.2, &[0, 1, 2], s).unwrap();
        let (b, f) = pair(s);
        let r = pipeline::compare_modes_on(&d, &b, &f, "y").unwrap();
        assert_eq!(r.delta, r.second.test_metric.value - r.first.test_metric.value);
        if r.delta >= 0.0 {
            wins += 1;
        }
    }
    assert!(wins >= 3, "flexible won {wins}/4");
}

#[test]
fn bounded_mode_never_runs_the_correlation_machine() {
    let truth = common::decision_truth(2, 120);
    let (d, _) = data::mask_mcar(&truth, 0.2, &[0, 1, 2], 1).unwrap();
    let (b, _) = pair(0);
    let r = pipeline::run_pipeline_on(&d, &b, "y").unwrap().report;
    assert_eq!(r.imputation.report.method, ImputerMethod::ColumnMean);
    assert_eq!(r.imputation.report.seed, None);
    assert!(r.imputation.report.row_errors.is_empty());
    assert_eq!(r.imputation.autoassociative_final_loss, None);
    assert_eq!(r.transform.domain, FeatureDomain::Time);

    let bad = PipelineConfig {
        imputer: pipeline::ImputerConfig {
            method: Some(ImputerMethod::CorrelationMachine),
            ..Default::default()
        },
        ..b.clone()
    };
    let err = pipeline::run_pipeline_on(&d, &bad, "y").unwrap_err();
    assert_eq!(err.class(), ErrorClass::Config);
    let freq = PipelineConfig {
        transform: pipeline::TransformSpec { domain: FeatureDomain::Frequency, ..Default::default() },
        ..b
    };
    assert!(pipeline::run_pipeline_on(&d, &freq, "y").is_err());
}

#[test]
fn flexible_mode_reports_its_imputation() {
    let truth = common::decision_truth(4, 120);
    let (d, hidden) = data::mask_mcar(&truth, 0.2, &[0, 1, 2], 2).unwrap();
    let (_, f) = pair(1);
    let r = pipeline::run_pipeline_on(&d, &f, "y").unwrap().report;
    let imp = &r.imputation.report;
    assert_eq!(imp.method, ImputerMethod::CorrelationMachine);
    assert!(imp.seed.is_some());
    assert_eq!(imp.filled_cells.len(), hidden.iter().filter(|&&h| h).count());
    assert!(r.imputation.autoassociative_final_loss.is_some());
    assert_eq!(r.n_train + r.n_test, 120);
}

#[test]
fn transforms_change_the_feature_width() {
    let rows: Vec<Vec<f64>> = (0..60)
        .map(|i| {
            let t = i as f64 / 60.0;
            let mut r: Vec<f64> = (0..8).map(|k| (t * 6.0 + k as f64).sin()).collect();
            r.push(if t > 0.5 { 1.0 } else { 0.0 });
            r
        })
        .collect();
    let mut names: Vec<String> = (0..8).map(|k| format!("s{k}")).collect();
    names.push("y".into());
    let d = data::Dataset::complete(names, &rows).unwrap();
    let widths: Vec<usize> = [FeatureDomain::Time, FeatureDomain::Frequency, FeatureDomain::TimeFrequency]
        .into_iter()
        .map(|domain| {
            let cfg = PipelineConfig {
                transform: pipeline::TransformSpec { domain, window_size: 4, hop: 2 },
                ..PipelineConfig::default()
            };
            pipeline::run_pipeline_on(&d, &cfg, "y").unwrap().report.feature_len
        })
        .collect();
    // 8 samples; 5 rfft bins; 3 frames × 3 bins
    assert_eq!(widths, vec![8, 5, 9]);
}

#[test]
fn regression_reports_mse() {
    let truth = common::linear_truth(5, 150);
    let cfg = PipelineConfig {
        model: pipeline::ModelConfig { task: Task::Regression, ..Default::default() },
        ..PipelineConfig::default()
    };
    let r = pipeline::run_pipeline_on(&truth, &cfg, "x3").unwrap().report;
    assert_eq!(r.test_metric.kind, pipeline::MetricKind::Mse);
    // x3 = x1 + x2 + N(0, 0.1): noise variance alone is 0.01; predicting the mean costs ~1/6
    assert!(r.test_metric.value < 0.05, "mse {}", r.test_metric.value);
}

#[test]
fn failures_name_their_stage() {
    let truth = common::decision_truth(1, 40);
    let (b, f) = pair(0);
    match pipeline::run_pipeline_on(&truth, &b, "nope") {
        Err(Error::Stage { stage, .. }) => assert_eq!(stage, "ingest"),
        other => panic!("unexpected {other:?}"),
    }
    let (masked_target, _) = data::mask_mcar(&truth, 0.1, &[3], 0).unwrap();
    match pipeline::run_pipeline_on(&masked_target, &b, "y") {
        Err(Error::Stage { stage, .. }) => assert_eq!(stage, "ingest"),
        other => panic!("unexpected {other:?}"),
    }
    match pipeline::run_pipeline_on(&truth, &f, "x3") {
        Err(Error::Stage { stage, .. }) => assert_eq!(stage, "train"),
        other => panic!("unexpected {other:?}"),
    }
    let diverging = PipelineConfig {
        model: pipeline::ModelConfig {
            task: Task::Regression,
            train: flexbound::neural::TrainConfig { learning_rate: 1e200, ..Default::default() },
            ..Default::default()
        },
        ..b
    };
    let err = pipeline::run_pipeline_on(&truth, &diverging, "x3").unwrap_err();
    assert_eq!(err.class(), ErrorClass::Numeric);
}

#[test]
fn compare_requires_a_shared_seed() {
    let d = common::decision_truth(1, 40);
    let (b, _) = pair(0);
    let (_, f) = pair(1);
    assert!(pipeline::compare_modes_on(&d, &b, &f, "y").is_err());
}

#[test]
fn runs_from_a_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let truth = common::decision_truth(3, 80);
    let (d, _) = data::mask_mcar(&truth, 0.2, &[0, 1, 2], 3).unwrap();
    data::write_csv(&d, std::fs::File::create(&path).unwrap()).unwrap();
    let (b, f) = pair(2);
    let from_file = pipeline::compare_modes(&path, &b, &f, "y").unwrap();
    // CSV round trip of the masked data is lossless, so file and memory runs agree
    let in_memory = pipeline::compare_modes_on(&data::load_csv(&path, &data::default_missing_tokens()).unwrap(), &b, &f, "y").unwrap();
    assert_eq!(from_file.to_json(), in_memory.to_json());
}
