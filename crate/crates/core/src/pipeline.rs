//! End-to-end decision pipeline in two modes.
//!
//! `bounded`: column-mean (or zero) imputation, raw time-domain features.
//! `flexibly_bounded`: correlation-machine imputation and an optional
//! frequency or time-frequency transform. Both modes then train the same
//! MLP decision model on a seeded split and score it on the held-out rows.
//!
//! Every random stream (split, autoassociative net, GA, decision net) is
//! derived from `PipelineConfig::seed`, so equal configs give equal reports.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{self, ColumnRange, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::evolve::GaConfig;
use crate::imputation::{self, ImputationReport, ImputationResult, ImputerMethod, ImputerSpec};
use crate::neural::{self, Activation, MlpParams, TrainConfig, TrainReport};
use crate::seed;
use crate::signal::{self, FeatureDomain, TransformParams};

const STREAM_SPLIT: u64 = 1;
const STREAM_MODEL_TRAIN: u64 = 2;
const STREAM_AUTOASSOC: u64 = 3;
const STREAM_GA: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Bounded,
    FlexiblyBounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Target in {0, 1}; sigmoid output, scored by accuracy at 0.5.
    Classification,
    /// Real target; linear output, scored by test MSE in target units.
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformSpec {
    pub domain: FeatureDomain,
    pub window_size: usize,
    pub hop: usize,
}

impl Default for TransformSpec {
    fn default() -> Self {
        let p = TransformParams::default();
        TransformSpec {
            domain: FeatureDomain::Time,
            window_size: p.window_size,
            hop: p.hop,
        }
    }
}

impl TransformSpec {
    pub fn params(&self) -> TransformParams {
        TransformParams {
            window_size: self.window_size,
            hop: self.hop,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImputerConfig {
    /// Defaults to the mode's family: `column_mean` or `correlation_machine`.
    pub method: Option<ImputerMethod>,
    /// Autoassociative bottleneck width; defaults to `max(2, round(0.75·n))`.
    pub hidden_size: Option<usize>,
    pub train: TrainConfig,
}

impl Default for ImputerConfig {
    fn default() -> Self {
        ImputerConfig {
            method: None,
            hidden_size: None,
            train: TrainConfig {
                learning_rate: 0.5,
                epochs: 300,
                batch_size: 8,
                ..TrainConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub task: Task,
    pub hidden_size: Option<usize>,
    pub train: TrainConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            task: Task::Classification,
            hidden_size: None,
            train: TrainConfig {
                learning_rate: 0.5,
                epochs: 200,
                batch_size: 16,
                ..TrainConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub transform: TransformSpec,
    pub imputer: ImputerConfig,
    pub model: ModelConfig,
    /// Per-row GA template; bounds and seed are set by the pipeline.
    pub ga: GaConfig,
    pub seed: u64,
    pub train_fraction: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: Mode::FlexiblyBounded,
            transform: TransformSpec::default(),
            imputer: ImputerConfig::default(),
            model: ModelConfig::default(),
            ga: GaConfig::default(),
            seed: 0,
            train_fraction: 0.8,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn imputer_method(&self) -> ImputerMethod {
        self.imputer.method.unwrap_or(match self.mode {
            Mode::Bounded => ImputerMethod::ColumnMean,
            Mode::FlexiblyBounded => ImputerMethod::CorrelationMachine,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        match (self.mode, self.imputer_method()) {
            (Mode::Bounded, ImputerMethod::CorrelationMachine) => {
                return bad("bounded mode cannot use the correlation machine".into())
            }
            (Mode::FlexiblyBounded, m @ (ImputerMethod::ColumnMean | ImputerMethod::ZeroFill)) => {
                return bad(format!("flexibly_bounded mode requires correlation_machine, got {}", m.name()))
            }
            _ => {}
        }
        if self.mode == Mode::Bounded && self.transform.domain != FeatureDomain::Time {
            return bad("bounded mode only uses time-domain features".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train_fraction must lie in (0, 1), got {}", self.train_fraction));
        }
        if self.imputer.hidden_size == Some(0) || self.model.hidden_size == Some(0) {
            return bad("hidden_size must be positive".into());
        }
        self.imputer.train.validate()?;
        self.model.train.validate()?;
        self.ga.clone().with_bounds(vec![(0.0, 1.0)]).validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Accuracy,
    Mse,
}

impl MetricKind {
    pub fn higher_is_better(self) -> bool {
        matches!(self, MetricKind::Accuracy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub kind: MetricKind,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputationSection {
    #[serde(flatten)]
    pub report: ImputationReport,
    pub autoassociative_final_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub mode: Mode,
    pub seed: u64,
    pub target_column: String,
    pub transform: TransformSpec,
    pub n_rows: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub feature_len: usize,
    pub imputation: ImputationSection,
    pub train: TrainReport,
    pub test_metric: Metric,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// A finished run: the report plus the trained decision model.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub report: PipelineReport,
    pub model: MlpParams,
}

pub fn run_pipeline(data_path: impl AsRef<Path>, cfg: &PipelineConfig, target_column: &str) -> Result<PipelineRun> {
    let d = data::load_csv(data_path, &data::default_missing_tokens()).map_err(Error::stage("ingest"))?;
    run_pipeline_on(&d, cfg, target_column)
}

/// Impute `features` with the configured method. Seeds for the
/// autoassociative net and the GA are derived from `cfg.seed`.
pub fn impute_features(features: &Dataset, cfg: &PipelineConfig) -> Result<(ImputationResult, ImputationSection)> {
    let (result, ae_loss, seed) = impute_stage(features, cfg)?;
    let section = ImputationSection {
        report: result.report(seed),
        autoassociative_final_loss: ae_loss,
    };
    Ok((result, section))
}

fn impute_stage(features: &Dataset, cfg: &PipelineConfig) -> Result<(ImputationResult, Option<f64>, Option<u64>)> {
    match cfg.imputer_method() {
        ImputerMethod::ColumnMean => Ok((imputation::impute_dataset(features, &ImputerSpec::ColumnMean)?, None, None)),
        ImputerMethod::ZeroFill => Ok((imputation::impute_dataset(features, &ImputerSpec::ZeroFill)?, None, None)),
        ImputerMethod::CorrelationMachine => {
            let ga_seed = seed::derive(cfg.seed, STREAM_GA);
            if features.is_complete() {
                let result = ImputationResult {
                    completed: features.clone(),
                    filled_cells: Vec::new(),
                    row_errors: Vec::new(),
                    method: ImputerMethod::CorrelationMachine,
                };
                return Ok((result, None, Some(ga_seed)));
            }
            let train = TrainConfig {
                seed: seed::derive(cfg.seed, STREAM_AUTOASSOC),
                ..cfg.imputer.train
            };
            let hidden = cfg
                .imputer
                .hidden_size
                .unwrap_or_else(|| neural::default_hidden_size(features.n_cols()));
            let ga = GaConfig {
                seed: ga_seed,
                ..cfg.ga.clone()
            };
            let (spec, report) = imputation::fit_correlation_machine(features, &train, hidden, ga)?;
            let result = imputation::impute_dataset(features, &spec)?;
            Ok((result, Some(report.final_loss), Some(ga_seed)))
        }
    }
}

fn fit_ranges(rows: &[Vec<f64>], which: &[usize], width: usize) -> Vec<ColumnRange> {
    (0..width)
        .map(|c| {
            which.iter().map(|&r| rows[r][c]).fold(
                ColumnRange {
                    min: f64::INFINITY,
                    max: f64::NEG_INFINITY,
                },
                |acc, v| ColumnRange {
                    min: acc.min.min(v),
                    max: acc.max.max(v),
                },
            )
        })
        .collect()
}

pub fn run_pipeline_on(d: &Dataset, cfg: &PipelineConfig, target_column: &str) -> Result<PipelineRun> {
    cfg.validate().map_err(Error::stage("config"))?;
    let target_idx = d.column_index(target_column).map_err(Error::stage("ingest"))?;
    if !d.column_is_complete(target_idx) {
        return Err(Error::stage("ingest")(Error::InvalidInput(format!(
            "target column {target_column:?} has missing cells"
        ))));
    }
    let feature_cols: Vec<usize> = (0..d.n_cols()).filter(|&c| c != target_idx).collect();
    if feature_cols.is_empty() {
        return Err(Error::stage("ingest")(Error::InvalidInput("no feature columns".into())));
    }
    let features = d.select_columns(&feature_cols);
    let targets: Vec<f64> = d.observed_column(target_idx).collect();

    let params = data::fit_normalization(&features).map_err(Error::stage("normalize"))?;

    let (imputed, imputation) = impute_features(&features, cfg).map_err(Error::stage("impute"))?;

    let rows = data::normalize(&imputed.completed, &params)
        .and_then(|n| n.to_rows())
        .map_err(Error::stage("normalize"))?;
    let domain = match cfg.mode {
        Mode::Bounded => FeatureDomain::Time,
        Mode::FlexiblyBounded => cfg.transform.domain,
    };
    let tparams = cfg.transform.params();
    let mut feats = rows
        .iter()
        .map(|r| signal::extract_features(r, domain, &tparams))
        .collect::<Result<Vec<_>>>()
        .map_err(Error::stage("transform"))?;
    let feature_len = feats[0].len();

    let (train_idx, test_idx) = data::split_indices(
        d.n_rows(),
        &SplitSpec {
            train_fraction: cfg.train_fraction,
            seed: seed::derive(cfg.seed, STREAM_SPLIT),
        },
    )
    .map_err(Error::stage("split"))?;

    // scale features with ranges seen on the training rows only
    let ranges = fit_ranges(&feats, &train_idx, feature_len);
    for f in &mut feats {
        for (v, r) in f.iter_mut().zip(&ranges) {
            *v = r.normalize(*v);
        }
    }

    let (output, target_range) = match cfg.model.task {
        Task::Classification => {
            if let Some(t) = targets.iter().find(|&&t| t != 0.0 && t != 1.0) {
                return Err(Error::stage("train")(Error::InvalidInput(format!(
                    "classification target must be 0 or 1, found {t}"
                ))));
            }
            (Activation::Sigmoid, None)
        }
        Task::Regression => {
            let all: Vec<usize> = (0..targets.len()).collect();
            let col: Vec<Vec<f64>> = targets.iter().map(|&t| vec![t]).collect();
            (Activation::Linear, Some(fit_ranges(&col, &all, 1)[0]))
        }
    };
    let scaled_target = |t: f64| target_range.map_or(t, |r| r.normalize(t));

    let xs: Vec<Vec<f64>> = train_idx.iter().map(|&i| feats[i].clone()).collect();
    let ys: Vec<Vec<f64>> = train_idx.iter().map(|&i| vec![scaled_target(targets[i])]).collect();
    let hidden = cfg
        .model
        .hidden_size
        .unwrap_or_else(|| neural::default_hidden_size(feature_len));
    let train_cfg = TrainConfig {
        seed: seed::derive(cfg.seed, STREAM_MODEL_TRAIN),
        ..cfg.model.train
    };
    let init = MlpParams::init_uniform(
        &[feature_len, hidden, 1],
        Activation::Tanh,
        output,
        train_cfg.init_scale,
        train_cfg.seed,
    )
    .map_err(Error::stage("train"))?;
    let (model, train_report) = neural::train(&init, &xs, &ys, &train_cfg).map_err(Error::stage("train"))?;

    let mut hits = 0usize;
    let mut sq = 0.0;
    for &i in &test_idx {
        let y = model.forward(&feats[i]).map_err(Error::stage("evaluate"))?[0];
        match target_range {
            None => hits += usize::from((y >= 0.5) == (targets[i] >= 0.5)),
            Some(r) => sq += (r.denormalize(y) - targets[i]).powi(2),
        }
    }
    let test_metric = match cfg.model.task {
        Task::Classification => Metric {
            kind: MetricKind::Accuracy,
            value: hits as f64 / test_idx.len() as f64,
        },
        Task::Regression => Metric {
            kind: MetricKind::Mse,
            value: sq / test_idx.len() as f64,
        },
    };

    Ok(PipelineRun {
        report: PipelineReport {
            mode: cfg.mode,
            seed: cfg.seed,
            target_column: target_column.to_string(),
            transform: TransformSpec { domain, ..cfg.transform },
            n_rows: d.n_rows(),
            n_train: train_idx.len(),
            n_test: test_idx.len(),
            feature_len,
            imputation,
            train: train_report,
            test_metric,
        },
        model,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    First,
    Second,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub first: PipelineReport,
    pub second: PipelineReport,
    pub metric: MetricKind,
    /// `second − first` in the shared test metric.
    pub delta: f64,
    pub winner: Winner,
    pub winner_mode: Option<Mode>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn compare_modes(
    data_path: impl AsRef<Path>,
    first: &PipelineConfig,
    second: &PipelineConfig,
    target_column: &str,
) -> Result<ComparisonReport> {
    let d = data::load_csv(data_path, &data::default_missing_tokens()).map_err(Error::stage("ingest"))?;
    compare_modes_on(&d, first, second, target_column)
}

/// Run both configurations (concurrently) and report the metric delta.
pub fn compare_modes_on(
    d: &Dataset,
    first: &PipelineConfig,
    second: &PipelineConfig,
    target_column: &str,
) -> Result<ComparisonReport> {
    if first.seed != second.seed {
        return Err(Error::InvalidConfig(format!(
            "compared configs must share a seed ({} vs {})",
            first.seed, second.seed
        )));
    }
    if first.model.task != second.model.task {
        return Err(Error::InvalidConfig("compared configs must share a task".into()));
    }
    let (a, b) = std::thread::scope(|s| {
        let h = s.spawn(|| run_pipeline_on(d, second, target_column));
        let a = run_pipeline_on(d, first, target_column);
        (a, h.join().expect("pipeline thread panicked"))
    });
    let (a, b) = (a?.report, b?.report);
    let metric = a.test_metric.kind;
    let delta = b.test_metric.value - a.test_metric.value;
    let gain = if metric.higher_is_better() { delta } else { -delta };
    let winner = if gain > 0.0 {
        Winner::Second
    } else if gain < 0.0 {
        Winner::First
    } else {
        Winner::Tie
    };
    let winner_mode = match winner {
        Winner::First => Some(a.mode),
        Winner::Second => Some(b.mode),
        Winner::Tie => None,
    };
    Ok(ComparisonReport {
        first: a,
        second: b,
        metric,
        delta,
        winner,
        winner_mode,
    })
}
