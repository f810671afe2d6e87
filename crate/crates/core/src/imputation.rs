//! Missing-value estimation.
//!
//! The correlation machine searches each incomplete row's missing
//! coordinates with the genetic algorithm, minimizing the squared
//! reconstruction error of an autoassociative network. Column-mean and
//! zero-fill imputers are the baselines.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{self, Dataset, NormalizationParams};
use crate::error::{Error, Result};
use crate::evolve::{self, GaConfig};
use crate::neural::{self, MlpParams, TrainConfig, TrainReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputerMethod {
    CorrelationMachine,
    ColumnMean,
    ZeroFill,
}

impl ImputerMethod {
    pub fn name(self) -> &'static str {
        match self {
            ImputerMethod::CorrelationMachine => "correlation_machine",
            ImputerMethod::ColumnMean => "column_mean",
            ImputerMethod::ZeroFill => "zero_fill",
        }
    }
}

impl std::str::FromStr for ImputerMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "correlation_machine" => Ok(ImputerMethod::CorrelationMachine),
            "column_mean" => Ok(ImputerMethod::ColumnMean),
            "zero_fill" => Ok(ImputerMethod::ZeroFill),
            other => Err(Error::InvalidConfig(format!("unknown imputer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImputerSpec {
    CorrelationMachine {
        /// Autoassociative network over all columns, in normalized units.
        net: MlpParams,
        /// Template; bounds are replaced per row and the seed is offset by row index.
        ga: GaConfig,
        /// Scale the network was trained in. Fitted from the dataset when absent.
        normalization: Option<NormalizationParams>,
    },
    ColumnMean,
    ZeroFill,
}

impl ImputerSpec {
    pub fn method(&self) -> ImputerMethod {
        match self {
            ImputerSpec::CorrelationMachine { .. } => ImputerMethod::CorrelationMachine,
            ImputerSpec::ColumnMean => ImputerMethod::ColumnMean,
            ImputerSpec::ZeroFill => ImputerMethod::ZeroFill,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilledCell {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowError {
    pub row: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImputationResult {
    pub completed: Dataset,
    pub filled_cells: Vec<FilledCell>,
    /// Final reconstruction error of every row the correlation machine filled.
    pub row_errors: Vec<RowError>,
    pub method: ImputerMethod,
}

/// Serializable summary of an [`ImputationResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputationReport {
    pub method: ImputerMethod,
    pub seed: Option<u64>,
    pub filled_cells: Vec<FilledCell>,
    pub row_errors: Vec<RowError>,
}

impl ImputationResult {
    pub fn report(&self, seed: Option<u64>) -> ImputationReport {
        ImputationReport {
            method: self.method,
            seed,
            filled_cells: self.filled_cells.clone(),
            row_errors: self.row_errors.clone(),
        }
    }
}

/// `‖x − forward(net, x)‖²`.
pub fn reconstruction_error(net: &MlpParams, x: &[f64]) -> Result<f64> {
    if net.output_size() != x.len() {
        return Err(Error::ShapeMismatch {
            context: "autoassociative output width",
            expected: x.len(),
            found: net.output_size(),
        });
    }
    let y = net.forward(x)?;
    Ok(x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Fill the masked coordinates of one normalized row. The genome covers the
/// missing coordinates only, each bounded to `[0, 1]`.
pub fn impute_row(net: &MlpParams, row: &[f64], observed: &[bool], ga: &GaConfig) -> Result<(Vec<f64>, f64)> {
    if row.len() != observed.len() {
        return Err(Error::ShapeMismatch {
            context: "row mask width",
            expected: row.len(),
            found: observed.len(),
        });
    }
    if net.input_size() != row.len() || net.output_size() != row.len() {
        return Err(Error::ShapeMismatch {
            context: "correlation machine width",
            expected: row.len(),
            found: net.input_size(),
        });
    }
    let missing: Vec<usize> = (0..row.len()).filter(|&i| !observed[i]).collect();
    if missing.is_empty() {
        return Err(Error::NothingToImpute { row: 0 });
    }
    let merge = |genome: &[f64]| {
        let mut x = row.to_vec();
        for (&i, &g) in missing.iter().zip(genome) {
            x[i] = g;
        }
        x
    };
    let cfg = GaConfig {
        bounds: vec![(0.0, 1.0); missing.len()],
        ..ga.clone()
    };
    let report = evolve::run(
        |g| reconstruction_error(net, &merge(g)).unwrap_or(f64::NAN),
        &cfg,
    )?;
    Ok((merge(&report.best_genome), report.best_fitness))
}

/// Normalize `d`, train an autoassociative net on its complete rows and
/// package it as a correlation-machine spec.
pub fn fit_correlation_machine(
    d: &Dataset,
    train: &TrainConfig,
    hidden_size: usize,
    ga: GaConfig,
) -> Result<(ImputerSpec, TrainReport)> {
    let params = data::fit_normalization(d)?;
    let normalized = data::normalize(d, &params)?;
    let complete = normalized.complete_row_indices();
    if complete.is_empty() {
        return Err(Error::InvalidInput(
            "correlation machine needs at least one complete row to train on".into(),
        ));
    }
    let rows = normalized.select_rows(&complete).to_rows()?;
    let (net, report) = neural::train_autoassociative(&rows, train, hidden_size)?;
    Ok((
        ImputerSpec::CorrelationMachine {
            net,
            ga,
            normalization: Some(params),
        },
        report,
    ))
}

pub fn impute_dataset(d: &Dataset, spec: &ImputerSpec) -> Result<ImputationResult> {
    // every column needs an observed cell, whichever method runs
    let fitted = data::fit_normalization(d)?;
    let incomplete: Vec<usize> = (0..d.n_rows()).filter(|&r| !d.is_row_complete(r)).collect();
    let (filled_cells, row_errors) = match spec {
        ImputerSpec::ColumnMean => {
            let means: Vec<f64> = (0..d.n_cols())
                .map(|c| {
                    let (sum, n) = d.observed_column(c).fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
                    sum / n as f64
                })
                .collect();
            (fill_missing(d, &incomplete, |_, c| means[c]), Vec::new())
        }
        ImputerSpec::ZeroFill => (fill_missing(d, &incomplete, |_, _| 0.0), Vec::new()),
        ImputerSpec::CorrelationMachine { net, ga, normalization } => {
            let params = normalization.as_ref().unwrap_or(&fitted);
            if net.input_size() != d.n_cols() {
                return Err(Error::ShapeMismatch {
                    context: "correlation machine input size vs dataset columns",
                    expected: d.n_cols(),
                    found: net.input_size(),
                });
            }
            let normalized = data::normalize(d, params)?;
            let solve = |&r: &usize| -> Result<(usize, Vec<f64>, f64)> {
                let row_ga = GaConfig {
                    seed: ga.seed.wrapping_add(r as u64),
                    parallel: false,
                    ..ga.clone()
                };
                let (x, err) = impute_row(net, normalized.row(r), normalized.row_mask(r), &row_ga)
                    .map_err(|e| match e {
                        Error::NothingToImpute { .. } => Error::NothingToImpute { row: r },
                        other => other,
                    })?;
                Ok((r, x, err))
            };
            let solved: Vec<(usize, Vec<f64>, f64)> = if ga.parallel {
                incomplete.par_iter().map(solve).collect::<Result<_>>()?
            } else {
                incomplete.iter().map(solve).collect::<Result<_>>()?
            };
            let mut cells = Vec::new();
            let mut errors = Vec::with_capacity(solved.len());
            for (r, x, err) in solved {
                for c in 0..d.n_cols() {
                    if !d.is_observed(r, c) {
                        let range = &params.columns[c];
                        let value = range.denormalize(x[c]).clamp(range.min, range.max);
                        cells.push(FilledCell { row: r, col: c, value });
                    }
                }
                errors.push(RowError { row: r, error: err });
            }
            (cells, errors)
        }
    };
    let triples: Vec<(usize, usize, f64)> = filled_cells.iter().map(|f| (f.row, f.col, f.value)).collect();
    Ok(ImputationResult {
        completed: d.with_filled(&triples)?,
        filled_cells,
        row_errors,
        method: spec.method(),
    })
}

fn fill_missing(d: &Dataset, rows: &[usize], value: impl Fn(usize, usize) -> f64) -> Vec<FilledCell> {
    rows.iter()
        .flat_map(|&r| (0..d.n_cols()).map(move |c| (r, c)))
        .filter(|&(r, c)| !d.is_observed(r, c))
        .map(|(r, c)| FilledCell {
            row: r,
            col: c,
            value: value(r, c),
        })
        .collect()
}

/// RMSE between `truth` and the completed dataset over cells flagged in
/// `eval_mask` (row-major, same shape as the data).
pub fn evaluate_imputation(truth: &Dataset, result: &ImputationResult, eval_mask: &[bool]) -> Result<f64> {
    let done = &result.completed;
    if truth.n_rows() != done.n_rows() || truth.n_cols() != done.n_cols() {
        return Err(Error::ShapeMismatch {
            context: "truth vs imputed cell count",
            expected: truth.n_rows() * truth.n_cols(),
            found: done.n_rows() * done.n_cols(),
        });
    }
    if eval_mask.len() != truth.values().len() {
        return Err(Error::ShapeMismatch {
            context: "evaluation mask",
            expected: truth.values().len(),
            found: eval_mask.len(),
        });
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for (i, _) in eval_mask.iter().enumerate().filter(|(_, &m)| m) {
        let (r, c) = (i / truth.n_cols(), i % truth.n_cols());
        let t = truth
            .get(r, c)
            .ok_or_else(|| Error::InvalidInput(format!("truth cell ({r}, {c}) is not observed")))?;
        let v = done
            .get(r, c)
            .ok_or_else(|| Error::InvalidInput(format!("imputed cell ({r}, {c}) is still missing")))?;
        sum += (t - v) * (t - v);
        n += 1;
    }
    if n == 0 {
        return Err(Error::InvalidInput("evaluation mask selects no cells".into()));
    }
    Ok((sum / n as f64).sqrt())
}
