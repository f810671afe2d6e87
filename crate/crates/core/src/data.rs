//! Tabular data with explicit missingness.
//!
//! A [`Dataset`] stores values row-major next to a same-shaped observation
//! mask. Missing cells hold `NaN` but are never read while masked; every
//! observed cell is finite.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

const MISSING: f64 = f64::NAN;

#[derive(Debug, Clone)]
pub struct Dataset {
    column_names: Vec<String>,
    values: Vec<f64>,
    mask: Vec<bool>,
    n_rows: usize,
    n_cols: usize,
}

/// Bit-level equality: masked cells compare equal regardless of payload.
impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.n_rows == other.n_rows
            && self.n_cols == other.n_cols
            && self.column_names == other.column_names
            && self.mask == other.mask
            && self
                .values
                .iter()
                .zip(&other.values)
                .zip(&self.mask)
                .all(|((a, b), &m)| !m || a.to_bits() == b.to_bits())
    }
}

impl Dataset {
    /// Build from row-major values and mask. Values under `mask = false` are ignored.
    pub fn new(
        column_names: Vec<String>,
        n_rows: usize,
        values: Vec<f64>,
        mask: Vec<bool>,
    ) -> Result<Self> {
        let n_cols = column_names.len();
        let cells = n_rows * n_cols;
        if values.len() != cells {
            return Err(Error::ShapeMismatch {
                context: "dataset values",
                expected: cells,
                found: values.len(),
            });
        }
        if mask.len() != cells {
            return Err(Error::ShapeMismatch {
                context: "dataset mask",
                expected: cells,
                found: mask.len(),
            });
        }
        let mut values = values;
        for (i, (v, &m)) in values.iter_mut().zip(&mask).enumerate() {
            if !m {
                *v = MISSING;
            } else if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "observed cell ({}, {}) is not finite",
                    i / n_cols,
                    i % n_cols
                )));
            }
        }
        Ok(Dataset {
            column_names,
            values,
            mask,
            n_rows,
            n_cols,
        })
    }

    pub fn from_rows(column_names: Vec<String>, rows: &[Vec<Option<f64>>]) -> Result<Self> {
        let n_cols = column_names.len();
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        let mut mask = Vec::with_capacity(rows.len() * n_cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::RaggedRow {
                    row: r + 1,
                    expected: n_cols,
                    found: row.len(),
                });
            }
            for cell in row {
                values.push(cell.unwrap_or(MISSING));
                mask.push(cell.is_some());
            }
        }
        Dataset::new(column_names, rows.len(), values, mask)
    }

    /// Fully observed dataset.
    pub fn complete(column_names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = column_names.len();
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::RaggedRow {
                    row: r + 1,
                    expected: n_cols,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        let mask = vec![true; values.len()];
        Dataset::new(column_names, rows.len(), values, mask)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.column_names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let i = row * self.n_cols + col;
        self.mask[i].then(|| self.values[i])
    }

    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.n_cols + col]
    }

    /// Raw row slice; masked entries are `NaN`.
    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn row_mask(&self, row: usize) -> &[bool] {
        &self.mask[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn observed_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn missing_count(&self) -> usize {
        self.mask.len() - self.observed_count()
    }

    pub fn is_complete(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }

    pub fn is_row_complete(&self, row: usize) -> bool {
        self.row_mask(row).iter().all(|&m| m)
    }

    pub fn column_is_complete(&self, col: usize) -> bool {
        (0..self.n_rows).all(|r| self.is_observed(r, col))
    }

    /// Observed values of one column, in row order.
    pub fn observed_column(&self, col: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_rows).filter_map(move |r| self.get(r, col))
    }

    /// Rows as plain vectors. Fails if any cell is missing.
    pub fn to_rows(&self) -> Result<Vec<Vec<f64>>> {
        if !self.is_complete() {
            return Err(Error::InvalidInput(format!(
                "dataset has {} missing cells",
                self.missing_count()
            )));
        }
        Ok(self.values.chunks(self.n_cols.max(1)).map(<[f64]>::to_vec).take(self.n_rows).collect())
    }

    pub fn complete_row_indices(&self) -> Vec<usize> {
        (0..self.n_rows).filter(|&r| self.is_row_complete(r)).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols);
        let mut mask = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            values.extend_from_slice(self.row(r));
            mask.extend_from_slice(self.row_mask(r));
        }
        Dataset {
            column_names: self.column_names.clone(),
            values,
            mask,
            n_rows: rows.len(),
            n_cols: self.n_cols,
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(self.n_rows * cols.len());
        let mut mask = Vec::with_capacity(self.n_rows * cols.len());
        for r in 0..self.n_rows {
            for &c in cols {
                let i = r * self.n_cols + c;
                values.push(self.values[i]);
                mask.push(self.mask[i]);
            }
        }
        Dataset {
            column_names: cols.iter().map(|&c| self.column_names[c].clone()).collect(),
            values,
            mask,
            n_rows: self.n_rows,
            n_cols: cols.len(),
        }
    }

    /// Copy with the given missing cells filled. Observed cells are never touched.
    pub(crate) fn with_filled(&self, cells: &[(usize, usize, f64)]) -> Result<Dataset> {
        let mut out = self.clone();
        for &(r, c, v) in cells {
            let i = r * self.n_cols + c;
            if out.mask[i] {
                return Err(Error::InvalidInput(format!(
                    "cell ({r}, {c}) is observed and cannot be filled"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("fill value for ({r}, {c}) is not finite")));
            }
            out.values[i] = v;
            out.mask[i] = true;
        }
        Ok(out)
    }

    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            column_names: self.column_names.clone(),
            missing_per_column: (0..self.n_cols)
                .map(|c| (0..self.n_rows).filter(|&r| !self.is_observed(r, c)).count())
                .collect(),
            missing_total: self.missing_count(),
            complete_rows: self.complete_row_indices().len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n_rows: usize,
    pub n_cols: usize,
    pub column_names: Vec<String>,
    pub missing_per_column: Vec<usize>,
    pub missing_total: usize,
    pub complete_rows: usize,
}

pub fn default_missing_tokens() -> BTreeSet<String> {
    ["", "NaN", "nan", "?"].iter().map(|s| s.to_string()).collect()
}

pub fn load_csv(path: impl AsRef<Path>, missing_tokens: &BTreeSet<String>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file, missing_tokens)
}

/// Parse CSV text with a header row. Cells are trimmed before token matching.
pub fn read_csv<R: Read>(reader: R, missing_tokens: &BTreeSet<String>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let csv_err = |e: csv::Error| Error::Csv {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    };
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let n_cols = header.len();
    let mut values = Vec::new();
    let mut mask = Vec::new();
    let mut n_rows = 0;
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        n_rows += 1;
        if record.len() != n_cols {
            return Err(Error::RaggedRow {
                row: n_rows,
                expected: n_cols,
                found: record.len(),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            let text = cell.trim();
            if missing_tokens.contains(text) {
                values.push(MISSING);
                mask.push(false);
                continue;
            }
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    values.push(v);
                    mask.push(true);
                }
                _ => {
                    return Err(Error::ParseCell {
                        row: n_rows,
                        column: header[c].clone(),
                        text: text.to_string(),
                    })
                }
            }
        }
    }
    if n_rows == 0 {
        return Err(Error::EmptyDataset);
    }
    Dataset::new(header, n_rows, values, mask)
}

/// Write with a header row; missing cells are written as empty fields.
pub fn write_csv<W: Write>(d: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::Csv {
        line: 0,
        message: e.to_string(),
    };
    wtr.write_record(d.column_names()).map_err(err)?;
    for r in 0..d.n_rows() {
        let record: Vec<String> = (0..d.n_cols())
            .map(|c| d.get(r, c).map_or_else(String::new, |v| v.to_string()))
            .collect();
        wtr.write_record(&record).map_err(err)?;
    }
    wtr.flush().map_err(|source| Error::Io {
        path: "<csv writer>".into(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    pub fn is_constant(&self) -> bool {
        self.min == self.max
    }

    /// Maps into `[0, 1]`; constant columns map to 0.5.
    pub fn normalize(&self, v: f64) -> f64 {
        if self.is_constant() {
            0.5
        } else {
            (v - self.min) / (self.max - self.min)
        }
    }

    pub fn denormalize(&self, u: f64) -> f64 {
        if self.is_constant() {
            self.min
        } else {
            u * (self.max - self.min) + self.min
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub columns: Vec<ColumnRange>,
}

/// Per-column min/max over observed cells only.
pub fn fit_normalization(d: &Dataset) -> Result<NormalizationParams> {
    let columns = (0..d.n_cols())
        .map(|c| {
            let mut it = d.observed_column(c);
            let first = it.next().ok_or_else(|| Error::UnobservedColumn {
                column: d.column_names()[c].clone(),
            })?;
            let (min, max) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
            Ok(ColumnRange { min, max })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NormalizationParams { columns })
}

fn map_observed(d: &Dataset, p: &NormalizationParams, f: impl Fn(&ColumnRange, f64) -> f64) -> Result<Dataset> {
    if p.columns.len() != d.n_cols() {
        return Err(Error::ShapeMismatch {
            context: "normalization columns",
            expected: d.n_cols(),
            found: p.columns.len(),
        });
    }
    let mut out = d.clone();
    let n_cols = d.n_cols();
    for (i, v) in out.values.iter_mut().enumerate() {
        if d.mask[i] {
            *v = f(&p.columns[i % n_cols], *v);
        }
    }
    Ok(out)
}

pub fn normalize(d: &Dataset, p: &NormalizationParams) -> Result<Dataset> {
    map_observed(d, p, ColumnRange::normalize)
}

pub fn denormalize(d: &Dataset, p: &NormalizationParams) -> Result<Dataset> {
    map_observed(d, p, ColumnRange::denormalize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

/// Seeded shuffle of `0..n_rows`, cut into (train, test) index lists.
pub fn split_indices(n_rows: usize, s: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(s.train_fraction > 0.0 && s.train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train_fraction must lie in (0, 1), got {}",
            s.train_fraction
        )));
    }
    if n_rows < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            found: n_rows,
        });
    }
    let n_train = ((n_rows as f64 * s.train_fraction).round() as usize).clamp(1, n_rows - 1);
    let mut idx: Vec<usize> = (0..n_rows).collect();
    idx.shuffle(&mut seed::rng(s.seed));
    let test = idx.split_off(n_train);
    Ok((idx, test))
}

pub fn split(d: &Dataset, s: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(d.n_rows(), s)?;
    Ok((d.select_rows(&train), d.select_rows(&test)))
}

/// Hide a `fraction` of the observed cells in `columns`, chosen uniformly
/// without replacement. Returns the masked dataset and the row-major mask of
/// hidden cells.
pub fn mask_mcar(d: &Dataset, fraction: f64, columns: &[usize], seed: u64) -> Result<(Dataset, Vec<bool>)> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidConfig(format!("MCAR fraction {fraction} outside [0, 1]")));
    }
    if let Some(&c) = columns.iter().find(|&&c| c >= d.n_cols()) {
        return Err(Error::InvalidInput(format!("column index {c} out of range")));
    }
    let mut candidates: Vec<usize> = (0..d.n_rows())
        .flat_map(|r| columns.iter().map(move |&c| (r, c)))
        .filter(|&(r, c)| d.is_observed(r, c))
        .map(|(r, c)| r * d.n_cols() + c)
        .collect();
    let n_hide = (candidates.len() as f64 * fraction).round() as usize;
    candidates.shuffle(&mut seed::rng(seed));
    let mut out = d.clone();
    let mut hidden = vec![false; d.values.len()];
    for &i in &candidates[..n_hide] {
        out.mask[i] = false;
        out.values[i] = MISSING;
        hidden[i] = true;
    }
    Ok((out, hidden))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset> {
        read_csv(text.as_bytes(), &default_missing_tokens())
    }

    #[test]
    fn trailing_empty_cell_is_missing() {
        let d = parse("a,b\n1,2\n3,\n").unwrap();
        assert_eq!((d.n_rows(), d.n_cols()), (2, 2));
        assert_eq!(d.mask(), &[true, true, true, false]);
        assert_eq!(d.get(1, 0), Some(3.0));
        assert_eq!(d.get(1, 1), None);
    }

    #[test]
    fn header_only_is_an_error() {
        assert!(matches!(parse("a\n"), Err(Error::EmptyDataset)));
    }

    #[test]
    fn ragged_and_unparseable_rows_report_position() {
        match parse("a,b\n1,2\n3\n") {
            Err(Error::RaggedRow { row, expected, found }) => assert_eq!((row, expected, found), (2, 2, 1)),
            other => panic!("unexpected {other:?}"),
        }
        match parse("a,b\n1,x\n") {
            Err(Error::ParseCell { row, column, text }) => {
                assert_eq!((row, column.as_str(), text.as_str()), (1, "b", "x"))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("a\ninf\n"), Err(Error::ParseCell { .. })));
    }

    #[test]
    fn custom_tokens() {
        let tokens: BTreeSet<String> = ["NA".to_string()].into();
        let d = read_csv("a,b\nNA,2\n".as_bytes(), &tokens).unwrap();
        assert_eq!(d.mask(), &[false, true]);
        assert!(read_csv("a,b\n?,2\n".as_bytes(), &tokens).is_err());
    }

    #[test]
    fn normalization_uses_observed_cells() {
        let d = Dataset::from_rows(
            vec!["x".into()],
            &[vec![Some(2.0)], vec![Some(4.0)], vec![Some(6.0)], vec![None]],
        )
        .unwrap();
        let p = fit_normalization(&d).unwrap();
        assert_eq!(p.columns[0], ColumnRange { min: 2.0, max: 6.0 });
        let n = normalize(&d, &p).unwrap();
        assert_eq!(n.get(0, 0), Some(0.0));
        assert_eq!(n.get(1, 0), Some(0.5));
        assert_eq!(n.get(2, 0), Some(1.0));
        assert_eq!(n.mask(), d.mask());
    }

    #[test]
    fn constant_column_maps_to_half() {
        let d = Dataset::complete(vec!["c".into()], &[vec![5.0], vec![5.0], vec![5.0]]).unwrap();
        let p = fit_normalization(&d).unwrap();
        assert_eq!(p.columns[0], ColumnRange { min: 5.0, max: 5.0 });
        let n = normalize(&d, &p).unwrap();
        assert!(n.values().iter().all(|&v| v == 0.5));
        assert_eq!(denormalize(&n, &p).unwrap(), d);
    }

    #[test]
    fn masked_outlier_is_ignored() {
        let mut rows: Vec<Vec<Option<f64>>> = (0..=10).map(|i| vec![Some(i as f64 / 10.0)]).collect();
        rows.push(vec![None]);
        let mut d = Dataset::from_rows(vec!["x".into()], &rows).unwrap();
        // plant a huge value under the mask
        let last = d.values.len() - 1;
        d.values[last] = 1e9;
        let p = fit_normalization(&d).unwrap();
        assert_eq!(p.columns[0], ColumnRange { min: 0.0, max: 1.0 });
    }

    #[test]
    fn unobserved_column_cannot_be_fitted() {
        let d = Dataset::from_rows(vec!["a".into(), "b".into()], &[vec![Some(1.0), None]]).unwrap();
        assert!(matches!(fit_normalization(&d), Err(Error::UnobservedColumn { column }) if column == "b"));
    }

    #[test]
    fn normalize_shape_mismatch() {
        let d = Dataset::complete(vec!["a".into()], &[vec![1.0]]).unwrap();
        let p = NormalizationParams { columns: vec![] };
        assert!(matches!(normalize(&d, &p), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let d = Dataset::complete(vec!["x".into()], &rows).unwrap();
        let s = SplitSpec { train_fraction: 0.8, seed: 4 };
        let (a, b) = split(&d, &s).unwrap();
        assert_eq!((a.n_rows(), b.n_rows()), (8, 2));
        let (a2, b2) = split(&d, &s).unwrap();
        assert_eq!((a, b), (a2, b2));
    }

    #[test]
    fn split_sweep_keeps_sizes_and_partitions() {
        for seed in 1..=100 {
            let (train, test) = split_indices(100, &SplitSpec { train_fraction: 0.8, seed }).unwrap();
            assert_eq!(train.len(), 80);
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..100).collect::<Vec<_>>());
        }
    }

    #[test]
    fn split_rejects_tiny_or_bad_fraction() {
        assert!(matches!(
            split_indices(1, &SplitSpec { train_fraction: 0.5, seed: 0 }),
            Err(Error::TooFewRows { .. })
        ));
        assert!(split_indices(10, &SplitSpec { train_fraction: 1.0, seed: 0 }).is_err());
    }

    #[test]
    fn mcar_hides_exact_count_in_chosen_columns() {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64, 1.0, 2.0]).collect();
        let d = Dataset::complete(vec!["a".into(), "b".into(), "y".into()], &rows).unwrap();
        let (m, hidden) = mask_mcar(&d, 0.2, &[0, 1], 9).unwrap();
        assert_eq!(m.missing_count(), 20);
        assert_eq!(hidden.iter().filter(|&&h| h).count(), 20);
        assert!(m.column_is_complete(2));
    }

    #[test]
    fn csv_write_read_is_stable() {
        let d = parse("a,b\n0.1,2\n3,\n").unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "a,b\n0.1,2\n3,\n");
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), d);
    }
}
