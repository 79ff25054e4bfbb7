//! Binary labeled datasets: CSV ingestion, imbalance statistics, stratified
//! splitting and standardization.

use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Class tag of a row. The minority class is the positive class everywhere
/// in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Class {
    Majority = 0,
    Minority = 1,
}

impl Class {
    pub fn is_minority(self) -> bool {
        self == Class::Minority
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_bool(minority: bool) -> Self {
        if minority {
            Class::Minority
        } else {
            Class::Majority
        }
    }
}

/// Dense row-major feature matrix with one binary label per row.
///
/// Immutable once built; resamplers produce new datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<Class>,
    feature_names: Option<Vec<String>>,
}

impl LabeledDataset {
    /// Builds a dataset from a row-major buffer. Rejects mismatched shapes and
    /// non-finite values; it does not require both classes to be present.
    pub fn new(features: Vec<f64>, n_features: usize, labels: Vec<Class>) -> Result<Self> {
        let expected = labels.len() * n_features;
        if features.len() != expected {
            return Err(Error::InvalidDataset(format!(
                "{} feature values for {} rows of {} features",
                features.len(),
                labels.len(),
                n_features
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            let row = pos.checked_div(n_features).unwrap_or(0);
            return Err(Error::InvalidDataset(format!(
                "non-finite feature value in row {row}"
            )));
        }
        Ok(Self {
            features,
            n_features,
            labels,
            feature_names: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<Class>) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n_features) {
            return Err(Error::InvalidDataset(format!(
                "row {bad} has {} values, expected {n_features}",
                rows[bad].len()
            )));
        }
        if rows.len() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        Self::new(rows.concat(), n_features, labels)
    }

    /// Convenience constructor from majority and minority row lists; majority
    /// rows come first.
    pub fn from_classes(majority: &[Vec<f64>], minority: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = majority.iter().chain(minority).cloned().collect();
        let labels = std::iter::repeat_n(Class::Majority, majority.len())
            .chain(std::iter::repeat_n(Class::Minority, minority.len()))
            .collect();
        Self::from_rows(&rows, labels)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Self {
        debug_assert_eq!(names.len(), self.n_features);
        self.feature_names = Some(names);
        self
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_samples()).map(move |i| self.row(i))
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[Class] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Class {
        self.labels[i]
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// `(n_majority, n_minority)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let n_min = self.labels.iter().filter(|c| c.is_minority()).count();
        (self.labels.len() - n_min, n_min)
    }

    pub fn indices_of(&self, class: Class) -> Vec<usize> {
        (0..self.n_samples())
            .filter(|&i| self.labels[i] == class)
            .collect()
    }

    /// Errors unless both classes are present.
    pub fn require_both_classes(&self) -> Result<()> {
        match self.class_counts() {
            (0, _) => Err(Error::InvalidDataset("no majority samples".into())),
            (_, 0) => Err(Error::InvalidDataset("no minority samples".into())),
            _ => Ok(()),
        }
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self {
            features,
            n_features: self.n_features,
            labels,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Copy of `self` with extra rows appended.
    pub fn append_rows(&self, rows: &[Vec<f64>], class: Class) -> Self {
        let mut out = self.clone();
        for r in rows {
            debug_assert_eq!(r.len(), self.n_features);
            out.features.extend_from_slice(r);
            out.labels.push(class);
        }
        out
    }

    /// Gathers the given rows into a flat row-major buffer.
    pub fn gather(&self, indices: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            out.extend_from_slice(self.row(i));
        }
        out
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl From<&str> for LabelColumn {
    fn from(s: &str) -> Self {
        LabelColumn::Name(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadReport {
    /// Number of empty numeric cells replaced by their column mean.
    pub imputed_cells: usize,
}

/// Reads a headered, comma-separated file of numeric features plus one label
/// column. Rows whose label equals `positive_label` become minority.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &LabelColumn,
    positive_label: &str,
) -> Result<(LabeledDataset, LoadReport)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label_column, positive_label)
}

/// Same as [`load_csv`] over any reader.
pub fn read_csv<R: std::io::Read>(
    reader: R,
    label_column: &LabelColumn,
    positive_label: &str,
) -> Result<(LabeledDataset, LoadReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let label_idx = match label_column {
        LabelColumn::Index(i) if *i < headers.len() => *i,
        LabelColumn::Index(i) => {
            return Err(Error::InvalidDataset(format!(
                "label column index {i} out of range ({} columns)",
                headers.len()
            )))
        }
        LabelColumn::Name(name) => headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::InvalidDataset(format!("label column `{name}` not found"))
        })?,
    };
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&c| c != label_idx).collect();

    let mut cells: Vec<Option<f64>> = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        // Row numbers in messages are 1-based file lines, header included.
        let line = r + 2;
        let label = record.get(label_idx).unwrap_or("");
        labels.push(Class::from_bool(label == positive_label));
        for &c in &feature_cols {
            let raw = record.get(c).unwrap_or("");
            if raw.is_empty() {
                cells.push(None);
                continue;
            }
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                row: line,
                column: headers[c].clone(),
                value: raw.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: line,
                    column: headers[c].clone(),
                    value: raw.to_string(),
                });
            }
            cells.push(Some(v));
        }
    }
    if labels.len() < 2 {
        return Err(Error::InvalidDataset(format!(
            "{} data rows, need at least 2",
            labels.len()
        )));
    }

    let d = feature_cols.len();
    let mut report = LoadReport::default();
    let mut features = vec![0.0; cells.len()];
    for j in 0..d {
        let present: Vec<f64> = cells.iter().skip(j).step_by(d).flatten().copied().collect();
        if present.is_empty() {
            return Err(Error::InvalidDataset(format!(
                "column `{}` has no values",
                headers[feature_cols[j]]
            )));
        }
        let mean = present.iter().sum::<f64>() / present.len() as f64;
        for (i, cell) in cells.iter().enumerate().skip(j).step_by(d) {
            features[i] = cell.unwrap_or_else(|| {
                report.imputed_cells += 1;
                mean
            });
        }
    }

    let names = feature_cols.iter().map(|&c| headers[c].clone()).collect();
    let ds = LabeledDataset::new(features, d, labels)?.with_feature_names(names);
    ds.require_both_classes()?;
    Ok((ds, report))
}

/// Writes a dataset as CSV with a trailing `label` column holding 0/1.
pub fn write_csv<W: std::io::Write>(d: &LabeledDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = match d.feature_names() {
        Some(n) => n.to_vec(),
        None => (0..d.n_features()).map(|j| format!("x{j}")).collect(),
    };
    header.push("label".into());
    w.write_record(&header)?;
    for i in 0..d.n_samples() {
        let mut rec: Vec<String> = d.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(d.label(i).as_u8().to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceStats {
    /// `N_maj / N_min`.
    pub ratio: f64,
    /// `N_min / (N_min + N_maj)`.
    pub minority_prevalence: f64,
}

pub fn imbalance_stats(d: &LabeledDataset) -> Result<ImbalanceStats> {
    let (n_maj, n_min) = d.class_counts();
    imbalance_from_counts(n_maj, n_min)
}

pub fn imbalance_from_counts(n_maj: usize, n_min: usize) -> Result<ImbalanceStats> {
    if n_maj == 0 || n_min == 0 {
        return Err(Error::InvalidDataset(format!(
            "empty class (majority {n_maj}, minority {n_min})"
        )));
    }
    Ok(ImbalanceStats {
        ratio: n_maj as f64 / n_min as f64,
        minority_prevalence: n_min as f64 / (n_min + n_maj) as f64,
    })
}

#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    /// Source row indices of `train`, ascending.
    pub train_indices: Vec<usize>,
    /// Source row indices of `test`, ascending.
    pub test_indices: Vec<usize>,
}

/// Per-class shuffled split. Majority train counts are rounded; the minority
/// test count is rounded up so the test side keeps as many positives as
/// possible. Each side receives at least one sample of each class.
pub fn stratified_split(d: &LabeledDataset, train_fraction: f64, seed: u64) -> Result<SplitPair> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidSplit(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut train_indices = Vec::new();
    let mut test_indices = Vec::new();
    for class in [Class::Majority, Class::Minority] {
        let mut idx = d.indices_of(class);
        let n = idx.len();
        if n < 2 {
            return Err(Error::InvalidSplit(format!(
                "{class:?} class has {n} samples; need at least 2"
            )));
        }
        let n_train = match class {
            Class::Majority => (train_fraction * n as f64).round() as usize,
            Class::Minority => n - ((1.0 - train_fraction) * n as f64 - 1e-9).ceil() as usize,
        }
        .clamp(1, n - 1);
        idx.shuffle(&mut rng);
        train_indices.extend_from_slice(&idx[..n_train]);
        test_indices.extend_from_slice(&idx[n_train..]);
    }
    train_indices.sort_unstable();
    test_indices.sort_unstable();
    Ok(SplitPair {
        train: d.select(&train_indices),
        test: d.select(&test_indices),
        train_indices,
        test_indices,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub mean: Vec<f64>,
    /// Population standard deviation; `0.0` marks a constant feature.
    pub std: Vec<f64>,
}

impl StandardizationParams {
    pub fn fit(train: &LabeledDataset) -> Self {
        let n = train.n_samples().max(1) as f64;
        let d = train.n_features();
        let mut mean = vec![0.0; d];
        for row in train.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for row in train.rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = (s / n).sqrt();
                // Rounding in the mean leaves tiny residuals on constant columns.
                if sd <= 1e-12 * (1.0 + m.abs()) {
                    0.0
                } else {
                    sd
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn transform_row(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
            if *s > 0.0 {
                *v = (*v - m) / s;
            }
        }
    }

    pub fn transform(&self, d: &LabeledDataset) -> LabeledDataset {
        let mut features = d.features.clone();
        if d.n_features > 0 {
            for row in features.chunks_mut(d.n_features) {
                self.transform_row(row);
            }
        }
        LabeledDataset {
            features,
            ..d.clone()
        }
    }
}

/// Fits on `train` and applies the same map to `train` and to every dataset
/// in `others`. Returns `(params, transformed_train, transformed_others)`.
pub fn standardize(
    train: &LabeledDataset,
    others: &[&LabeledDataset],
) -> (StandardizationParams, LabeledDataset, Vec<LabeledDataset>) {
    let params = StandardizationParams::fit(train);
    let t = params.transform(train);
    let o = others.iter().map(|d| params.transform(d)).collect();
    (params, t, o)
}
