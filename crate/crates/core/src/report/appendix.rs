//! Per-dataset result tables in the appendix layout: one row per method,
//! one column per metric, `N/A` for failed runs.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::ranks::{RankPolicy, RankTable};
use crate::error::{Error, Result};
use crate::metrics::Metric;

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixTable {
    pub dataset: String,
    pub methods: Vec<String>,
    /// `values[i]` follows [`Metric::ALL`] order.
    pub values: Vec<[Option<f64>; 8]>,
}

impl AppendixTable {
    pub fn get(&self, method: usize, metric: Metric) -> Option<f64> {
        let j = Metric::ALL.iter().position(|&m| m == metric).expect("known metric");
        self.values[method][j]
    }
}

/// Reads one table. The header must hold `method` plus the eight metric
/// names in any order.
pub fn read_appendix_table<R: Read>(dataset: &str, r: R) -> Result<AppendixTable> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Report(format!("{dataset}: missing column `{name}`")))
    };
    let method_col = col("method")?;
    let metric_cols: Vec<usize> = Metric::ALL.iter().map(|m| col(m.name())).collect::<Result<_>>()?;
    let mut methods = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        methods.push(rec[method_col].trim().to_string());
        let mut row = [None; 8];
        for (slot, &c) in row.iter_mut().zip(&metric_cols) {
            let cell = rec[c].trim();
            *slot = match cell {
                "" | "N/A" | "NA" => None,
                v => Some(v.parse::<f64>().map_err(|_| Error::Parse {
                    row: line + 2,
                    column: header[c].to_string(),
                    value: v.to_string(),
                })?),
            };
        }
        values.push(row);
    }
    Ok(AppendixTable {
        dataset: dataset.to_string(),
        methods,
        values,
    })
}

/// Loads every table listed in `<dir>/index.csv` (columns `file`, `dataset`,
/// `domain`), optionally only those of one domain.
pub fn load_appendix_dir(dir: impl AsRef<Path>, domain: Option<&str>) -> Result<Vec<AppendixTable>> {
    let dir = dir.as_ref();
    let index_path = dir.join("index.csv");
    let index = File::open(&index_path).map_err(|e| Error::io(&index_path, e))?;
    let mut out = Vec::new();
    for rec in csv::Reader::from_reader(index).records() {
        let rec = rec?;
        let (file, dataset, dom) = (&rec[0], &rec[1], rec.get(2).unwrap_or(""));
        if domain.is_some_and(|d| d != dom) {
            continue;
        }
        let path = dir.join(file);
        let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
        out.push(read_appendix_table(dataset, f)?);
    }
    Ok(out)
}

/// Rank table for one metric. Methods follow the first table's order.
pub fn appendix_rank_table(tables: &[AppendixTable], metric: Metric, policy: RankPolicy) -> Result<RankTable> {
    let methods = tables
        .first()
        .ok_or_else(|| Error::Report("no appendix tables".into()))?
        .methods
        .clone();
    let scores: Vec<Vec<Option<f64>>> = tables
        .iter()
        .map(|t| {
            methods
                .iter()
                .map(|m| t.methods.iter().position(|x| x == m).and_then(|i| t.get(i, metric)))
                .collect()
        })
        .collect();
    Ok(RankTable::from_scores(
        tables.iter().map(|t| t.dataset.clone()).collect(),
        methods,
        &scores,
        metric.higher_is_better(),
        policy,
    ))
}
