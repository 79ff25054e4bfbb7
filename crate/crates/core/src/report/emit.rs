use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::ranks::{aggregate_ranks, friedman_statistic, FriedmanResult, RankPolicy, RankSummary, RankTable};
use crate::benchmark::{EvaluationRecord, MethodId, RunStatus};
use crate::error::{Error, Result};
use crate::metrics::Metric;

/// Best score per (dataset, method) for one metric, over `ok` records.
#[derive(Debug, Clone, PartialEq)]
pub struct BestScores {
    pub datasets: Vec<String>,
    pub methods: Vec<MethodId>,
    /// `scores[dataset][method]`.
    pub scores: Vec<Vec<Option<f64>>>,
    /// Grid index of the configuration that produced each best score; the
    /// first configuration wins ties.
    pub config_index: Vec<Vec<Option<usize>>>,
}

/// Reduces each method's grid to its best configuration per dataset, chosen
/// independently for every metric. Datasets keep first-appearance order and
/// methods the canonical order.
pub fn best_per_method(records: &[EvaluationRecord], metric: Metric) -> BestScores {
    let mut datasets: Vec<String> = Vec::new();
    for r in records {
        if !datasets.contains(&r.dataset) {
            datasets.push(r.dataset.clone());
        }
    }
    let methods: Vec<MethodId> = MethodId::ALL
        .into_iter()
        .filter(|m| records.iter().any(|r| r.method == *m))
        .collect();
    let mut scores = vec![vec![None; methods.len()]; datasets.len()];
    let mut config_index = vec![vec![None; methods.len()]; datasets.len()];
    let sign = if metric.higher_is_better() { 1.0 } else { -1.0 };
    for r in records.iter().filter(|r| r.status == RunStatus::Ok) {
        let Some(v) = r.scores.get(metric) else { continue };
        let i = datasets.iter().position(|d| *d == r.dataset).expect("collected");
        let j = methods.iter().position(|m| *m == r.method).expect("collected");
        let better = match (scores[i][j], config_index[i][j]) {
            (None, _) => true,
            (Some(best), Some(ci)) => sign * v > sign * best || (v == best && r.config_index < ci),
            (Some(_), None) => unreachable!(),
        };
        if better {
            scores[i][j] = Some(v);
            config_index[i][j] = Some(r.config_index);
        }
    }
    BestScores {
        datasets,
        methods,
        scores,
        config_index,
    }
}

pub fn records_rank_table(records: &[EvaluationRecord], metric: Metric, policy: RankPolicy) -> RankTable {
    let best = best_per_method(records, metric);
    RankTable::from_scores(
        best.datasets,
        best.methods.iter().map(|m| m.id().to_string()).collect(),
        &best.scores,
        metric.higher_is_better(),
        policy,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub metric: Metric,
    pub summaries: Vec<RankSummary>,
    /// `None` when fewer than two datasets are complete.
    pub friedman: Option<FriedmanResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RuntimeSummary {
    pub method: MethodId,
    pub n: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// Resample wall time per method over `ok` and `timeout` runs.
pub fn runtime_summary(records: &[EvaluationRecord]) -> Vec<RuntimeSummary> {
    MethodId::ALL
        .into_iter()
        .filter_map(|m| {
            let t: Vec<f64> = records
                .iter()
                .filter(|r| r.method == m && matches!(r.status, RunStatus::Ok | RunStatus::Timeout))
                .filter_map(|r| r.resample_seconds)
                .collect();
            (!t.is_empty()).then(|| RuntimeSummary {
                method: m,
                n: t.len(),
                min: t.iter().copied().fold(f64::INFINITY, f64::min),
                mean: t.iter().sum::<f64>() / t.len() as f64,
                max: t.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
        })
        .collect()
}

pub fn metric_report(table: &RankTable, metric: Metric) -> MetricReport {
    MetricReport {
        metric,
        summaries: aggregate_ranks(table),
        friedman: friedman_statistic(table).ok(),
    }
}

#[derive(Debug, Clone, Serialize)]
struct Summary<'a> {
    records: usize,
    status_counts: BTreeMap<&'static str, usize>,
    metrics: &'a [MetricReport],
}

/// Writes `ranks_<metric>.csv` (and `.svg` when `svg` is set) for every
/// metric, plus `summary.json` and `runtimes.csv`. Returns the written paths.
pub fn emit_report(
    records: &[EvaluationRecord],
    output_dir: impl AsRef<Path>,
    metrics: &[Metric],
    policy: RankPolicy,
    svg: bool,
) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::Report("no records".into()));
    }
    let dir = output_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut write = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };

    let mut reports = Vec::new();
    for &metric in metrics {
        let table = records_rank_table(records, metric, policy);
        write(format!("ranks_{metric}.csv"), rank_table_csv(&table)?)?;
        let report = metric_report(&table, metric);
        if svg {
            write(format!("ranks_{metric}.svg"), render_svg(&report.summaries, table.methods.len(), metric))?;
        }
        reports.push(report);
    }

    let mut status_counts = BTreeMap::new();
    for r in records {
        *status_counts.entry(r.status.as_str()).or_insert(0) += 1;
    }
    let summary = Summary {
        records: records.len(),
        status_counts,
        metrics: &reports,
    };
    write("summary.json".into(), serde_json::to_string_pretty(&summary)? + "\n")?;
    write("runtimes.csv".into(), runtimes_csv(&runtime_summary(records))?)?;
    Ok(written)
}

pub fn rank_table_csv(t: &RankTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["dataset".to_string()];
    header.extend(t.methods.iter().cloned());
    w.write_record(&header)?;
    for (ds, row) in t.datasets.iter().zip(&t.ranks) {
        let mut rec = vec![ds.clone()];
        rec.extend(row.iter().map(|r| r.map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    into_string(w)
}

fn runtimes_csv(rows: &[RuntimeSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "n", "min_seconds", "mean_seconds", "max_seconds"])?;
    for r in rows {
        w.write_record([
            r.method.to_string(),
            r.n.to_string(),
            r.min.to_string(),
            r.mean.to_string(),
            r.max.to_string(),
        ])?;
    }
    into_string(w)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
}

/// Strip plot of rank distributions: one row per method with dark marks for
/// min, mean and max and light marks for the quartiles.
pub fn render_svg(summaries: &[RankSummary], n_methods: usize, metric: Metric) -> String {
    const LEFT: f64 = 170.0;
    const WIDTH: f64 = 420.0;
    const ROW: f64 = 22.0;
    const TOP: f64 = 30.0;
    let max_rank = n_methods.max(2) as f64;
    let x = |rank: f64| LEFT + (rank - 1.0) / (max_rank - 1.0) * WIDTH;
    let height = TOP + ROW * summaries.len() as f64 + 30.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="sans-serif" font-size="12">"#,
        LEFT + WIDTH + 20.0
    );
    let _ = writeln!(s, r#"<text x="{LEFT}" y="18">rank distribution: {metric}</text>"#);
    for (i, r) in summaries.iter().enumerate() {
        let y = TOP + ROW * i as f64 + ROW / 2.0;
        let _ = writeln!(s, r#"<g class="method" data-method="{}" data-n="{}">"#, r.method, r.n);
        let _ = writeln!(s, r#"  <text x="{}" y="{}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, r.method);
        let _ = writeln!(
            s,
            r##"  <line x1="{}" x2="{}" y1="{y}" y2="{y}" stroke="#ccc"/>"##,
            x(1.0),
            x(max_rank)
        );
        for (kind, v) in [("p25", r.p25), ("p50", r.p50), ("p75", r.p75)] {
            let _ = writeln!(
                s,
                r##"  <rect class="mark light" data-kind="{kind}" x="{}" y="{}" width="3" height="12" fill="#9ab"/>"##,
                x(v) - 1.5,
                y - 6.0
            );
        }
        for (kind, v) in [("min", r.min), ("mean", r.mean), ("max", r.max)] {
            let _ = writeln!(
                s,
                r##"  <circle class="mark dark" data-kind="{kind}" cx="{}" cy="{y}" r="4" fill="#222"/>"##,
                x(v)
            );
        }
        let _ = writeln!(s, "</g>");
    }
    let axis_y = TOP + ROW * summaries.len() as f64 + 15.0;
    for rank in 1..=max_rank as usize {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{axis_y}" text-anchor="middle">{rank}</text>"#,
            x(rank as f64)
        );
    }
    s.push_str("</svg>\n");
    s
}
