use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// How equal scores share rank positions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Mean of the tied positions.
    #[default]
    Average,
    /// Lowest tied position for all.
    Min,
    /// Highest tied position for all.
    Max,
    /// Distinct positions in method order.
    Ordinal,
}

/// How a method without a score on a dataset is treated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Left out of that dataset's ranking.
    #[default]
    Exclude,
    /// Ranked below every scored method, tied among themselves.
    WorstRank,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankPolicy {
    pub ties: TiePolicy,
    pub missing: MissingPolicy,
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(Self::Average),
            "min" => Ok(Self::Min),
            "max" => Ok(Self::Max),
            "ordinal" => Ok(Self::Ordinal),
            _ => Err(Error::InvalidParameter(format!(
                "unknown tie policy `{s}` (average, min, max, ordinal)"
            ))),
        }
    }
}

impl FromStr for MissingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exclude" => Ok(Self::Exclude),
            "worst_rank" | "worst-rank" => Ok(Self::WorstRank),
            _ => Err(Error::InvalidParameter(format!(
                "unknown missing-score policy `{s}` (exclude, worst_rank)"
            ))),
        }
    }
}

/// Ranks one dataset's scores, 1 = best, with average ties and missing
/// scores left unranked.
pub fn compute_ranks(scores: &[Option<f64>], higher_is_better: bool) -> Result<Vec<Option<f64>>> {
    rank_with(scores, higher_is_better, RankPolicy::default())
}

pub fn rank_with(scores: &[Option<f64>], higher_is_better: bool, policy: RankPolicy) -> Result<Vec<Option<f64>>> {
    let scored = scores.iter().filter(|s| s.is_some()).count();
    if scored < 2 {
        return Err(Error::Report(format!("ranking needs at least 2 scored methods, got {scored}")));
    }
    let mut order: Vec<(usize, Option<f64>)> = scores
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, s)| s.is_some() || policy.missing == MissingPolicy::WorstRank)
        .collect();
    // Stable: equal keys keep method order. Missing entries sort last.
    order.sort_by(|a, b| match (a.1, b.1) {
        (Some(x), Some(y)) => {
            let c = x.total_cmp(&y);
            if higher_is_better {
                c.reverse()
            } else {
                c
            }
        }
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    let mut ranks = vec![None; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && order[end].1 == order[start].1 {
            end += 1;
        }
        // Positions start+1 ..= end are tied.
        for (offset, &(i, _)) in order[start..end].iter().enumerate() {
            let r = match policy.ties {
                TiePolicy::Average => (start + 1 + end) as f64 / 2.0,
                TiePolicy::Min => (start + 1) as f64,
                TiePolicy::Max => end as f64,
                TiePolicy::Ordinal => (start + 1 + offset) as f64,
            };
            ranks[i] = Some(r);
        }
        start = end;
    }
    Ok(ranks)
}

/// Ranks of methods (columns) on datasets (rows) for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    pub ranks: Vec<Vec<Option<f64>>>,
}

impl RankTable {
    /// Ranks every row of `scores`. Rows with fewer than two scored methods
    /// are kept but left unranked.
    pub fn from_scores(
        datasets: Vec<String>,
        methods: Vec<String>,
        scores: &[Vec<Option<f64>>],
        higher_is_better: bool,
        policy: RankPolicy,
    ) -> Self {
        let ranks = scores
            .iter()
            .zip(&datasets)
            .map(|(row, ds)| {
                rank_with(row, higher_is_better, policy).unwrap_or_else(|e| {
                    log::warn!("{ds}: {e}");
                    vec![None; row.len()]
                })
            })
            .collect();
        Self {
            datasets,
            methods,
            ranks,
        }
    }

    /// Keeps only the listed methods, in the given order.
    pub fn restrict(&self, methods: &[&str]) -> Result<Self> {
        let cols: Vec<usize> = methods
            .iter()
            .map(|m| {
                self.methods
                    .iter()
                    .position(|x| x == m)
                    .ok_or_else(|| Error::Report(format!("method `{m}` not in table")))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            datasets: self.datasets.clone(),
            methods: methods.iter().map(|m| m.to_string()).collect(),
            ranks: self.ranks.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect(),
        })
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.ranks.iter().filter_map(|r| r[j]).collect()
    }
}

/// Distribution of one method's ranks across datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub method: String,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    /// Datasets on which the method was ranked.
    pub n: usize,
}

/// Percentile of sorted data by linear interpolation between closest ranks.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// One summary per method with at least one ranked dataset, in table order.
pub fn aggregate_ranks(table: &RankTable) -> Vec<RankSummary> {
    table
        .methods
        .iter()
        .enumerate()
        .filter_map(|(j, method)| {
            let mut r = table.column(j);
            if r.is_empty() {
                log::warn!("{method}: no ranked datasets, omitted from the summary");
                return None;
            }
            r.sort_by(f64::total_cmp);
            Some(RankSummary {
                method: method.clone(),
                mean: r.iter().sum::<f64>() / r.len() as f64,
                min: r[0],
                max: r[r.len() - 1],
                p25: percentile(&r, 0.25),
                p50: percentile(&r, 0.5),
                p75: percentile(&r, 0.75),
                n: r.len(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Methods compared.
    pub k: usize,
    /// Complete datasets used.
    pub n: usize,
    /// Rows dropped for missing entries.
    pub dropped: usize,
}

/// Friedman chi-square over the table's methods. Incomplete rows are
/// dropped, and the remaining rows are re-ranked among these methods.
pub fn friedman_statistic(table: &RankTable) -> Result<FriedmanResult> {
    let k = table.methods.len();
    let complete: Vec<Vec<f64>> = table
        .ranks
        .iter()
        .filter_map(|r| r.iter().copied().collect::<Option<Vec<f64>>>())
        .collect();
    let n = complete.len();
    if k < 2 || n < 2 {
        return Err(Error::Report(format!(
            "Friedman test needs k >= 2 methods and N >= 2 complete datasets, got k = {k}, N = {n}"
        )));
    }
    let mut sums = vec![0.0; k];
    for row in &complete {
        let opts: Vec<Option<f64>> = row.iter().map(|&v| Some(v)).collect();
        for (s, r) in sums.iter_mut().zip(compute_ranks(&opts, false)?) {
            *s += r.expect("complete row");
        }
    }
    let (nf, kf) = (n as f64, k as f64);
    let sum_sq: f64 = sums.iter().map(|s| (s / nf).powi(2)).sum();
    let statistic = (12.0 * nf / (kf * (kf + 1.0)) * sum_sq - 3.0 * nf * (kf + 1.0)).max(0.0);
    let p_value = ChiSquared::new(kf - 1.0)
        .map_err(|e| Error::Report(e.to_string()))?
        .sf(statistic);
    Ok(FriedmanResult {
        statistic,
        p_value,
        k,
        n,
        dropped: table.ranks.len() - n,
    })
}
