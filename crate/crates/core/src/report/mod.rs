//! Ranking, rank statistics, the Friedman test and report files.

pub mod appendix;
pub mod emit;
pub mod ranks;

pub use appendix::{appendix_rank_table, load_appendix_dir, read_appendix_table, AppendixTable};
pub use emit::{best_per_method, emit_report, records_rank_table, BestScores, MetricReport};
pub use ranks::{
    aggregate_ranks, compute_ranks, friedman_statistic, percentile, rank_with, FriedmanResult, MissingPolicy, RankPolicy,
    RankSummary, RankTable, TiePolicy,
};
