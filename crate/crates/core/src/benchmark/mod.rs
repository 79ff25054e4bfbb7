//! Grid expansion, run orchestration and result persistence.

pub mod grid;
pub mod io;
pub mod runner;

pub use grid::{expand_grid, MethodConfig, MethodId, ParamValue, Params};
pub use io::{load_records, run_from_config, BenchmarkConfig, DatasetSpec, RunOutput};
pub use runner::{run_benchmark, run_one, run_prepared, EvaluationRecord, PreparedDataset, RunStatus};
