//! Result matrices, forgetting metrics, tail evaluation and the baseline
//! orchestration that fills them.

mod metrics;
mod report;
mod runner;

pub use metrics::{mape, percentile, ResultMatrix, Summary, TailSummary};
pub use report::{from_json, long_rows, read_reports, report_name, to_json, write_long_csv, write_report, LongRow};
pub use runner::{run_method, Method, MethodRun, PreparedSequence, PreparedTask, RunSettings};
