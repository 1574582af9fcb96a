use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SCHEMA: &str = "drsub-result-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    /// One recorded iteration.
    Iter,
    /// Final state of one algorithm on one instance.
    Summary,
    /// Mean over instances, in instance order.
    Aggregate,
}

/// One CSV line of a run.
///
/// `ratio_vs_oracle` is `value / OPT` for offline runs with a grid
/// optimum, and cumulative reward over cumulative benchmark reward for
/// online runs. `floor` is the offline guarantee at the start point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub kind: RowKind,
    pub experiment: String,
    pub instance: Option<usize>,
    pub instance_seed: Option<u64>,
    pub n: usize,
    pub m: usize,
    pub algorithm: String,
    pub t: usize,
    pub value: Option<f64>,
    pub ratio_vs_oracle: Option<f64>,
    pub cumulative_reward: Option<f64>,
    pub floor: Option<f64>,
}

/// Wall-clock seconds, kept out of the main CSV so its body is
/// reproducible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub experiment: String,
    pub instance: usize,
    pub algorithm: String,
    pub t: usize,
    pub wall_time: f64,
}

/// `# `-prefixed provenance lines: artifact version, schema and the full
/// config.
pub fn header(cfg: &ExperimentConfig) -> String {
    let mut out = format!("# drsub {VERSION}\n# schema {SCHEMA}\n# config begin\n");
    for line in cfg.to_toml().lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("# config end\n");
    out
}

/// Writes `header`, then the rows as CSV with a column header line. A
/// `status` message marks a partial file.
pub fn write_csv<S: Serialize>(path: &Path, header: &str, rows: &[S], status: Option<&str>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut file = fs::File::create(path)?;
    file.write_all(header.as_bytes())?;
    if let Some(status) = status {
        writeln!(file, "# status: {status}")?;
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// `<stem>.timing.csv` next to `path`.
pub fn timing_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.timing.csv"))
}

/// Everything after the `#` header lines.
pub fn csv_body(text: &str) -> String {
    text.lines()
        .skip_while(|l| l.starts_with('#'))
        .flat_map(|l| [l, "\n"])
        .collect()
}
