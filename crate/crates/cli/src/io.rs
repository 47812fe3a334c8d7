//! Text tables, discharge records and chain files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use chrono::{DateTime, NaiveDate, NaiveDateTime};
use obsharvest_core::regime::{ChainEstimate, DischargeSeries};
use obsharvest_core::RegimeChain;

/// Formats a value so that it parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// A comma-separated table with `#` comment lines on top.
pub struct Table {
    comments: Vec<String>,
    columns: Vec<String>,
    body: String,
}

impl Table {
    pub fn new(config_hash: &str, columns: &[&str]) -> Self {
        Self {
            comments: vec![format!(
                "obsharvest {} config_hash={config_hash}",
                env!("CARGO_PKG_VERSION")
            )],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            body: String::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.body.push_str(&cells.join(","));
        self.body.push('\n');
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        s.push_str(&self.body);
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render()).with_context(|| format!("writing {}", path.display()))
    }
}

/// Parses "timestamp, discharge" lines. Times become days since the first
/// record. A blank or `NA` discharge is a gap. `#` lines, empty lines and a
/// leading header line are skipped.
pub fn parse_discharge_series(text: &str, interval: f64) -> Result<DischargeSeries> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut origin: Option<NaiveDateTime> = None;
    let mut seen_data = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (stamp, value) = line.split_once(',').unwrap_or((line, ""));
        let stamp = stamp.trim();
        let when = match parse_timestamp(stamp) {
            Some(t) => t,
            None if !seen_data => {
                seen_data = true;
                continue;
            }
            None => bail!("line {}: cannot parse timestamp `{stamp}`", lineno + 1),
        };
        seen_data = true;
        let value = value.trim();
        let q = if value.is_empty() || value.eq_ignore_ascii_case("na") {
            None
        } else {
            Some(
                value
                    .parse::<f64>()
                    .with_context(|| format!("line {}: bad discharge `{value}`", lineno + 1))?,
            )
        };
        let t0 = *origin.get_or_insert(when);
        let seconds = (when - t0).num_milliseconds() as f64 / 1000.0;
        times.push(seconds / 86_400.0);
        values.push(q);
    }
    if times.is_empty() {
        bail!("no discharge records found");
    }
    DischargeSeries::new(times, values, interval).map_err(|e| anyhow::anyhow!("{e}"))
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.naive_utc());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t);
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
}

/// Generator rows, space separated, diagonal `-sum` of the row.
pub fn render_chain_matrix(config_hash: &str, estimate: &ChainEstimate) -> String {
    let n = estimate.regime_count();
    let mut s = format!(
        "# obsharvest {} config_hash={config_hash}\n# generator matrix (1/day), row i = from regime i\n",
        env!("CARGO_PKG_VERSION")
    );
    for i in 0..n {
        let exit: f64 = (0..n).filter(|&j| j != i).map(|j| estimate.rate(i, j)).sum();
        let row: Vec<_> = (0..n)
            .map(|j| fmt_f64(if i == j { -exit } else { estimate.rate(i, j) }))
            .collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

/// Sidecar of the rate matrix: `key = value` lines.
pub fn render_chain_meta(
    config_hash: &str,
    estimate: &ChainEstimate,
    q0: f64,
    dq: f64,
) -> String {
    let levels: Vec<_> = estimate.levels.iter().map(|&q| fmt_f64(q)).collect();
    let occupancy: Vec<_> = estimate.occupancy.iter().map(|&o| fmt_f64(o)).collect();
    let unvisited: Vec<_> = (0..estimate.regime_count())
        .filter(|&i| !estimate.visited[i])
        .map(|i| i.to_string())
        .collect();
    format!(
        "# obsharvest {} config_hash={config_hash}\n\
         I = {}\n\
         q_rule = Q_i = {} + {} i\n\
         levels = {}\n\
         interval_days = {}\n\
         pairs = {}\n\
         entropy = {}\n\
         occupancy = {}\n\
         unvisited = {}\n",
        env!("CARGO_PKG_VERSION"),
        estimate.regime_count() - 1,
        fmt_f64(q0),
        fmt_f64(dq),
        levels.join(" "),
        fmt_f64(estimate.interval),
        estimate.pairs,
        fmt_f64(estimate.entropy),
        occupancy.join(" "),
        unvisited.join(" "),
    )
}

/// Reads a matrix written by [`render_chain_matrix`] and the `levels` entry
/// of its `<path>.meta` sidecar.
pub fn read_chain(path: &Path) -> Result<RegimeChain> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("{}:{}: bad rate", path.display(), k + 1))?;
        rows.push(row);
    }
    let meta_path = meta_path(path);
    let meta = fs::read_to_string(&meta_path)
        .with_context(|| format!("reading {}", meta_path.display()))?;
    let levels = meta
        .lines()
        .find_map(|l| l.strip_prefix("levels = "))
        .with_context(|| format!("{}: no `levels` entry", meta_path.display()))?
        .split_whitespace()
        .map(str::parse::<f64>)
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("{}: bad level", meta_path.display()))?;
    if rows.len() != levels.len() {
        bail!(
            "{}: {} rows but {} levels in the sidecar",
            path.display(),
            rows.len(),
            levels.len()
        );
    }
    RegimeChain::from_rows(levels, &rows).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

pub fn meta_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    s.into()
}
