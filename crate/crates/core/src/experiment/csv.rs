use std::fmt::{self, Write as _};
use std::io;

/// Where the numbers in a row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Model,
    Simulation,
    /// Simulated values with the model value in trailing columns.
    Both,
    /// The point could not be evaluated; numeric fields are empty.
    Skipped,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Model => "model",
            Self::Simulation => "simulation",
            Self::Both => "both",
            Self::Skipped => "skipped",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The x-axis of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepKey {
    Groups,
    Procs,
}

impl SweepKey {
    pub fn column(self) -> &'static str {
        match self {
            Self::Groups => "NB_groups",
            Self::Procs => "NB_procs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub key: u64,
    pub overall_comm: Option<f64>,
    pub time_mean: Option<f64>,
    pub latency_s: Option<f64>,
    pub bandwidth_s: Option<f64>,
    pub compute_s: Option<f64>,
    pub source: Source,
    /// Values for [`SweepResult::extra_columns`], already formatted.
    pub extra: Vec<String>,
}

impl SweepRow {
    pub fn skipped(key: u64, extra_columns: usize) -> Self {
        Self {
            key,
            overall_comm: None,
            time_mean: None,
            latency_s: None,
            bandwidth_s: None,
            compute_s: None,
            source: Source::Skipped,
            extra: vec![String::new(); extra_columns],
        }
    }
}

/// One CSV table. Fixed columns come first, then `extra_columns`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub key: SweepKey,
    /// Written as `# ` lines before the header.
    pub comments: Vec<String>,
    pub extra_columns: Vec<&'static str>,
    pub rows: Vec<SweepRow>,
}

pub const FIXED_COLUMNS: [&str; 6] = [
    "overall_comm",
    "time_mean",
    "latency_s",
    "bandwidth_s",
    "compute_s",
    "source",
];

/// Shortest round-trip decimal form; identical input gives identical text.
pub fn format_f64(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

impl SweepResult {
    pub fn new(key: SweepKey, extra_columns: Vec<&'static str>) -> Self {
        Self {
            key,
            comments: Vec::new(),
            extra_columns,
            rows: Vec::new(),
        }
    }

    pub fn header(&self) -> String {
        let mut cols = vec![self.key.column()];
        cols.extend(FIXED_COLUMNS);
        cols.extend(&self.extra_columns);
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            writeln!(out, "# {c}").unwrap();
        }
        writeln!(out, "{}", self.header()).unwrap();
        for r in &self.rows {
            debug_assert_eq!(r.extra.len(), self.extra_columns.len());
            write!(
                out,
                "{},{},{},{},{},{},{}",
                r.key,
                opt(r.overall_comm),
                opt(r.time_mean),
                opt(r.latency_s),
                opt(r.bandwidth_s),
                opt(r.compute_s),
                r.source
            )
            .unwrap();
            for e in &r.extra {
                write!(out, ",{e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, mut w: impl io::Write) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }

    pub fn row(&self, key: u64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.key == key)
    }
}

/// Splits data lines of a CSV produced by [`SweepResult::to_csv`] into
/// fields, skipping comments and the header.
pub fn parse_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}
