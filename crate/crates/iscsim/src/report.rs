//! Deterministic emission of experiment artifacts: CSV tables and
//! JSON-lines transcript dumps.
//!
//! Every artifact file begins with a provenance comment
//! `# config=<16 hex digits> seed=<seed>` followed by the column header, so
//! any row can be traced back to the exact configuration that produced it.
//! Numeric cells use Rust's `Display` formatting, which emits the shortest
//! decimal string that parses back to the same value — reruns with an
//! identical configuration and seed therefore produce byte-identical files.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use crate::errors::{Error, Result};
use crate::matching::BoundReport;
use crate::mis::MisRow;
use crate::side_info::{FeedbackMode, Transcript};

// ---------------------------------------------------------------------------
// Cells and tables
// ---------------------------------------------------------------------------

/// One typed CSV cell.
#[derive(Debug, Clone, Copy)]
pub enum Cell<'a> {
    /// Unsigned integer (counts, pool sizes, seeds).
    U(u64),
    /// Signed integer.
    I(i64),
    /// Floating-point value, rendered as the shortest round-trip decimal.
    F(f64),
    /// Short identifier (a scheme, mode, or variant name). Must not contain
    /// commas, quotes, or line breaks; identifiers are written unquoted.
    S(&'a str),
}

impl fmt::Display for Cell<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::U(v) => write!(f, "{v}"),
            Cell::I(v) => write!(f, "{v}"),
            Cell::F(v) => write!(f, "{v}"),
            Cell::S(v) => f.write_str(v),
        }
    }
}

/// In-memory CSV table with a fixed column set.
///
/// Rows are appended with [`Table::push`], which enforces the column count,
/// and the finished table is rendered or written atomically so the
/// provenance line, header, and rows always travel together.
#[derive(Debug, Clone)]
pub struct Table {
    name: String,
    header: &'static [&'static str],
    lines: Vec<String>,
}

impl Table {
    /// New empty table that will be written to file `name` with the given
    /// column header.
    pub fn new(name: impl Into<String>, header: &'static [&'static str]) -> Self {
        Table {
            name: name.into(),
            header,
            lines: Vec::new(),
        }
    }

    /// File name this table writes to (e.g. `rd_points.csv`).
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of data rows appended so far.
    pub fn rows(&self) -> usize {
        self.lines.len()
    }

    /// Append one row. The cell count must match the header and string
    /// cells must be plain identifiers (no commas, quotes, or newlines).
    pub fn push(&mut self, cells: &[Cell]) -> Result<()> {
        if cells.len() != self.header.len() {
            return Err(Error::invalid(format!(
                "table {}: row has {} cells, header has {} columns",
                self.name,
                cells.len(),
                self.header.len()
            )));
        }
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if let Cell::S(s) = cell {
                if s.bytes()
                    .any(|b| matches!(b, b',' | b'"' | b'\n' | b'\r'))
                {
                    return Err(Error::invalid(format!(
                        "table {}: string cell {s:?} is not a plain identifier",
                        self.name
                    )));
                }
            }
            if i > 0 {
                line.push(',');
            }
            write!(line, "{cell}").expect("formatting into a String cannot fail");
        }
        self.lines.push(line);
        Ok(())
    }

    /// Render the complete file contents: provenance line, header, rows.
    pub fn render(&self, config_hash: u64, seed: u64) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# config={config_hash:016x} seed={seed}");
        let _ = writeln!(out, "{}", self.header.join(","));
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }

    /// Write the rendered table into `dir` (created if missing) and return
    /// the full path.
    pub fn write(&self, dir: &Path, config_hash: u64, seed: u64) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(&self.name);
        fs::write(&path, self.render(config_hash, seed))?;
        Ok(path)
    }
}

// ---------------------------------------------------------------------------
// Pinned column sets
// ---------------------------------------------------------------------------

/// Columns of `rd_points.csv`, the side-information rate–distortion table.
pub const RD_COLUMNS: &[&str] = &[
    "k",
    "N",
    "L",
    "mode",
    "L2_or_h",
    "sigma2_wv",
    "rate_bits_per_sample",
    "distortion_db",
    "mse",
    "p_mismatch",
    "undetected_err_rate",
    "trials",
    "seed",
];

/// Columns of `mis_results.csv`, the bimodal importance-sampling comparison.
pub const MIS_COLUMNS: &[&str] = &[
    "scheme",
    "N",
    "mean_dist",
    "var_dist",
    "rate_bits",
    "trials",
    "seed",
];

/// Columns of `bounds.csv`: one match-probability bound evaluation per row,
/// followed by provenance (trial count and seed).
pub const BOUND_COLUMNS: &[&str] = &[
    "variant", "N", "omega", "d2", "d3", "d5", "mu", "bound", "p_hat", "ci_lo", "ci_hi", "trials",
    "seed",
];

/// One row of the side-information rate–distortion table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdRow {
    /// Coordinates per source block.
    pub k: u32,
    /// Pool size.
    pub n: u64,
    /// Bin count.
    pub l: u64,
    /// Feedback mode used for verification.
    pub mode: FeedbackMode,
    /// Representation noise variance of the forward channel.
    pub sigma2_wv: f64,
    /// Mean forward bits per source coordinate.
    pub rate_bits_per_sample: f64,
    /// `10 log10(mse)`.
    pub distortion_db: f64,
    /// Mean squared error of the decoder's fused estimate.
    pub mse: f64,
    /// First-round candidate disagreement frequency.
    pub p_mismatch: f64,
    /// Frequency of the decoder finishing on a wrong index.
    pub undetected_err_rate: f64,
    pub trials: u64,
}

impl RdRow {
    /// Cells in `RD_COLUMNS` order.
    pub fn cells(&self, seed: u64) -> [Cell<'static>; 13] {
        [
            Cell::U(u64::from(self.k)),
            Cell::U(self.n),
            Cell::U(self.l),
            Cell::S(self.mode.name()),
            Cell::U(u64::from(self.mode.width())),
            Cell::F(self.sigma2_wv),
            Cell::F(self.rate_bits_per_sample),
            Cell::F(self.distortion_db),
            Cell::F(self.mse),
            Cell::F(self.p_mismatch),
            Cell::F(self.undetected_err_rate),
            Cell::U(self.trials),
            Cell::U(seed),
        ]
    }
}

/// Cells for one scheme/pool-size row of the importance-sampling
/// comparison, in `MIS_COLUMNS` order.
pub fn mis_cells(row: &MisRow, seed: u64) -> [Cell<'static>; 7] {
    [
        Cell::S(row.scheme.name()),
        Cell::U(row.n),
        Cell::F(row.mean_dist),
        Cell::F(row.var_dist),
        Cell::F(row.rate_bits),
        Cell::U(row.trials),
        Cell::U(seed),
    ]
}

/// Cells for one bound evaluation, in `BOUND_COLUMNS` order.
pub fn bound_cells(report: &BoundReport, trials: u64, seed: u64) -> [Cell<'static>; 13] {
    [
        Cell::S(report.variant),
        Cell::U(report.n),
        Cell::F(report.omega),
        Cell::F(report.d2),
        Cell::F(report.d3),
        Cell::F(report.d5),
        Cell::F(report.mu),
        Cell::F(report.bound),
        Cell::F(report.p_hat),
        Cell::F(report.ci_lo),
        Cell::F(report.ci_hi),
        Cell::U(trials),
        Cell::U(seed),
    ]
}

// ---------------------------------------------------------------------------
// JSON-lines transcripts
// ---------------------------------------------------------------------------

fn json_f64(out: &mut String, value: f64) {
    if value.is_finite() {
        let _ = write!(out, "{value}");
    } else {
        out.push_str("null");
    }
}

/// Render one protocol transcript as a single-line JSON object.
pub fn transcript_json(t: &Transcript) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "{{\"u_enc\":{},\"u_dec_first\":{},\"u_dec_final\":{},\
         \"mismatch_first\":{},\"detected\":{},\"undetected_error\":{},\
         \"forward_bits\":{},\"forward_bits_nominal\":{},\"feedback_bits\":{}",
        t.u_enc,
        t.u_dec_first,
        t.u_dec_final,
        t.mismatch_first,
        t.detected,
        t.undetected_error,
        t.forward_bits,
        t.forward_bits_nominal,
        t.feedback_bits
    );
    s.push_str(",\"w_enc\":");
    json_f64(&mut s, t.w_enc);
    s.push_str(",\"w_dec\":");
    json_f64(&mut s, t.w_dec);
    s.push_str(",\"v_hat\":");
    json_f64(&mut s, t.v_hat);
    let _ = write!(s, ",\"l2_clamped\":{}}}", t.l2_clamped);
    s
}

/// Dump protocol transcripts as JSON-lines (one object per line) for
/// debugging; creates parent directories as needed.
pub fn write_transcripts(path: &Path, transcripts: &[Transcript]) -> Result<PathBuf> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut out = String::new();
    for t in transcripts {
        out.push_str(&transcript_json(t));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(path.to_path_buf())
}
