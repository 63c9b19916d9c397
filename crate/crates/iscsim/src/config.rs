//! Experiment configuration: flat `key = value` text, validation, and a
//! canonical content hash.
//!
//! The format is deliberately trivial to parse from any language: one
//! `key = value` pair per line, `#` starts a comment line, and list values
//! are comma-separated. A run is fully determined by `(config, seed)`; the
//! hash embedded in every artifact header covers the semantic fields only
//! (experiment kind, grids, trial count), so changing the seed, thread
//! count, or output directory never changes the config hash.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::errors::{Error, Result};
use crate::side_info::FeedbackMode;
use crate::special::fnv1a64;

// ---------------------------------------------------------------------------
// Kinds and modes
// ---------------------------------------------------------------------------

/// Which experiment driver a config runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// One-shot channel simulation: rank statistics, code length, and
    /// output-fidelity proxies on the Gaussian test channel.
    ChannelSim,
    /// Encoder/decoder index agreement frequency across bin counts.
    MatchProb,
    /// Side-information rate–distortion table (`rd_points.csv`).
    RdCurve,
    /// Feedback verification sweep across modes and widths.
    FeedbackSweep,
    /// Bimodal importance-sampling comparison (`mis_results.csv`).
    Mis,
    /// Match-probability bound suite against Monte-Carlo truth
    /// (`bounds.csv`).
    Bounds,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::ChannelSim,
        ExperimentKind::MatchProb,
        ExperimentKind::RdCurve,
        ExperimentKind::FeedbackSweep,
        ExperimentKind::Mis,
        ExperimentKind::Bounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ChannelSim => "channel_sim",
            ExperimentKind::MatchProb => "match_prob",
            ExperimentKind::RdCurve => "rd_curve",
            ExperimentKind::FeedbackSweep => "feedback_sweep",
            ExperimentKind::Mis => "mis",
            ExperimentKind::Bounds => "bounds",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Feedback mode selector in a config grid; the width (`l2` or `h`) is
/// supplied by the separate `l2`/`h` grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    None,
    Full,
    Partial,
    Hashed,
}

impl ModeKind {
    pub const ALL: [ModeKind; 4] = [
        ModeKind::None,
        ModeKind::Full,
        ModeKind::Partial,
        ModeKind::Hashed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModeKind::None => "none",
            ModeKind::Full => "full",
            ModeKind::Partial => "partial",
            ModeKind::Hashed => "hashed",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Concrete protocol mode at truncation/hash width `width` (ignored for
    /// `none`/`full`).
    pub fn with_width(self, width: u32) -> FeedbackMode {
        match self {
            ModeKind::None => FeedbackMode::None,
            ModeKind::Full => FeedbackMode::Full,
            ModeKind::Partial => FeedbackMode::Partial { l2: width },
            ModeKind::Hashed => FeedbackMode::Hashed { h: width },
        }
    }
}

// ---------------------------------------------------------------------------
// The config itself
// ---------------------------------------------------------------------------

/// Parsed experiment configuration.
///
/// Grid fields an experiment does not use may be left empty; validation
/// only requires the grids its `kind` consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Pool sizes `N`.
    pub n: Vec<u64>,
    /// Bin counts `L`.
    pub l: Vec<u64>,
    /// Truncation widths for partial feedback.
    pub l2: Vec<u32>,
    /// Hash widths for hashed feedback.
    pub h: Vec<u32>,
    /// Representation noise variances.
    pub sigma2: Vec<f64>,
    /// Coordinates per source block.
    pub k: Vec<u32>,
    /// Mode separations of the bimodal source.
    pub m: Vec<f64>,
    /// Target channel variances of the bimodal model.
    pub d: Vec<f64>,
    /// Slack parameters for concentration-style bounds.
    pub eps: Vec<f64>,
    /// Feedback modes to sweep.
    pub modes: Vec<ModeKind>,
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; `0` means one per available core.
    pub threads: usize,
    /// Output directory for CSV artifacts.
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// Empty config of the given kind; callers fill in the grids.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            n: Vec::new(),
            l: Vec::new(),
            l2: Vec::new(),
            h: Vec::new(),
            sigma2: Vec::new(),
            k: Vec::new(),
            m: Vec::new(),
            d: Vec::new(),
            eps: Vec::new(),
            modes: Vec::new(),
            trials: 0,
            seed: 0,
            threads: 0,
            out: PathBuf::from("results"),
        }
    }

    /// Parse the flat `key = value` text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kind: Option<ExperimentKind> = None;
        let mut cfg = ExperimentConfig::new(ExperimentKind::ChannelSim);
        let mut seen: Vec<(String, usize)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(lineno, line, "expected `key = value`")
            })?;
            let key = key.trim();
            let value = value.trim();
            if let Some((_, first)) = seen.iter().find(|(k, _)| k == key) {
                return Err(Error::config(
                    lineno,
                    key,
                    format!("duplicate key (first set on line {first})"),
                ));
            }
            seen.push((key.to_string(), lineno));

            match key {
                "experiment" => {
                    kind = Some(ExperimentKind::from_name(value).ok_or_else(|| {
                        Error::config(
                            lineno,
                            key,
                            format!(
                                "unknown experiment `{value}` (expected one of: {})",
                                ExperimentKind::ALL.map(|k| k.name()).join(", ")
                            ),
                        )
                    })?);
                }
                "n" => cfg.n = parse_list(lineno, key, value)?,
                "l" => cfg.l = parse_list(lineno, key, value)?,
                "l2" => cfg.l2 = parse_list(lineno, key, value)?,
                "h" => cfg.h = parse_list(lineno, key, value)?,
                "sigma2" => cfg.sigma2 = parse_list(lineno, key, value)?,
                "k" => cfg.k = parse_list(lineno, key, value)?,
                "m" => cfg.m = parse_list(lineno, key, value)?,
                "d" => cfg.d = parse_list(lineno, key, value)?,
                "eps" => cfg.eps = parse_list(lineno, key, value)?,
                "modes" => {
                    cfg.modes = if value.is_empty() {
                        Vec::new()
                    } else {
                        value
                            .split(',')
                            .map(str::trim)
                            .map(|item| {
                                ModeKind::from_name(item).ok_or_else(|| {
                                    Error::config(
                                        lineno,
                                        key,
                                        format!(
                                            "unknown mode `{item}` (expected one of: {})",
                                            ModeKind::ALL.map(|m| m.name()).join(", ")
                                        ),
                                    )
                                })
                            })
                            .collect::<Result<_>>()?
                    };
                }
                "trials" => cfg.trials = parse_scalar(lineno, key, value)?,
                "seed" => cfg.seed = parse_scalar(lineno, key, value)?,
                "threads" => cfg.threads = parse_scalar(lineno, key, value)?,
                "out" => {
                    if value.is_empty() {
                        return Err(Error::config(lineno, key, "output path is empty"));
                    }
                    cfg.out = PathBuf::from(value);
                }
                _ => {
                    return Err(Error::config(
                        lineno,
                        key,
                        "unknown key (expected one of: experiment, n, l, l2, h, sigma2, \
                         k, m, d, eps, modes, trials, seed, threads, out)",
                    ));
                }
            }
        }

        cfg.kind = kind.ok_or_else(|| Error::config(0, "experiment", "key is required"))?;
        Ok(cfg)
    }

    /// Read and parse a config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::config(0, "config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// All violated invariants, in a fixed order; empty means the config is
    /// runnable. Never executes any trials.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let kind = self.kind;

        if self.trials == 0 {
            out.push("trials: must be at least 1".to_string());
        }

        let required: &[&str] = match kind {
            ExperimentKind::ChannelSim => &["n", "sigma2"],
            ExperimentKind::MatchProb => &["n", "sigma2", "l"],
            ExperimentKind::RdCurve => &["k", "n", "l", "sigma2", "modes"],
            ExperimentKind::FeedbackSweep => &["n", "l", "sigma2", "modes"],
            ExperimentKind::Mis => &["n", "m", "d"],
            ExperimentKind::Bounds => &["n", "eps"],
        };
        for &grid in required {
            let empty = match grid {
                "n" => self.n.is_empty(),
                "l" => self.l.is_empty(),
                "sigma2" => self.sigma2.is_empty(),
                "k" => self.k.is_empty(),
                "m" => self.m.is_empty(),
                "d" => self.d.is_empty(),
                "eps" => self.eps.is_empty(),
                "modes" => self.modes.is_empty(),
                _ => unreachable!(),
            };
            if empty {
                out.push(format!(
                    "{grid}: grid must be nonempty for experiment `{}`",
                    kind.name()
                ));
            }
        }

        let binned = matches!(
            kind,
            ExperimentKind::MatchProb | ExperimentKind::RdCurve | ExperimentKind::FeedbackSweep
        );
        for &n in &self.n {
            if n == 0 {
                out.push(format!("n: pool size must be positive (got {n})"));
            } else if binned && !n.is_power_of_two() {
                out.push(format!(
                    "n: constraint pool_power_of_two: N={n} must be a power of two \
                     for binned experiments"
                ));
            } else if kind == ExperimentKind::Mis && n % 2 != 0 {
                out.push(format!(
                    "n: constraint pool_even: N={n} must be even to stratify the \
                     proposals"
                ));
            }
        }
        if binned {
            for &l in &self.l {
                if l == 0 || !l.is_power_of_two() {
                    out.push(format!(
                        "l: constraint bins_power_of_two: L={l} must be a positive \
                         power of two"
                    ));
                }
            }
            let max_l = self.l.iter().copied().max().unwrap_or(0);
            let min_n = self.n.iter().copied().min().unwrap_or(u64::MAX);
            if !self.l.is_empty() && !self.n.is_empty() && max_l > min_n {
                out.push(format!(
                    "l: constraint bins_within_pool: L={max_l} exceeds pool size \
                     N={min_n}"
                ));
            }
        }

        for &s in &self.sigma2 {
            if !(s.is_finite() && s > 0.0) {
                out.push(format!("sigma2: values must be finite and positive (got {s})"));
            }
        }
        for &k in &self.k {
            if k == 0 {
                out.push("k: block length must be at least 1".to_string());
            }
        }
        for &m in &self.m {
            if !m.is_finite() {
                out.push(format!("m: values must be finite (got {m})"));
            }
        }
        for &d in &self.d {
            if !(d.is_finite() && d > 0.0) {
                out.push(format!("d: values must be finite and positive (got {d})"));
            }
        }
        for &e in &self.eps {
            if !(e.is_finite() && e > 0.0 && e < 1.0) {
                out.push(format!("eps: values must lie in (0, 1) (got {e})"));
            }
        }

        if matches!(kind, ExperimentKind::RdCurve | ExperimentKind::FeedbackSweep) {
            if self.modes.contains(&ModeKind::Partial) && self.l2.is_empty() {
                out.push("l2: grid required when modes include `partial`".to_string());
            }
            if self.modes.contains(&ModeKind::Hashed) && self.h.is_empty() {
                out.push("h: grid required when modes include `hashed`".to_string());
            }
            for &l2 in &self.l2 {
                if l2 == 0 || l2 > 64 {
                    out.push(format!("l2: width must lie in 1..=64 (got {l2})"));
                }
            }
            for &h in &self.h {
                if h == 0 || h > 64 {
                    out.push(format!("h: width must lie in 1..=64 (got {h})"));
                }
            }
        }

        out
    }

    /// Fail on the first violation; the message carries every violation so
    /// one failed run reports the complete list.
    pub fn validate(&self) -> Result<()> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::config(0, "config", violations.join("; ")))
        }
    }

    /// Canonical rendering of the semantic fields (kind, grids, trials) in
    /// a fixed key order. Seed, threads, and output path are execution
    /// details and excluded: they never change what an experiment computes.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment={}", self.kind.name());
        push_line(&mut s, "n", &self.n);
        push_line(&mut s, "l", &self.l);
        push_line(&mut s, "l2", &self.l2);
        push_line(&mut s, "h", &self.h);
        push_line(&mut s, "sigma2", &self.sigma2);
        push_line(&mut s, "k", &self.k);
        push_line(&mut s, "m", &self.m);
        push_line(&mut s, "d", &self.d);
        push_line(&mut s, "eps", &self.eps);
        let modes: Vec<&str> = self.modes.iter().map(|m| m.name()).collect();
        let _ = writeln!(s, "modes={}", modes.join(","));
        let _ = writeln!(s, "trials={}", self.trials);
        s
    }

    /// Content hash embedded in every artifact header.
    pub fn hash(&self) -> u64 {
        fnv1a64(self.canonical().as_bytes())
    }
}

fn push_line<T: std::fmt::Display>(out: &mut String, key: &str, values: &[T]) {
    let items: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "{key}={}", items.join(","));
}

fn parse_list<T: std::str::FromStr>(lineno: usize, key: &str, value: &str) -> Result<Vec<T>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(str::trim)
        .map(|item| {
            item.parse::<T>().map_err(|_| {
                Error::config(lineno, key, format!("cannot parse list item `{item}`"))
            })
        })
        .collect()
}

fn parse_scalar<T: std::str::FromStr>(lineno: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::config(lineno, key, format!("cannot parse value `{value}`")))
}
