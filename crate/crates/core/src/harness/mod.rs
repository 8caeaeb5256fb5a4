//! Experiment orchestration: configuration, runs E1..E5, reports and plot data.
//!
//! A run computes everything in memory, then writes `report.json` (summary,
//! checks, plot series) and `trials.jsonl` (one record per trial, sorted by
//! key) through temporary files and renames. Reports hold no timestamps or
//! paths, so identical configs give identical bytes.

mod config;
mod experiments;
mod plot;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::{format_rat, Rat};

pub use config::{
    parse_config, parse_config_str, ExperimentConfig, ExperimentId, FractalPreset, MAX_EXHAUSTIVE,
    MAX_HORIZON,
};
pub use experiments::{exhaustive_profiles, fuzz_profile};
pub use plot::{emit_plot_data, PlotManifest};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Computed by running a construction or estimator on data.
    Measured,
    /// Produced by the bound engine; reproducible from the stored inputs.
    Certified,
    /// Known exactly from the construction.
    ClosedForm,
}

/// A numeric value with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tagged {
    pub value: Value,
    pub provenance: Provenance,
}

impl Tagged {
    pub fn measured(v: impl Into<Value>) -> Self {
        Tagged {
            value: v.into(),
            provenance: Provenance::Measured,
        }
    }

    pub fn certified(v: impl Into<Value>) -> Self {
        Tagged {
            value: v.into(),
            provenance: Provenance::Certified,
        }
    }

    pub fn closed_form(v: impl Into<Value>) -> Self {
        Tagged {
            value: v.into(),
            provenance: Provenance::ClosedForm,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match &self.value {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => crate::rational::parse_rat(s).ok().map(|r| crate::rational::to_f64(&r)),
            _ => None,
        }
    }
}

/// Exact rationals are stored as `"n/d"` strings.
pub fn rat_value(x: &Rat) -> Value {
    Value::String(format_rat(x))
}

/// Finite floats only; everything else is a bug upstream.
pub fn f64_value(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .expect("report values are finite")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: Tagged,
    /// Human-readable condition, e.g. `>= 0.95`.
    pub expected: String,
    pub pass: bool,
}

/// A two-column series for [`emit_plot_data`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub provenance: Provenance,
    pub points: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub key: String,
    /// Inputs needed to recompute the values.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub inputs: BTreeMap<String, Value>,
    pub values: BTreeMap<String, Tagged>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config_hash: String,
    pub config: BTreeMap<String, String>,
    pub summary: BTreeMap<String, Tagged>,
    pub checks: Vec<Check>,
    pub series: Vec<Series>,
    pub trial_count: usize,
    pub pass: bool,
    /// Written to `trials.jsonl`, not to the summary document.
    #[serde(skip)]
    pub trials: Vec<Trial>,
}

impl ExperimentReport {
    pub(crate) fn new(cfg: &ExperimentConfig) -> Self {
        ExperimentReport {
            experiment: cfg.id.to_string(),
            config_hash: cfg.hash(),
            config: cfg.recorded.clone(),
            summary: BTreeMap::new(),
            checks: Vec::new(),
            series: Vec::new(),
            trial_count: 0,
            pass: true,
            trials: Vec::new(),
        }
    }

    pub(crate) fn check(&mut self, name: &str, value: Tagged, expected: &str, pass: bool) {
        self.checks.push(Check {
            name: name.into(),
            value,
            expected: expected.into(),
            pass,
        });
    }

    pub(crate) fn finish(mut self) -> Self {
        self.trials.sort_by(|a, b| a.key.cmp(&b.key));
        self.trial_count = self.trials.len();
        self.pass = self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn trials_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.trials {
            out.push_str(&serde_json::to_string(t).expect("trials serialize"));
            out.push('\n');
        }
        out
    }

    /// Reads `report.json` and, when present, `trials.jsonl` from `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        let path = if dir.is_dir() { dir.join("report.json") } else { dir.to_path_buf() };
        let mut report: ExperimentReport = serde_json::from_str(&fs::read_to_string(&path)?)?;
        let trials = path.with_file_name("trials.jsonl");
        if trials.exists() {
            report.trials = fs::read_to_string(trials)?
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(serde_json::from_str)
                .collect::<std::result::Result<_, _>>()?;
        }
        Ok(report)
    }
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(std::io::Error::other("path has no file name")))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes `report.json` and `trials.jsonl` into `dir`, returning their paths.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let trials = dir.join("trials.jsonl");
    write_atomic(&trials, report.trials_jsonl().as_bytes())?;
    let summary = dir.join("report.json");
    write_atomic(&summary, report.to_json().as_bytes())?;
    Ok((summary, trials))
}

/// Thread count from `LAB_THREADS`, when set to a positive integer.
pub fn lab_threads() -> Option<usize> {
    std::env::var("LAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs the configured experiment in memory. Nothing is written.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let run = || match cfg.id {
        ExperimentId::E1 => experiments::e1(cfg),
        ExperimentId::E2 => experiments::e2(cfg),
        ExperimentId::E3 => experiments::e3(cfg),
        ExperimentId::E4 => experiments::e4(cfg),
        ExperimentId::E5 => experiments::e5(cfg),
    };
    let report = match lab_threads() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("LAB_THREADS: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(report.finish())
}

/// [`run_experiment`] followed by [`write_report`] into the configured directory.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let report = run_experiment(cfg)?;
    write_report(&report, &cfg.output_dir)?;
    Ok(report)
}
