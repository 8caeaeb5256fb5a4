//! Experiment configuration: INI-style `key = value` lines grouped in
//! `[section]`s. Every key an experiment reads has a default; the effective
//! values (defaults filled) are recorded and hashed.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use num_traits::Signed;
use sha2::{Digest, Sha256};

use crate::bounds::EngineConfig;
use crate::directions::{mask_intervals, MaskKind, ScaleSequence, SeqRule};
use crate::energy::MAX_POSITION;
use crate::error::{Error, Result};
use crate::fractal::{DIRECTION_BITS, MAX_CELLS, MAX_PRECISION};
use crate::rational::{format_rat, int, parse_rat, Rat};

/// Largest horizon enumerated exhaustively (`3^R` planar profiles).
pub const MAX_EXHAUSTIVE: u64 = 14;
/// Largest horizon for fuzzed profiles and sampled directions.
pub const MAX_HORIZON: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExperimentId {
    E1,
    E2,
    E3,
    E4,
    E5,
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "E1" => Ok(ExperimentId::E1),
            "E2" => Ok(ExperimentId::E2),
            "E3" => Ok(ExperimentId::E3),
            "E4" => Ok(ExperimentId::E4),
            "E5" => Ok(ExperimentId::E5),
            _ => Err(Error::Config(format!("experiment.id must be E1..E5, got {s:?}"))),
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FractalPreset {
    FourCorner,
    DigitDensity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    pub seed: u64,
    pub samples: usize,
    pub output_dir: PathBuf,
    pub sequence: ScaleSequence,
    pub mask: Option<MaskKind>,
    pub horizon: u64,
    pub preset: Option<FractalPreset>,
    pub depths: Vec<u32>,
    pub density: Rat,
    pub precision: u32,
    pub scales: Vec<u32>,
    pub exhaustive_max: u64,
    pub fuzz_horizon: u64,
    pub sigmas: Vec<Rat>,
    pub engine: EngineConfig,
    pub tolerances: BTreeMap<String, f64>,
    /// Effective `section.key -> value`, defaults included, output dir excluded.
    pub recorded: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// SHA-256 of the recorded values, one `key=value` line each in key order.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.recorded {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances[name]
    }
}

/// Keys each experiment accepts, with their defaults. `output.dir` is handled
/// separately.
fn defaults(id: ExperimentId) -> Vec<(&'static str, String)> {
    let engine = EngineConfig::default();
    let mut d: Vec<(&str, String)> = vec![("experiment.seed", "1".into())];
    let engine_keys = |d: &mut Vec<(&str, String)>, b_min: u64| {
        d.push(("engine.log_const", format_rat(&engine.log_const)));
        d.push(("engine.lemma_const", format_rat(&engine.lemma_const)));
        d.push(("engine.soi_const", format_rat(&engine.soi_const)));
        d.push(("engine.slack_c", engine.slack_c.to_string()));
        d.push(("engine.b_min", b_min.to_string()));
    };
    match id {
        ExperimentId::E1 => {
            d.push(("experiment.samples", "200".into()));
            d.push(("sequence.rule", "geo:4".into()));
            d.push(("sequence.length", "4".into()));
            d.push(("mask.kind", "d0".into()));
            d.push(("mask.s", "1/2".into()));
            d.push(("mask.eps", "none".into()));
            d.push(("mask.horizon", "512".into()));
            d.push(("tolerance.exponent", "0.05".into()));
        }
        ExperimentId::E2 => {
            d.push(("experiment.samples", "20".into()));
            d.push(("sequence.rule", "paper".into()));
            d.push(("sequence.length", "2".into()));
            d.push(("mask.kind", "d0".into()));
            d.push(("mask.s", "1/2".into()));
            d.push(("mask.eps", "none".into()));
            d.push(("mask.horizon", "64".into()));
            d.push(("fractal.preset", "four-corner".into()));
            d.push(("fractal.depths", "4..8".into()));
            d.push(("tolerance.slope", "0.03".into()));
            d.push(("tolerance.min_slope", "0.95".into()));
        }
        ExperimentId::E3 => {
            d.push(("experiment.samples", "20".into()));
            d.push(("sequence.rule", "paper".into()));
            d.push(("sequence.length", "2".into()));
            d.push(("mask.kind", "ds".into()));
            d.push(("mask.s", "1/2".into()));
            d.push(("mask.eps", "none".into()));
            d.push(("mask.horizon", "64".into()));
            d.push(("fractal.preset", "digit-density".into()));
            d.push(("fractal.density", "2/5".into()));
            d.push(("fractal.precision", "64".into()));
            d.push(("fractal.scales", "16..64:4".into()));
            d.push(("tolerance.min_slope", "0.75".into()));
        }
        ExperimentId::E4 => {
            d.push(("experiment.samples", "10000".into()));
            d.push(("sequence.rule", "paper".into()));
            d.push(("sequence.length", "2".into()));
            d.push(("profile.exhaustive_max", "12".into()));
            d.push(("profile.fuzz_horizon", "64".into()));
            // the exhaustive corpus starts at R = 2
            engine_keys(&mut d, 1);
        }
        ExperimentId::E5 => {
            d.push(("experiment.samples", "10000".into()));
            d.push(("profile.exhaustive_max", "12".into()));
            d.push(("profile.fuzz_horizon", "64".into()));
            d.push(("profile.sigmas", "1/3,1/2,2/3,1".into()));
        }
    }
    d
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut given: BTreeMap<String, String> = BTreeMap::new();
    for (section, props) in ini.iter() {
        for (k, v) in props.iter() {
            let key = match section {
                Some(s) => format!("{}.{}", s.trim(), k.trim()),
                None => k.trim().to_string(),
            };
            if given.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("key {key} given twice")));
            }
        }
    }
    let id: ExperimentId = given
        .remove("experiment.id")
        .ok_or_else(|| Error::Config("missing required key experiment.id".into()))?
        .parse()?;
    let output_dir = given
        .remove("output.dir")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(format!("lab-out/{}", id.to_string().to_lowercase())));

    let mut recorded: BTreeMap<String, String> = defaults(id)
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let unknown: Vec<&String> = given.keys().filter(|k| !recorded.contains_key(*k)).collect();
    if !unknown.is_empty() {
        let names: Vec<&str> = unknown.iter().map(|s| s.as_str()).collect();
        return Err(Error::Config(format!(
            "unknown keys for {id}: {}",
            names.join(", ")
        )));
    }
    recorded.extend(given);
    recorded.insert("experiment.id".into(), id.to_string());
    build(id, output_dir, recorded)
}

struct Fields<'a>(&'a BTreeMap<String, String>);

impl Fields<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
            })
            .transpose()
    }

    fn rat(&self, key: &str) -> Result<Option<Rat>> {
        match self.raw(key) {
            None | Some("none") => Ok(None),
            Some(v) => parse_rat(v)
                .map(Some)
                .map_err(|e| Error::Config(format!("{key}: {e}"))),
        }
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

/// `a..b` (inclusive), `a..b:step`, or a comma list.
fn parse_range(key: &str, text: &str) -> Result<Vec<u32>> {
    let bad = || Error::Config(format!("{key}: expected a..b, a..b:step or a list, got {text:?}"));
    let num = |s: &str| s.trim().parse::<u32>().map_err(|_| bad());
    let values = if let Some((lo, rest)) = text.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (num(hi)?, num(step)?),
            None => (num(rest)?, 1),
        };
        let lo = num(lo)?;
        if step == 0 || hi < lo {
            return Err(bad());
        }
        (lo..=hi).step_by(step as usize).collect()
    } else {
        text.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if values.len() < 2 {
        return Err(Error::Config(format!("{key}: need at least two values")));
    }
    Ok(values)
}

fn build(
    id: ExperimentId,
    output_dir: PathBuf,
    recorded: BTreeMap<String, String>,
) -> Result<ExperimentConfig> {
    let f = Fields(&recorded);
    let need = |key: &str| Error::Config(format!("{key} is required"));
    let seed: u64 = f.get("experiment.seed")?.ok_or_else(|| need("experiment.seed"))?;
    let samples: usize = f.get("experiment.samples")?.unwrap_or(0);

    let sequence = match f.raw("sequence.rule") {
        Some(rule) => {
            let rule = SeqRule::parse(rule).map_err(config_err)?;
            let len: usize = f.get("sequence.length")?.ok_or_else(|| need("sequence.length"))?;
            ScaleSequence::build(&rule, len).map_err(config_err)?
        }
        None => ScaleSequence::build(&SeqRule::Paper, 1).map_err(config_err)?,
    };

    let s = f.rat("mask.s")?;
    if let Some(s) = s {
        if !s.is_positive() || s >= int(1) {
            return Err(Error::Config(format!("mask.s must lie in (0, 1), got {}", format_rat(&s))));
        }
    }
    let eps = f.rat("mask.eps")?;
    let mask = match f.raw("mask.kind") {
        Some(kind) => Some(MaskKind::parse(kind, s, eps).map_err(config_err)?),
        None => None,
    };
    let horizon: u64 = f.get("mask.horizon")?.unwrap_or(0);
    if let Some(kind) = mask {
        if !(2..=MAX_HORIZON).contains(&horizon) {
            return Err(Error::Config(format!("mask.horizon must lie in [2, {MAX_HORIZON}]")));
        }
        mask_intervals(kind, &sequence, horizon).map_err(config_err)?;
    }

    let preset = match f.raw("fractal.preset") {
        None => None,
        Some("four-corner") => Some(FractalPreset::FourCorner),
        Some("digit-density") => Some(FractalPreset::DigitDensity),
        Some(other) => {
            return Err(Error::Config(format!("fractal.preset: unknown preset {other:?}")))
        }
    };
    let expected = match id {
        ExperimentId::E2 => Some(FractalPreset::FourCorner),
        ExperimentId::E3 => Some(FractalPreset::DigitDensity),
        _ => None,
    };
    if preset != expected {
        return Err(Error::Config(format!("{id} needs fractal.preset {expected:?}")));
    }
    let depths = match f.raw("fractal.depths") {
        Some(t) => parse_range("fractal.depths", t)?,
        None => Vec::new(),
    };
    // each depth m is a 4^m-cell set at precision 2m, projected at 2m bits
    if let Some(&m) = depths.iter().find(|&&m| {
        m == 0 || 2 * m > MAX_PRECISION.min(DIRECTION_BITS) || 4u64.pow(m) > MAX_CELLS
    }) {
        return Err(Error::Infeasible(format!("fractal.depths: depth {m} breaches the caps")));
    }
    let density = f.rat("fractal.density")?.unwrap_or(int(1));
    if !density.is_positive() || density > int(1) {
        return Err(Error::Config("fractal.density must lie in (0, 1]".into()));
    }
    let precision: u32 = f.get("fractal.precision")?.unwrap_or(0);
    let scales = match f.raw("fractal.scales") {
        Some(t) => parse_range("fractal.scales", t)?,
        None => Vec::new(),
    };
    if preset == Some(FractalPreset::DigitDensity) {
        if precision == 0 || precision > MAX_POSITION {
            return Err(Error::Infeasible(format!(
                "fractal.precision must lie in [1, {MAX_POSITION}]"
            )));
        }
        if scales.iter().any(|&k| k == 0 || k > precision) {
            return Err(Error::Config("fractal.scales must lie in [1, fractal.precision]".into()));
        }
    }

    let exhaustive_max: u64 = f.get("profile.exhaustive_max")?.unwrap_or(0);
    if exhaustive_max > MAX_EXHAUSTIVE {
        return Err(Error::Infeasible(format!(
            "profile.exhaustive_max {exhaustive_max} exceeds {MAX_EXHAUSTIVE}"
        )));
    }
    let fuzz_horizon: u64 = f.get("profile.fuzz_horizon")?.unwrap_or(0);
    if matches!(id, ExperimentId::E4 | ExperimentId::E5)
        && !(2..=MAX_HORIZON).contains(&fuzz_horizon)
    {
        return Err(Error::Config(format!("profile.fuzz_horizon must lie in [2, {MAX_HORIZON}]")));
    }
    let sigmas = match f.raw("profile.sigmas") {
        Some(t) => t
            .split(',')
            .map(|v| parse_rat(v).map_err(|e| Error::Config(format!("profile.sigmas: {e}"))))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    if sigmas.iter().any(|s| !s.is_positive() || *s > int(1)) {
        return Err(Error::Config("profile.sigmas must lie in (0, 1]".into()));
    }

    let defaults = EngineConfig::default();
    let engine = EngineConfig {
        log_const: f.rat("engine.log_const")?.unwrap_or(defaults.log_const),
        lemma_const: f.rat("engine.lemma_const")?.unwrap_or(defaults.lemma_const),
        soi_const: f.rat("engine.soi_const")?.unwrap_or(defaults.soi_const),
        slack_c: f.get("engine.slack_c")?.unwrap_or(defaults.slack_c),
        b_min: f.get("engine.b_min")?.unwrap_or(defaults.b_min),
    };
    if [engine.log_const, engine.lemma_const, engine.soi_const].iter().any(Signed::is_negative) {
        return Err(Error::Config("engine constants must be non-negative".into()));
    }

    let mut tolerances = BTreeMap::new();
    for (k, v) in &recorded {
        if let Some(name) = k.strip_prefix("tolerance.") {
            let t: f64 = v
                .parse()
                .map_err(|_| Error::Config(format!("{k}: cannot parse {v:?}")))?;
            if !t.is_finite() {
                return Err(Error::Config(format!("{k} must be finite")));
            }
            tolerances.insert(name.to_string(), t);
        }
    }

    Ok(ExperimentConfig {
        id,
        seed,
        samples,
        output_dir,
        sequence,
        mask,
        horizon,
        preset,
        depths,
        density,
        precision,
        scales,
        exhaustive_max,
        fuzz_horizon,
        sigmas,
        engine,
        tolerances,
        recorded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config_str("[experiment]\nid = E1\n").unwrap();
        assert_eq!(c.id, ExperimentId::E1);
        assert_eq!(c.samples, 200);
        assert_eq!(c.sequence.values(), &[2, 8, 32, 128]);
        assert_eq!(c.recorded["mask.horizon"], "512");
        let again = parse_config_str("[experiment]\nid = E1\n\n[output]\ndir = elsewhere\n").unwrap();
        assert_eq!(c.hash(), again.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn explicit_default_keeps_hash() {
        let a = parse_config_str("[experiment]\nid = E2\n").unwrap();
        let b = parse_config_str("[experiment]\nid = E2\nseed = 1\n").unwrap();
        let c = parse_config_str("[experiment]\nid = E2\nseed = 2\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse_config_str("[experiment]\nid = E1\nsede = 3\n[mask]\nknd = d0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("experiment.sede") && msg.contains("mask.knd"), "{msg}");
        // a key of another experiment is unknown here too
        assert!(parse_config_str("[experiment]\nid = E1\n[fractal]\ndepths = 4..8\n").is_err());
    }

    #[test]
    fn missing_id_and_bad_values() {
        assert!(matches!(parse_config_str("[experiment]\nseed = 1\n"), Err(Error::Config(_))));
        let err = parse_config_str("[experiment]\nid = E1\n[mask]\nkind = ds\ns = 3/2\n").unwrap_err();
        assert!(err.to_string().contains("(0, 1)"));
        assert!(parse_config_str("[experiment]\nid = E1\n[mask]\ns = 0\n").is_err());
        assert!(parse_config_str("[experiment]\nid = E1\nseed = x\n").is_err());
        assert!(parse_config_str("[experiment]\nid = E7\n").is_err());
    }

    #[test]
    fn caps_are_checked_up_front() {
        let e = parse_config_str("[experiment]\nid = E2\n[fractal]\ndepths = 4..20\n").unwrap_err();
        assert!(matches!(e, Error::Infeasible(_)));
        let e = parse_config_str("[experiment]\nid = E3\n[fractal]\nprecision = 80\n").unwrap_err();
        assert!(matches!(e, Error::Infeasible(_)));
        let e = parse_config_str("[experiment]\nid = E2\n[sequence]\nlength = 3\n").unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("k", "4..8").unwrap(), vec![4, 5, 6, 7, 8]);
        assert_eq!(parse_range("k", "16..28:4").unwrap(), vec![16, 20, 24, 28]);
        assert_eq!(parse_range("k", "3,9").unwrap(), vec![3, 9]);
        assert!(parse_range("k", "8..4").is_err());
        assert!(parse_range("k", "5").is_err());
    }
}
