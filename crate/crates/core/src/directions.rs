//! Scale sequences, digit masks and sampled directions.
//!
//! Angles are written as `theta = pi * 0.b1 b2 b3 ...`, so bit `i` of the
//! sample is exactly dyadic precision `i`. A mask zeroes fixed bit ranges
//! `(lo, hi]` (and, for the density variant, a Beatty pattern of bits), and
//! the ideal profile of a masked maximal-complexity angle counts the bits that
//! remain free.

use std::fmt;
use std::path::PathBuf;

use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::profile::ComplexityProfile;
use crate::rational::{format_rat, int, parse_rat, Rat};

/// Largest value the doubly exponential rule may produce.
pub const DEFAULT_SEQ_CAP: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum SeqRule {
    /// `r_1 = 2`, `r_{n+1} = 2^(2^r_n)`.
    Paper,
    /// `r_1 = 2`, `r_{n+1} = k r_n`.
    Geometric { k: u64 },
    /// `r_1 = 2`, `r_{n+1} = r_n^2`.
    Square,
    /// Caller-supplied values.
    List { values: Vec<u64> },
}

impl SeqRule {
    /// Parses `paper`, `geo:<k>`, `square` or `list:<v1,v2,...>`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::Parse(format!("unknown scale sequence rule {text:?}"));
        match text {
            "paper" => Ok(SeqRule::Paper),
            "square" => Ok(SeqRule::Square),
            _ => {
                if let Some(k) = text.strip_prefix("geo:") {
                    let k = k.trim().parse().map_err(|_| bad())?;
                    Ok(SeqRule::Geometric { k })
                } else if let Some(list) = text.strip_prefix("list:") {
                    let values = list
                        .split(',')
                        .map(|v| v.trim().parse::<u64>().map_err(|_| bad()))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(SeqRule::List { values })
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl fmt::Display for SeqRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqRule::Paper => write!(f, "paper"),
            SeqRule::Geometric { k } => write!(f, "geo:{k}"),
            SeqRule::Square => write!(f, "square"),
            SeqRule::List { values } => {
                let v: Vec<String> = values.iter().map(u64::to_string).collect();
                write!(f, "list:{}", v.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleSequence {
    values: Vec<u64>,
    rule: SeqRule,
}

impl ScaleSequence {
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn rule(&self) -> &SeqRule {
        &self.rule
    }

    /// 1-based index `n` and value of the largest `r_n <= r`.
    pub fn largest_at_most(&self, r: u64) -> Option<(usize, u64)> {
        self.values
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &v)| v <= r)
            .map(|(i, &v)| (i + 1, v))
    }

    /// Builds the first `m` values of `rule`.
    pub fn build(rule: &SeqRule, m: usize) -> Result<Self> {
        match rule {
            SeqRule::Paper => scale_seq_paper(m, DEFAULT_SEQ_CAP),
            _ => scale_seq_surrogate(rule, m),
        }
    }

    fn check(values: Vec<u64>, rule: SeqRule) -> Result<Self> {
        if values.first().is_some_and(|&v| v < 2) {
            return Err(Error::Validation("scale sequence must start at r_1 >= 2".into()));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Validation(format!(
                "scale sequence not strictly increasing at index {}",
                i + 2
            )));
        }
        Ok(ScaleSequence { values, rule })
    }
}

pub fn scale_seq_paper(m: usize, cap: u64) -> Result<ScaleSequence> {
    if m == 0 {
        return domain("a scale sequence needs at least one value");
    }
    let mut values = vec![2u64];
    while values.len() < m {
        let prev = *values.last().expect("non-empty");
        let index = values.len() + 1;
        // 2^(2^prev) as a bit length; anything past 64 bits is beyond every cap
        let next = (prev < 6)
            .then(|| 1u64 << prev)
            .and_then(|exp| 1u64.checked_shl(exp as u32).filter(|_| exp < 64));
        match next {
            Some(v) if v <= cap => values.push(v),
            _ => {
                return Err(Error::Overflow {
                    index,
                    detail: format!("r_{index} = 2^(2^{prev}) exceeds the cap {cap}"),
                })
            }
        }
    }
    ScaleSequence::check(values, SeqRule::Paper)
}

pub fn scale_seq_surrogate(rule: &SeqRule, m: usize) -> Result<ScaleSequence> {
    if m == 0 {
        return domain("a scale sequence needs at least one value");
    }
    let overflow = |index| Error::Overflow {
        index,
        detail: "surrogate value exceeds u64".into(),
    };
    let values = match rule {
        SeqRule::Paper => return scale_seq_paper(m, DEFAULT_SEQ_CAP),
        SeqRule::Geometric { k } => {
            if *k < 2 {
                return Err(Error::Validation("geometric ratio must be at least 2".into()));
            }
            let mut v = vec![2u64];
            while v.len() < m {
                let next = v.last().unwrap().checked_mul(*k).ok_or(overflow(v.len() + 1))?;
                v.push(next);
            }
            v
        }
        SeqRule::Square => {
            let mut v = vec![2u64];
            while v.len() < m {
                let last = *v.last().unwrap();
                v.push(last.checked_mul(last).ok_or(overflow(v.len() + 1))?);
            }
            v
        }
        SeqRule::List { values } => {
            if values.len() < m {
                return domain(format!("list has {} values, {m} requested", values.len()));
            }
            values[..m].to_vec()
        }
    };
    ScaleSequence::check(values, rule.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MaskKind {
    /// Zero `(r_n, n r_n]`.
    D0,
    /// Zero `(r_n, floor(r_n / s)]`.
    Ds {
        #[serde(with = "crate::rational::as_string")]
        s: Rat,
    },
    /// A density-`s` angle (free bits on a Beatty pattern) with the
    /// `(r_n, floor(r_n / eps)]` mask applied on top.
    DepsS {
        #[serde(with = "crate::rational::as_string")]
        eps: Rat,
        #[serde(with = "crate::rational::as_string")]
        s: Rat,
    },
}

impl MaskKind {
    pub fn parse(kind: &str, s: Option<Rat>, eps: Option<Rat>) -> Result<Self> {
        let need = |v: Option<Rat>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("mask kind {kind} needs {name}")))
        };
        let k = match kind {
            "d0" => MaskKind::D0,
            "ds" => MaskKind::Ds { s: need(s, "s")? },
            "deps-s" => MaskKind::DepsS {
                eps: need(eps, "eps")?,
                s: need(s, "s")?,
            },
            other => return Err(Error::Config(format!("unknown mask kind {other:?}"))),
        };
        k.check()?;
        Ok(k)
    }

    fn check(&self) -> Result<()> {
        let open_unit = |x: &Rat, name: &str| {
            if !x.is_positive() || *x >= int(1) {
                Err(Error::Validation(format!("{name} must lie in (0, 1), got {}", format_rat(x))))
            } else {
                Ok(())
            }
        };
        match self {
            MaskKind::D0 => Ok(()),
            MaskKind::Ds { s } => open_unit(s, "s"),
            MaskKind::DepsS { eps, s } => {
                open_unit(eps, "eps")?;
                open_unit(s, "s")
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MaskKind::D0 => "d0",
            MaskKind::Ds { .. } => "ds",
            MaskKind::DepsS { .. } => "deps-s",
        }
    }

    /// Upper end of the `n`-th (1-based) mask interval before clipping.
    fn interval_end(&self, n: usize, r_n: u64) -> u64 {
        let over = |x: &Rat| (int(r_n) / x).floor().to_integer().to_u64().unwrap_or(u64::MAX);
        match self {
            MaskKind::D0 => r_n.saturating_mul(n as u64),
            MaskKind::Ds { s } => over(s),
            MaskKind::DepsS { eps, .. } => over(eps),
        }
    }

    fn density(&self) -> Option<Rat> {
        match self {
            MaskKind::DepsS { s, .. } => Some(*s),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub kind: MaskKind,
    pub seq: Vec<u64>,
    pub horizon: u64,
    /// Half-open bit ranges `(lo, hi]` that are zeroed, clipped to `(0, R]`.
    pub intervals: Vec<(u64, u64)>,
}

/// Position `i >= 1` is free under density `s` iff `floor(i s) > floor((i-1) s)`.
fn beatty_free(i: u64, s: &Rat) -> bool {
    (s * int(i)).floor() > (s * int(i - 1)).floor()
}

impl MaskSpec {
    /// The identity mask at horizon `R`.
    pub fn empty(horizon: u64) -> Self {
        MaskSpec {
            kind: MaskKind::D0,
            seq: Vec::new(),
            horizon,
            intervals: Vec::new(),
        }
    }

    pub fn is_masked(&self, i: u64) -> bool {
        if self.intervals.iter().any(|&(lo, hi)| lo < i && i <= hi) {
            return true;
        }
        match self.kind.density() {
            Some(s) => !beatty_free(i, &s),
            None => false,
        }
    }

    /// Number of masked positions in `1..=r`.
    pub fn masked_mass(&self, r: u64) -> u64 {
        (1..=r.min(self.horizon)).filter(|&i| self.is_masked(i)).count() as u64
    }
}

pub fn mask_intervals(kind: MaskKind, seq: &ScaleSequence, horizon: u64) -> Result<MaskSpec> {
    kind.check()?;
    let values = seq.values();
    if values.is_empty() || horizon < values[0] {
        return domain(format!("horizon {horizon} is below r_1"));
    }
    let raw: Vec<(u64, u64)> = values
        .iter()
        .enumerate()
        .filter(|(_, &r)| r < horizon)
        .map(|(i, &r)| (r, kind.interval_end(i + 1, r)))
        .collect();
    // overlap is judged on the unclipped ranges: a sequence too slow for the
    // kind is rejected even when the horizon happens to cut the overlap off
    for (i, w) in raw.windows(2).enumerate() {
        if w[0].1 > w[1].0 {
            return Err(Error::Validation(format!(
                "mask intervals {} and {} overlap: ({}, {}] and ({}, {}]",
                i + 1,
                i + 2,
                w[0].0,
                w[0].1,
                w[1].0,
                w[1].1
            )));
        }
    }
    let intervals = raw
        .into_iter()
        .map(|(lo, hi)| (lo, hi.min(horizon)))
        .filter(|(lo, hi)| lo < hi)
        .collect();
    Ok(MaskSpec {
        kind,
        seq: values.to_vec(),
        horizon,
        intervals,
    })
}

/// Zeroes every masked position; `bits[i - 1]` holds bit `i`.
pub fn mask_bits(bits: &[bool], spec: &MaskSpec) -> Result<Vec<bool>> {
    if bits.len() as u64 != spec.horizon {
        return domain(format!(
            "bit string has length {}, mask horizon is {}",
            bits.len(),
            spec.horizon
        ));
    }
    Ok(bits
        .iter()
        .enumerate()
        .map(|(i, &b)| b && !spec.is_masked(i as u64 + 1))
        .collect())
}

/// `K[r]` = number of unmasked positions `<= r`.
pub fn predict_profile(spec: &MaskSpec) -> ComplexityProfile {
    let mut values = Vec::with_capacity(spec.horizon as usize + 1);
    let mut k = 0i64;
    values.push(0);
    for i in 1..=spec.horizon {
        if !spec.is_masked(i) {
            k += 1;
        }
        values.push(k);
    }
    ComplexityProfile::new(values, 1).expect("non-empty, ambient dimension 1")
}

/// Membership inequalities for a masked direction, with log slack `c`.
///
/// (1) `K[r] >= r - c log2 r_n` for `r <= r_n`;
/// (2) `K[r] >= r - m r_n - c log2 r` for `anchor_n <= r <= r_{n+1}`, where
/// `anchor_n = n r_n`, `m = n - 1` for D0 and `anchor_n = floor(r_n / s)`,
/// `m = floor((1 - s) / s)` for Ds. Returns the first `(condition, n, r)` that
/// fails, or `None`.
pub fn membership_failure(
    profile: &ComplexityProfile,
    spec: &MaskSpec,
    c: Rat,
) -> Option<(u8, usize, u64)> {
    let horizon = profile.horizon().min(spec.horizon);
    let lg = |x: u64| crate::rational::log2_up(x.max(1));
    for (idx, &r_n) in spec.seq.iter().enumerate() {
        let n = idx + 1;
        for r in 1..=r_n.min(horizon) {
            if int(profile.at(r)) < int(r) - c * lg(r_n) {
                return Some((1, n, r));
            }
        }
        let (anchor, multiple) = match spec.kind {
            MaskKind::D0 => (r_n * n as u64, (n - 1) as u64),
            MaskKind::Ds { s } => (
                (int(r_n) / s).floor().to_integer() as u64,
                ((int(1) - s) / s).floor().to_integer() as u64,
            ),
            MaskKind::DepsS { .. } => continue,
        };
        let upper = spec.seq.get(idx + 1).copied().unwrap_or(u64::MAX).min(horizon);
        for r in anchor..=upper {
            if int(profile.at(r)) < int(r) - int(multiple * r_n) - c * lg(r) {
                return Some((2, n, r));
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringExponent {
    pub n: usize,
    /// Anchor scale in bits.
    pub k: u64,
    /// `log2` of the covering bound `2^{r_n}`.
    pub bound_log2: u64,
    /// `bound_log2 / k`.
    pub exponent: Rat,
    /// `log2` of the exact number of distinct masked prefixes of length `k`.
    pub exact_log2: u64,
    pub exact_exponent: Rat,
}

/// Covering counts at the anchor scales (`n r_n` for D0, `floor(r_n / s)` for
/// the others), clipped to the horizon. The empty mask reports every
/// power-of-two scale with exponent 1.
pub fn covering_exponents(spec: &MaskSpec) -> Vec<CoveringExponent> {
    let free = predict_profile(spec);
    let entry = |n: usize, k: u64, bound: u64| {
        let exact = free.at(k) as u64;
        CoveringExponent {
            n,
            k,
            bound_log2: bound,
            exponent: Rat::new(i128::from(bound), i128::from(k)),
            exact_log2: exact,
            exact_exponent: Rat::new(i128::from(exact), i128::from(k)),
        }
    };
    if spec.seq.is_empty() {
        return std::iter::successors(Some(1u64), |k| k.checked_mul(2))
            .take_while(|&k| k <= spec.horizon)
            .enumerate()
            .map(|(i, k)| entry(i + 1, k, k))
            .collect();
    }
    spec.seq
        .iter()
        .enumerate()
        .filter_map(|(i, &r_n)| {
            let k = spec.kind.interval_end(i + 1, r_n);
            (k > 0 && k <= spec.horizon).then(|| {
                // 2^{r_n} intervals of length 2^{-k}: the prefix past r_n is
                // pinned by the mask
                entry(i + 1, k, r_n.min(k))
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSample {
    pub index: u64,
    pub bits: Vec<bool>,
    /// `theta / pi` as `numerator / 2^R`.
    pub angle_num: BigUint,
    pub unit_vector: (f64, f64),
    pub spec: MaskSpec,
    pub predicted: ComplexityProfile,
}

impl DirectionSample {
    pub fn depth(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn angle_fraction(&self) -> f64 {
        dyadic_to_f64(&self.angle_num, self.depth())
    }
}

fn dyadic_to_f64(num: &BigUint, bits: u64) -> f64 {
    let len = num.bits();
    if len == 0 {
        return 0.0;
    }
    // keep the top 64 bits; the remainder is below double precision
    let drop = len.saturating_sub(64);
    let top = (num >> drop).to_u64().expect("64 bits fit") as f64;
    top * 2f64.powi(drop as i32 - bits as i32)
}

fn bits_to_biguint(bits: &[bool]) -> BigUint {
    let mut n = BigUint::zero();
    for &b in bits {
        n <<= 1u32;
        if b {
            n += 1u32;
        }
    }
    n
}

pub fn bits_to_direction(bits: &[bool], spec: &MaskSpec) -> Result<DirectionSample> {
    if bits.len() as u64 != spec.horizon {
        return domain("bit string length differs from the mask horizon");
    }
    if !bits.iter().any(|&b| b) {
        return domain("all-zero bits give theta = 0, outside (0, pi)");
    }
    let angle_num = bits_to_biguint(bits);
    let theta = std::f64::consts::PI * dyadic_to_f64(&angle_num, bits.len() as u64);
    Ok(DirectionSample {
        index: 0,
        bits: bits.to_vec(),
        angle_num,
        unit_vector: (theta.cos(), theta.sin()),
        spec: spec.clone(),
        predicted: predict_profile(spec),
    })
}

/// Where raw angle bits come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BitSource {
    /// ChaCha8 seeded with `seed`; sample `i` reads stream `i`.
    Seeded(u64),
    /// Operating system entropy; not reproducible.
    Os,
    /// Bits read MSB-first from a file, `R` consecutive bits per sample.
    File(PathBuf),
}

pub fn sample_bits(source: &BitSource, index: u64, depth: u64) -> Result<Vec<bool>> {
    let n = depth as usize;
    match source {
        BitSource::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            rng.set_stream(index);
            Ok((0..n).map(|_| rng.random::<bool>()).collect())
        }
        BitSource::Os => {
            let mut bytes = vec![0u8; n.div_ceil(8)];
            rand::rng().fill_bytes(&mut bytes);
            Ok(unpack_bits(&bytes, 0, n))
        }
        BitSource::File(path) => {
            let bytes = std::fs::read(path)?;
            let start = index as usize * n;
            if (start + n).div_ceil(8) > bytes.len() {
                return Err(Error::Infeasible(format!(
                    "bit file {} holds too few bits for sample {index}",
                    path.display()
                )));
            }
            Ok(unpack_bits(&bytes, start, n))
        }
    }
}

fn unpack_bits(bytes: &[u8], start: usize, n: usize) -> Vec<bool> {
    (start..start + n)
        .map(|i| bytes[i / 8] >> (7 - i % 8) & 1 == 1)
        .collect()
}

/// Draws `count` masked directions. Samples whose masked bits are all zero are
/// redrawn from the next stream index, so indices may skip.
pub fn sample_directions(
    spec: &MaskSpec,
    source: &BitSource,
    count: usize,
) -> Result<Vec<DirectionSample>> {
    let mut out = Vec::with_capacity(count);
    let mut index = 0u64;
    let limit = count as u64 * 64 + 64;
    while out.len() < count {
        if index >= limit {
            return Err(Error::Infeasible("bit source keeps producing theta = 0".into()));
        }
        let bits = mask_bits(&sample_bits(source, index, spec.horizon)?, spec)?;
        if bits.iter().any(|&b| b) {
            let mut d = bits_to_direction(&bits, spec)?;
            d.index = index;
            out.push(d);
        }
        index += 1;
    }
    Ok(out)
}

/// One line of the direction file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionRecord {
    pub index: u64,
    pub seed: Option<u64>,
    pub depth: u64,
    /// Bits `b1 b2 ...` packed MSB-first into hex, zero padded to a nibble.
    pub bits: String,
    /// `theta / pi` as an exact dyadic fraction.
    pub angle: String,
    pub unit_vector: [String; 2],
    pub mask: MaskSpec,
}

impl DirectionRecord {
    pub fn from_sample(d: &DirectionSample, seed: Option<u64>) -> Self {
        let mut padded = d.bits.clone();
        padded.resize(d.bits.len().div_ceil(4) * 4, false);
        let bits: String = padded
            .chunks(4)
            .map(|c| {
                let v = c.iter().fold(0u32, |acc, &b| acc << 1 | u32::from(b));
                char::from_digit(v, 16).expect("nibble")
            })
            .collect();
        DirectionRecord {
            index: d.index,
            seed,
            depth: d.depth(),
            bits,
            angle: format!("{}/{}", d.angle_num, BigUint::from(1u32) << d.depth()),
            unit_vector: [
                format!("{:.16e}", d.unit_vector.0),
                format!("{:.16e}", d.unit_vector.1),
            ],
            mask: d.spec.clone(),
        }
    }

    pub fn to_sample(&self) -> Result<DirectionSample> {
        let bad = || Error::Parse(format!("direction record {}: bad bits", self.index));
        let mut bits = Vec::with_capacity(self.bits.len() * 4);
        for ch in self.bits.chars() {
            let v = ch.to_digit(16).ok_or_else(bad)?;
            bits.extend((0..4).rev().map(|j| v >> j & 1 == 1));
        }
        if (bits.len() as u64) < self.depth {
            return Err(bad());
        }
        bits.truncate(self.depth as usize);
        let mut d = bits_to_direction(&bits, &self.mask)?;
        d.index = self.index;
        Ok(d)
    }

    pub fn unit_vector(&self) -> Result<(f64, f64)> {
        let p = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad unit vector component {s:?}")))
        };
        Ok((p(&self.unit_vector[0])?, p(&self.unit_vector[1])?))
    }
}

/// Reads record `index` (by position in the file, 0-based) from a JSON lines file.
pub fn read_direction_record(path: &std::path::Path, line: usize) -> Result<DirectionRecord> {
    let text = std::fs::read_to_string(path)?;
    let raw = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .nth(line)
        .ok_or_else(|| Error::Parse(format!("{} has no record {line}", path.display())))?;
    Ok(serde_json::from_str(raw)?)
}

/// Parses a rational option such as `--s 1/2`.
pub fn parse_opt_rat(text: Option<&str>) -> Result<Option<Rat>> {
    text.map(parse_rat).transpose()
}
