//! Discrete complexity profiles and the yellow/teal interval calculus.
//!
//! A profile `K[0..=R]` is an integer stand-in for `r -> K_r(x)`. Valid
//! profiles start at zero, never decrease, and grow by at most the ambient
//! dimension per bit of precision. Symmetry of information is exact in this
//! model: the growth on `[a, b]` is simply `K[b] - K[a]`.

use std::fmt;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rational::{int, le_c_log2, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityProfile {
    values: Vec<i64>,
    ambient_dim: u8,
}

/// One broken profile invariant, with the precision at which it fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    NonZeroStart { value: i64 },
    Decrease { r: u64 },
    GrowthCap { r: u64, growth: i64 },
}

impl ComplexityProfile {
    /// Wraps raw values. Only the shape is checked here; use
    /// [`ComplexityProfile::validate`] for the growth invariants.
    pub fn new(values: Vec<i64>, ambient_dim: u8) -> Result<Self> {
        if !(1..=2).contains(&ambient_dim) {
            return domain(format!("ambient dimension must be 1 or 2, got {ambient_dim}"));
        }
        if values.is_empty() {
            return domain("a profile needs at least K[0]");
        }
        Ok(ComplexityProfile {
            values,
            ambient_dim,
        })
    }

    /// `K[r] = ceil(slope * r)`; `slope` must lie in `[0, ambient_dim]`.
    pub fn linear(horizon: u64, slope: Rat, ambient_dim: u8) -> Result<Self> {
        if slope.is_negative() || slope > int(ambient_dim) {
            return domain("slope outside [0, ambient_dim]");
        }
        let values = (0..=horizon)
            .map(|r| (slope * int(r)).ceil().to_integer() as i64)
            .collect();
        Self::new(values, ambient_dim)
    }

    /// The maximal-complexity direction profile `K[s] = s`.
    pub fn ideal_direction(horizon: u64) -> Self {
        ComplexityProfile {
            values: (0..=horizon as i64).collect(),
            ambient_dim: 1,
        }
    }

    /// Builds a profile from per-bit increments.
    pub fn from_increments(steps: &[i64], ambient_dim: u8) -> Result<Self> {
        let mut values = Vec::with_capacity(steps.len() + 1);
        values.push(0);
        let mut acc = 0;
        for &d in steps {
            acc += d;
            values.push(acc);
        }
        Self::new(values, ambient_dim)
    }

    pub fn horizon(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    pub fn ambient_dim(&self) -> u8 {
        self.ambient_dim
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn at(&self, r: u64) -> i64 {
        self.values[r as usize]
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_profile(self)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        match self.validate().first() {
            None => Ok(()),
            Some(v) => Err(Error::Validation(format!("invalid profile: {v}"))),
        }
    }

    /// Text form: a header line `R ambient_dim` followed by the `R + 1` values.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| -> Result<i64> {
            tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("profile file: missing {what}")))?
                .parse::<i64>()
                .map_err(|e| Error::Parse(format!("profile file: bad {what}: {e}")))
        };
        let horizon = next("horizon")?;
        let dim = next("ambient dimension")?;
        if horizon < 0 || !(1..=2).contains(&dim) {
            return Err(Error::Parse("profile file: bad header".into()));
        }
        let values = (0..=horizon)
            .map(|r| next(&format!("K[{r}]")))
            .collect::<Result<Vec<_>>>()?;
        if tokens.next().is_some() {
            return Err(Error::Parse("profile file: trailing values".into()));
        }
        Self::new(values, dim as u8)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.horizon(), self.ambient_dim);
        let body: Vec<String> = self.values.iter().map(i64::to_string).collect();
        out.push_str(&body.join(" "));
        out.push('\n');
        out
    }

    fn check_interval(&self, a: u64, b: u64) -> Result<()> {
        if a > b {
            return domain(format!("interval [{a}, {b}] has a > b"));
        }
        if b > self.horizon() {
            return domain(format!("interval end {b} beyond horizon {}", self.horizon()));
        }
        Ok(())
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonZeroStart { value } => write!(f, "K[0] = {value}, expected 0"),
            Violation::Decrease { r } => write!(f, "K decreases at r = {r}"),
            Violation::GrowthCap { r, growth } => {
                write!(f, "growth {growth} at r = {r} exceeds the ambient dimension")
            }
        }
    }
}

pub fn validate_profile(p: &ComplexityProfile) -> Vec<Violation> {
    let mut out = Vec::new();
    if p.values[0] != 0 {
        out.push(Violation::NonZeroStart { value: p.values[0] });
    }
    for (i, w) in p.values.windows(2).enumerate() {
        let r = i as u64 + 1;
        let d = w[1] - w[0];
        if d < 0 {
            out.push(Violation::Decrease { r });
        } else if d > i64::from(p.ambient_dim) {
            out.push(Violation::GrowthCap { r, growth: d });
        }
    }
    out
}

/// `K[b] - K[a]`, the model's self-conditional growth on `[a, b]`.
pub fn growth(p: &ComplexityProfile, a: u64, b: u64) -> Result<i64> {
    p.check_interval(a, b)?;
    Ok(p.at(b) - p.at(a))
}

/// Caps the profile at `cap`: `K'[t] = min(cap, K[t])`.
pub fn reduce_oracle(p: &ComplexityProfile, cap: i64) -> Result<ComplexityProfile> {
    p.ensure_valid()?;
    if cap < 0 {
        return domain("cap must be non-negative");
    }
    let values = p.values.iter().map(|&k| k.min(cap)).collect();
    ComplexityProfile::new(values, p.ambient_dim)
}

/// How much an interval may miss the exact slope condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SlackMode {
    /// No slack.
    Exact,
    /// `c * log2 b`, with `b` the right endpoint of the interval.
    Log { c: u32 },
    /// `eps * b`.
    Eps {
        #[serde(with = "crate::rational::as_string")]
        eps: Rat,
    },
}

impl SlackMode {
    /// Decides `x <= slack(b)` exactly.
    pub fn admits(&self, x: &Rat, b: u64) -> bool {
        match self {
            SlackMode::Exact => !x.is_positive(),
            SlackMode::Log { c } => le_c_log2(x, *c, b),
            SlackMode::Eps { eps } => *x <= eps * int(b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalKind {
    Yellow,
    Teal,
    Both,
    Neither,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalLabel {
    pub kind: IntervalKind,
    pub sigma: Rat,
    pub slack: SlackMode,
}

pub(crate) fn check_sigma(sigma: &Rat) -> Result<()> {
    if !sigma.is_positive() || *sigma > int(1) {
        return domain(format!("sigma must lie in (0, 1], got {sigma}"));
    }
    Ok(())
}

/// `K[b] - K[s] <= sigma (b - s) + slack` for every `s` in `[a, b]`.
pub fn is_teal(p: &ComplexityProfile, a: u64, b: u64, sigma: Rat, slack: SlackMode) -> Result<bool> {
    p.check_interval(a, b)?;
    let kb = p.at(b);
    Ok((a..=b).all(|s| {
        let excess = int(kb - p.at(s)) - sigma * int(b - s);
        slack.admits(&excess, b)
    }))
}

/// `K[s] - K[a] >= sigma (s - a) - slack` for every `s` in `[a, b]`.
pub fn is_yellow(p: &ComplexityProfile, a: u64, b: u64, sigma: Rat, slack: SlackMode) -> Result<bool> {
    p.check_interval(a, b)?;
    let ka = p.at(a);
    Ok((a..=b).all(|s| {
        let deficit = sigma * int(s - a) - int(p.at(s) - ka);
        slack.admits(&deficit, b)
    }))
}

pub fn classify_interval(
    p: &ComplexityProfile,
    a: u64,
    b: u64,
    sigma: Rat,
    slack: SlackMode,
) -> Result<IntervalLabel> {
    check_sigma(&sigma)?;
    let teal = is_teal(p, a, b, sigma, slack)?;
    let yellow = is_yellow(p, a, b, sigma, slack)?;
    let kind = match (yellow, teal) {
        (true, true) => IntervalKind::Both,
        (true, false) => IntervalKind::Yellow,
        (false, true) => IntervalKind::Teal,
        (false, false) => IntervalKind::Neither,
    };
    Ok(IntervalLabel { kind, sigma, slack })
}

/// Colour assigned by the partition; every piece is exactly one of these.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Teal,
    Yellow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledInterval {
    pub a: u64,
    pub b: u64,
    pub color: Color,
}

impl LabeledInterval {
    pub fn len(&self) -> u64 {
        self.b - self.a
    }

    pub fn is_empty(&self) -> bool {
        self.a == self.b
    }
}

/// Result of [`split_teal_yellow`]: `[a, m]` is teal and `[m, b]` is yellow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Split {
    pub m: u64,
    pub teal: LabeledInterval,
    pub yellow: LabeledInterval,
}

/// Splits `[a, b]` at the rightmost minimiser of `K[s] - sigma s`.
///
/// At a minimiser `m`, `K[m] - K[s] <= sigma (m - s)` for `s <= m` and
/// `K[s] - K[m] >= sigma (s - m)` for `s >= m`, which are exactly the teal and
/// yellow conditions with zero slack.
pub fn split_teal_yellow(p: &ComplexityProfile, a: u64, b: u64, sigma: Rat) -> Result<Split> {
    check_sigma(&sigma)?;
    p.check_interval(a, b)?;
    // compare K[s] - (num/den) s through den*K[s] - num*s to stay in integers
    let (num, den) = (*sigma.numer(), *sigma.denom());
    let key = |s: u64| i128::from(p.at(s)) * den - num * i128::from(s);
    let mut m = a;
    let mut best = key(a);
    for s in a + 1..=b {
        let v = key(s);
        if v <= best {
            best = v;
            m = s;
        }
    }
    Ok(Split {
        m,
        teal: LabeledInterval { a, b: m, color: Color::Teal },
        yellow: LabeledInterval { a: m, b, color: Color::Yellow },
    })
}

/// Chops `[a, b]` into blocks of at most `max_len` and splits each block into
/// a teal piece followed by a yellow piece. Zero-length pieces are dropped,
/// except that an empty `[a, a]` comes back as one degenerate teal interval.
/// The result has at most `2 * ceil((b - a) / max_len)` intervals.
pub fn partition(
    p: &ComplexityProfile,
    a: u64,
    b: u64,
    sigma: Rat,
    max_len: u64,
) -> Result<Vec<LabeledInterval>> {
    check_sigma(&sigma)?;
    p.check_interval(a, b)?;
    if max_len == 0 {
        return domain("max_len must be positive");
    }
    if a == b {
        return Ok(vec![LabeledInterval { a, b, color: Color::Teal }]);
    }
    let mut out = Vec::new();
    let mut lo = a;
    while lo < b {
        let hi = (lo + max_len).min(b);
        let split = split_teal_yellow(p, lo, hi, sigma)?;
        for piece in [split.teal, split.yellow] {
            if !piece.is_empty() {
                out.push(piece);
            }
        }
        lo = hi;
    }
    Ok(out)
}

/// Finite-horizon stand-ins for the lower and upper effective dimensions:
/// min and max of `K[r] / r` over the tail window `[R - window, R]` (`r >= 1`).
pub fn effective_dims(p: &ComplexityProfile, window: u64) -> Result<(Rat, Rat)> {
    let horizon = p.horizon();
    if horizon < window {
        return domain(format!("horizon {horizon} shorter than window {window}"));
    }
    if horizon == 0 {
        return domain("effective dimension needs a positive horizon");
    }
    let start = (horizon - window).max(1);
    let rates = (start..=horizon).map(|r| Rat::new(i128::from(p.at(r)), i128::from(r)));
    let (lo, hi) = rates.fold((None::<Rat>, None::<Rat>), |(lo, hi), q| {
        (
            Some(lo.map_or(q, |l| l.min(q))),
            Some(hi.map_or(q, |h| h.max(q))),
        )
    });
    Ok((lo.expect("non-empty window"), hi.expect("non-empty window")))
}
