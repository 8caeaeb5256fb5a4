//! Certified bound calculators over complexity profiles.
//!
//! Every hidden constant is a field of [`EngineConfig`]. A certificate keeps
//! the integer ledger and the symbolic error separate; the error is evaluated
//! (rounded up) only once, at the horizon, which dominates every interval end.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::directions::ScaleSequence;
use crate::error::{domain, precondition, Error, Result};
use crate::error_terms::{Coeff, ErrorTerm};
use crate::profile::{
    check_sigma, growth, is_teal, is_yellow, partition, Color, ComplexityProfile, SlackMode,
};
use crate::rational::{ceil_int, ceil_log2, format_rat, int, le_c_log2, le_c_sqrt, log2_up, parse_rat, rat, sqrt_up, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Constant of the `O(log r)` term in the conditional projection bound.
    pub log_const: Rat,
    /// Constant of the per-interval slack (`(log b)^2` or `sqrt b`).
    pub lemma_const: Rat,
    /// Constant of the `O(log r)` paid per telescoping step.
    pub soi_const: Rat,
    /// `c` in the `(sigma, c)` slack of intervals and direction hypotheses.
    pub slack_c: u32,
    /// Smallest precision at which the per-interval bounds are applied.
    pub b_min: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            log_const: int(1),
            lemma_const: int(1),
            soi_const: int(1),
            slack_c: 1,
            b_min: 16,
        }
    }
}

impl EngineConfig {
    /// Defaults with `b_min = 1`, for small-horizon corpora.
    pub fn small_horizon() -> Self {
        EngineConfig {
            b_min: 1,
            ..Self::default()
        }
    }
}

/// Which per-interval lemma family is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Exact labels and hypotheses, `(log b)^2` slack.
    Exact,
    /// `(sigma, c)` labels, `c log b` hypothesis, `(log b)^2` slack.
    Log2,
    /// `(sigma, c)` labels, `c sqrt b` hypothesis, `sqrt b` slack.
    Sqrt,
    /// `(sigma, eps)`-almost labels, `c log b` hypothesis, `4 eps b` slack.
    Eps(Rat),
}

impl Variant {
    fn slack_mode(&self, cfg: &EngineConfig) -> SlackMode {
        match self {
            Variant::Exact => SlackMode::Exact,
            Variant::Log2 | Variant::Sqrt => SlackMode::Log { c: cfg.slack_c },
            Variant::Eps(eps) => SlackMode::Eps { eps: *eps },
        }
    }

    fn interval_err(&self, cfg: &EngineConfig) -> ErrorTerm {
        let term = match self {
            Variant::Exact | Variant::Log2 => ErrorTerm::single(Coeff::Log2, cfg.lemma_const),
            Variant::Sqrt => ErrorTerm::single(Coeff::Sqrt, cfg.lemma_const),
            Variant::Eps(_) => ErrorTerm::single(Coeff::EpsB, int(4)),
        };
        term.expect("configured constants are non-negative")
    }

    fn eps(&self) -> Rat {
        match self {
            Variant::Eps(e) => *e,
            _ => Rat::zero(),
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            Variant::Exact => "exact",
            Variant::Log2 => "log2",
            Variant::Sqrt => "sqrt",
            Variant::Eps(_) => "eps",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Eps(e) => write!(f, "eps:{}", format_rat(e)),
            other => f.write_str(other.tag()),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Variant::Exact),
            "log2" => Ok(Variant::Log2),
            "sqrt" => Ok(Variant::Sqrt),
            _ => match s.strip_prefix("eps:") {
                Some(e) => {
                    let eps = parse_rat(e)?;
                    if eps.is_negative() {
                        return domain("eps must be non-negative");
                    }
                    Ok(Variant::Eps(eps))
                }
                None => Err(Error::Parse(format!("unknown variant {s:?}"))),
            },
        }
    }
}

impl Serialize for Variant {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn check_ranges(eps: &Rat, r: u64) -> Result<()> {
    if eps.is_negative() {
        return domain("eps must be non-negative");
    }
    if r < 2 {
        return domain(format!("precision must be at least 2, got {r}"));
    }
    Ok(())
}

/// `max(0, min(dim_x, s) r - 10 sqrt(eps) r - log_const log2 r)`.
pub fn bound_thm31(dim_x: Rat, s: Rat, eps: Rat, r: u64, cfg: &EngineConfig) -> Result<Rat> {
    if !s.is_positive() || s > int(1) {
        return domain(format!("s must lie in (0, 1], got {}", format_rat(&s)));
    }
    if dim_x.is_negative() || dim_x > int(2) {
        return domain("dim_x must lie in [0, 2]");
    }
    check_ranges(&eps, r)?;
    let rq = int(r);
    let value = dim_x.min(s) * rq - int(10) * sqrt_up(&eps) * rq - cfg.log_const * log2_up(r);
    Ok(value.max(Rat::zero()))
}

/// `max{K - r, (K - t) / 2, 0} + 10 C eps r`, an upper bound on the
/// complexity of `x` given its projection and the direction.
pub fn bound_thm32(k: i64, r: u64, t: u64, c: u64, eps: Rat) -> Result<Rat> {
    if eps.is_negative() {
        return domain("eps must be non-negative");
    }
    if c == 0 {
        return domain("C must be a positive integer");
    }
    if t > r {
        return domain(format!("t = {t} exceeds r = {r}"));
    }
    if u128::from(t) * u128::from(c) < u128::from(r) {
        return precondition(format!("t = {t} is below r / C = {r}/{c}"));
    }
    let (kq, rq, tq) = (int(k), int(r), int(t));
    let base = (kq - rq).max((kq - tq) / int(2)).max(Rat::zero());
    Ok(base + int(10) * int(c) * eps * rq)
}

/// Outcome of checking `K_e[s] >= sigma s - slack(b)` for `s <= b - a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum Hypothesis {
    Pass,
    Fail { s: u64 },
}

pub fn direction_hypothesis(
    p_e: &ComplexityProfile,
    a: u64,
    b: u64,
    sigma: Rat,
    variant: Variant,
    cfg: &EngineConfig,
) -> Result<Hypothesis> {
    check_sigma(&sigma)?;
    if a > b {
        return domain(format!("interval [{a}, {b}] has a > b"));
    }
    let span = b - a;
    if p_e.horizon() < span {
        return domain(format!(
            "direction profile horizon {} is shorter than the interval length {span}",
            p_e.horizon()
        ));
    }
    let c = cfg.slack_c;
    for s in 0..=span {
        let deficit = sigma * int(s) - int(p_e.at(s));
        let ok = match variant {
            Variant::Exact => !deficit.is_positive(),
            Variant::Log2 | Variant::Eps(_) => le_c_log2(&deficit, c, b),
            Variant::Sqrt => le_c_sqrt(&deficit, c, b),
        };
        if !ok {
            return Ok(Hypothesis::Fail { s });
        }
    }
    Ok(Hypothesis::Pass)
}

#[allow(clippy::too_many_arguments)]
fn interval_bound(
    p_x: &ComplexityProfile,
    p_e: Option<&ComplexityProfile>,
    a: u64,
    b: u64,
    sigma: Rat,
    variant: Variant,
    cfg: &EngineConfig,
    color: Color,
) -> Result<(i64, ErrorTerm)> {
    check_sigma(&sigma)?;
    if b < cfg.b_min {
        return precondition(format!("b = {b} is below b_min = {}", cfg.b_min));
    }
    let mode = variant.slack_mode(cfg);
    let labelled = match color {
        Color::Yellow => is_yellow(p_x, a, b, sigma, mode)?,
        Color::Teal => is_teal(p_x, a, b, sigma, mode)?,
    };
    if !labelled {
        return precondition(format!("[{a}, {b}] is not {color:?} under {mode:?}"));
    }
    if let Some(p_e) = p_e {
        if let Hypothesis::Fail { s } = direction_hypothesis(p_e, a, b, sigma, variant, cfg)? {
            return precondition(format!("direction hypothesis fails at s = {s} on [{a}, {b}]"));
        }
    }
    let value = match color {
        Color::Yellow => yellow_value(p_x, a, b, sigma)?,
        Color::Teal => 0,
    };
    Ok((value, variant.interval_err(cfg)))
}

fn yellow_value(p_x: &ComplexityProfile, a: u64, b: u64, sigma: Rat) -> Result<i64> {
    let g = growth(p_x, a, b)?;
    Ok(ceil_int(&(int(g) - sigma * int(b - a))) as i64)
}

/// `ceil(growth - sigma (b - a))` with the variant's slack, for a yellow
/// interval. With `p_e` given, the direction hypothesis is checked too.
pub fn yellow_interval_bound(
    p_x: &ComplexityProfile,
    p_e: Option<&ComplexityProfile>,
    a: u64,
    b: u64,
    sigma: Rat,
    variant: Variant,
    cfg: &EngineConfig,
) -> Result<(i64, ErrorTerm)> {
    interval_bound(p_x, p_e, a, b, sigma, variant, cfg, Color::Yellow)
}

/// Zero plus the variant's slack, for a teal interval.
pub fn teal_interval_bound(
    p_x: &ComplexityProfile,
    p_e: Option<&ComplexityProfile>,
    a: u64,
    b: u64,
    sigma: Rat,
    variant: Variant,
    cfg: &EngineConfig,
) -> Result<(i64, ErrorTerm)> {
    interval_bound(p_x, p_e, a, b, sigma, variant, cfg, Color::Teal)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub a: u64,
    pub b: u64,
    pub label: Color,
    pub lemma: String,
    pub growth: i64,
    pub value: i64,
    pub err: ErrorTerm,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum Status {
    Applicable,
    /// The direction hypothesis failed on `[a, b]` at offset `s`.
    Inapplicable { a: u64, b: u64, s: u64 },
}

/// Ledger of a chained bound. Field order is the serialization order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub statement_id: String,
    pub horizon: u64,
    pub sigma: Rat,
    pub variant: Variant,
    /// 1 when the horizon is within the partition regime, 2 for the single split.
    pub case: u8,
    pub max_len: u64,
    /// Left end of the partitioned range, `ceil(log2 R)`.
    pub start: u64,
    pub status: Status,
    pub ledger: Vec<LedgerEntry>,
    pub total_value: i64,
    /// `K_x[R] - total_value`, before the error is evaluated.
    pub raw_bound: i64,
    pub yellow_set: Vec<usize>,
    pub yellow_length: u64,
    pub error: ErrorTerm,
    /// The squared-log coefficient carries one more factor of `log2 R`.
    pub extra_log: bool,
    pub eps: Rat,
    pub error_value: Rat,
    pub certified_bound: Rat,
    pub certified_rate: Rat,
    /// `ceil(K_x[R] / 2) - error_value`, reported by the half-dimension ledger.
    pub corollary: Option<Rat>,
    /// `max(0, sigma - 25 eps)`, reported by the almost-label chain.
    pub blanket_rate: Option<Rat>,
}

impl BoundCertificate {
    pub fn is_applicable(&self) -> bool {
        self.status == Status::Applicable
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificates serialize")
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Chain {
    Plain,
    HalfDimension,
}

/// Chained bound over `[ceil(log2 R), R]` for the projection of `x` along `e`.
///
/// With `(n, r_n)` the largest sequence value `<= R`, horizons up to
/// `(n r_n)^2` are partitioned into blocks of `r_n`; larger horizons use a
/// single teal/yellow split. Per-interval values are summed, the telescoping
/// steps cost `soi_const log R` each, and the initial segment costs
/// `ambient_dim (log R + 1)`.
pub fn chain_certificate(
    p_x: &ComplexityProfile,
    p_e: &ComplexityProfile,
    seq: &ScaleSequence,
    sigma: Rat,
    variant: Variant,
    cfg: &EngineConfig,
) -> Result<BoundCertificate> {
    let statement = match variant {
        Variant::Eps(_) => "prop5.1",
        _ => "prop5.4",
    };
    run_chain(p_x, p_e, seq, sigma, Some(variant), cfg, statement, Chain::Plain)
}

/// Half-dimension ledger: `sigma = 1`, case split at `4 n^2 r_n^2`, the
/// `(log b)^2` lemma on the partition and the `sqrt b` lemma on the single
/// split, with one extra `log R` factor on the squared-log slack.
pub fn bourgain_certificate(
    p_x: &ComplexityProfile,
    p_e: &ComplexityProfile,
    seq: &ScaleSequence,
    cfg: &EngineConfig,
) -> Result<BoundCertificate> {
    if p_x.ambient_dim() != 2 {
        return domain("the half-dimension ledger needs a planar profile");
    }
    run_chain(p_x, p_e, seq, int(1), None, cfg, "prop6.1", Chain::HalfDimension)
}

#[allow(clippy::too_many_arguments)]
fn run_chain(
    p_x: &ComplexityProfile,
    p_e: &ComplexityProfile,
    seq: &ScaleSequence,
    sigma: Rat,
    variant: Option<Variant>,
    cfg: &EngineConfig,
    statement: &str,
    chain: Chain,
) -> Result<BoundCertificate> {
    check_sigma(&sigma)?;
    p_x.ensure_valid()?;
    p_e.ensure_valid()?;
    let horizon = p_x.horizon();
    if horizon < 2 {
        return domain(format!("horizon must be at least 2, got {horizon}"));
    }
    if p_e.horizon() < horizon {
        return domain("direction profile is shorter than the point profile");
    }
    if horizon < cfg.b_min {
        return precondition(format!("horizon {horizon} is below b_min = {}", cfg.b_min));
    }
    let Some((n, r_n)) = seq.largest_at_most(horizon) else {
        return precondition(format!("no sequence value is at most the horizon {horizon}"));
    };
    let nr = u128::from(n as u64) * u128::from(r_n);
    let threshold = match chain {
        Chain::Plain => nr * nr,
        Chain::HalfDimension => 4 * nr * nr,
    };
    let partitioned = u128::from(horizon) <= threshold;
    let variant = match (chain, variant) {
        (Chain::Plain, Some(v)) => v,
        (_, _) if partitioned => Variant::Log2,
        _ => Variant::Sqrt,
    };
    let start = ceil_log2(horizon);
    let max_len = if partitioned { r_n } else { (horizon - start).max(1) };
    let pieces = partition(p_x, start, horizon, sigma, max_len)?;

    let mode = variant.slack_mode(cfg);
    let mut ledger = Vec::with_capacity(pieces.len());
    let mut status = Status::Applicable;
    for piece in &pieces {
        let (a, b) = (piece.a, piece.b);
        let labelled = match piece.color {
            Color::Yellow => is_yellow(p_x, a, b, sigma, mode)?,
            Color::Teal => is_teal(p_x, a, b, sigma, mode)?,
        };
        if !labelled {
            return Err(Error::Validation(format!("partition piece [{a}, {b}] fails its label")));
        }
        if let Hypothesis::Fail { s } = direction_hypothesis(p_e, a, b, sigma, variant, cfg)? {
            status = Status::Inapplicable { a, b, s };
            break;
        }
        let g = growth(p_x, a, b)?;
        let (label, value) = match piece.color {
            Color::Yellow => ("yellow", yellow_value(p_x, a, b, sigma)?),
            Color::Teal => ("teal", 0),
        };
        ledger.push(LedgerEntry {
            a,
            b,
            label: piece.color,
            lemma: format!("{label}-{}", variant.tag()),
            growth: g,
            value,
            err: variant.interval_err(cfg),
        });
    }

    let steps = int(ledger.len() as u64);
    let ambient = int(p_x.ambient_dim());
    let mut term: ErrorTerm = ledger.iter().map(|e| e.err.clone()).sum();
    term = term
        + ErrorTerm::single(Coeff::Log, cfg.soi_const * steps)?
        + ErrorTerm::single(Coeff::Log, ambient)?
        + ErrorTerm::single(Coeff::Const, ambient)?;
    let extra_log = chain == Chain::HalfDimension;
    let eps = variant.eps();
    let error_value = term.eval_flagged(horizon, eps, extra_log)?;

    let total_value: i64 = ledger.iter().map(|e| e.value).sum();
    let k_r = p_x.at(horizon);
    let raw_bound = k_r - total_value;
    let yellow_set: Vec<usize> = ledger
        .iter()
        .enumerate()
        .filter(|(_, e)| e.label == Color::Yellow)
        .map(|(i, _)| i)
        .collect();
    let yellow_length = yellow_set.iter().map(|&i| ledger[i].b - ledger[i].a).sum();
    let certified_bound = int(raw_bound) - error_value;
    let applicable = status == Status::Applicable;
    let certified_rate = if applicable {
        (certified_bound / int(horizon)).max(Rat::zero())
    } else {
        Rat::zero()
    };
    let corollary = (chain == Chain::HalfDimension)
        .then(|| int(ceil_int(&rat(k_r as i128, 2))) - error_value);
    let blanket_rate = match variant {
        Variant::Eps(e) if chain == Chain::Plain => Some((sigma - int(25) * e).max(Rat::zero())),
        _ => None,
    };
    Ok(BoundCertificate {
        statement_id: statement.to_string(),
        horizon,
        sigma,
        variant,
        case: if partitioned { 1 } else { 2 },
        max_len,
        start,
        status,
        ledger,
        total_value,
        raw_bound,
        yellow_set,
        yellow_length,
        error: term,
        extra_log,
        eps,
        error_value,
        certified_bound,
        certified_rate,
        corollary,
        blanket_rate,
    })
}

/// Closed-form bound computed from a pair of profiles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedFormCertificate {
    pub statement_id: String,
    pub horizon: u64,
    pub inputs: Vec<(String, Rat)>,
    /// Lower bound on the projection (`thm3.1`) or upper bound on the
    /// conditional complexity of `x` (`thm3.2`).
    pub value: Rat,
    /// For `thm3.2`: `K_x[R] - value`, the implied projection lower bound.
    pub projection_lower: Option<Rat>,
}

/// Smallest `eps >= 0` with `K_e[t] >= s t - eps R` for every `t <= upto`.
pub fn direction_eps(p_e: &ComplexityProfile, s: Rat, upto: u64, horizon: u64) -> Rat {
    (0..=upto.min(p_e.horizon()))
        .map(|t| (s * int(t) - int(p_e.at(t))) / int(horizon.max(1)))
        .fold(Rat::zero(), Rat::max)
}

/// Applies the conditional projection bound with `dim_x` taken as the lower
/// rate of `p_x` over its last quarter and `eps` fitted to `p_e`.
pub fn certify_thm31(
    p_x: &ComplexityProfile,
    p_e: &ComplexityProfile,
    s: Rat,
    cfg: &EngineConfig,
) -> Result<ClosedFormCertificate> {
    let horizon = p_x.horizon();
    let (dim_x, _) = crate::profile::effective_dims(p_x, horizon / 4)?;
    let eps = direction_eps(p_e, s, horizon, horizon);
    let value = bound_thm31(dim_x, s, eps, horizon, cfg)?;
    Ok(ClosedFormCertificate {
        statement_id: "thm3.1".into(),
        horizon,
        inputs: vec![("dim_x".into(), dim_x), ("s".into(), s), ("eps".into(), eps)],
        value,
        projection_lower: None,
    })
}

/// Applies the partial-direction bound with `t` and `C = ceil(R / t)`, `eps`
/// fitted to `p_e` on `[0, t]`.
pub fn certify_thm32(
    p_x: &ComplexityProfile,
    p_e: &ComplexityProfile,
    t: u64,
) -> Result<ClosedFormCertificate> {
    let horizon = p_x.horizon();
    if t == 0 || t > horizon {
        return domain(format!("t must lie in [1, {horizon}]"));
    }
    let c = horizon.div_ceil(t);
    let eps = direction_eps(p_e, int(1), t, horizon);
    let k = p_x.at(horizon);
    let value = bound_thm32(k, horizon, t, c, eps)?;
    Ok(ClosedFormCertificate {
        statement_id: "thm3.2".into(),
        horizon,
        inputs: vec![
            ("K".into(), int(k)),
            ("t".into(), int(t)),
            ("C".into(), int(c)),
            ("eps".into(), eps),
        ],
        value,
        projection_lower: Some((int(k) - value).max(Rat::zero())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directions::{
        mask_intervals, predict_profile, scale_seq_paper, scale_seq_surrogate, MaskKind, SeqRule,
        DEFAULT_SEQ_CAP,
    };
    use crate::rational::parse_rat;

    fn q(s: &str) -> Rat {
        parse_rat(s).unwrap()
    }

    fn seq(values: &[u64]) -> ScaleSequence {
        let rule = SeqRule::List { values: values.to_vec() };
        scale_seq_surrogate(&rule, values.len()).unwrap()
    }

    #[test]
    fn thm31_examples() {
        let zero_log = EngineConfig {
            log_const: int(0),
            ..EngineConfig::default()
        };
        let v = bound_thm31(q("0.8"), q("0.7"), q("1e-4"), 10_000, &zero_log).unwrap();
        assert_eq!(v, int(6000));
        let v = bound_thm31(q("0.8"), q("0.7"), int(0), 10_000, &zero_log).unwrap();
        assert_eq!(v, int(7000));
        let v = bound_thm31(q("0.5"), q("0.5"), q("1e-4"), 10_000, &zero_log).unwrap();
        assert_eq!(v, int(4000));
        let with_log = bound_thm31(q("0.5"), q("0.5"), int(0), 1024, &EngineConfig::default());
        assert_eq!(with_log.unwrap(), int(512 - 10));
        assert!(bound_thm31(q("0.5"), int(0), int(0), 100, &zero_log).is_err());
        assert!(bound_thm31(q("0.5"), q("0.5"), int(0), 1, &zero_log).is_err());
    }

    #[test]
    fn thm32_examples() {
        assert_eq!(bound_thm32(120, 100, 50, 2, q("0.01")).unwrap(), int(55));
        assert_eq!(bound_thm32(80, 100, 50, 2, q("0.01")).unwrap(), int(35));
        assert_eq!(bound_thm32(0, 100, 50, 2, q("0.01")).unwrap(), int(20));
        assert!(matches!(
            bound_thm32(80, 100, 40, 2, int(0)),
            Err(Error::Precondition(_))
        ));
    }

    fn piecewise(horizon: u64, f: impl Fn(u64) -> i64) -> ComplexityProfile {
        ComplexityProfile::new((0..=horizon).map(f).collect(), 2).unwrap()
    }

    #[test]
    fn yellow_examples() {
        // slope 1 to 100, then 6/5 on [100, 150]: growth 60 over length 50
        let p = piecewise(150, |r| if r <= 100 { r as i64 } else { 100 + (6 * (r - 100) as i64) / 5 });
        let cfg = EngineConfig::default();
        let (v, err) = yellow_interval_bound(&p, None, 100, 150, int(1), Variant::Log2, &cfg).unwrap();
        assert_eq!(v, 10);
        assert_eq!(err, ErrorTerm::single(Coeff::Log2, int(1)).unwrap());
        let (v, err) =
            yellow_interval_bound(&p, None, 100, 150, int(1), Variant::Eps(q("0.01")), &cfg).unwrap();
        assert_eq!(v, 10);
        assert_eq!(err.eval(150, q("0.01")).unwrap(), int(6));

        let flat = ComplexityProfile::ideal_direction(40);
        let (v, _) = yellow_interval_bound(&flat, None, 20, 40, int(1), Variant::Log2, &cfg).unwrap();
        assert_eq!(v, 0);
        // a flat stretch is not yellow at slope 1
        let p = piecewise(40, |r| r.min(20) as i64);
        assert!(matches!(
            yellow_interval_bound(&p, None, 20, 40, int(1), Variant::Exact, &cfg),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn teal_examples() {
        let cfg = EngineConfig::default();
        let p = piecewise(40, |r| r.min(20) as i64);
        let (v, err) = teal_interval_bound(&p, None, 20, 40, int(1), Variant::Log2, &cfg).unwrap();
        assert_eq!((v, err), (0, ErrorTerm::single(Coeff::Log2, int(1)).unwrap()));
        let (v, err) =
            teal_interval_bound(&p, None, 20, 40, int(1), Variant::Eps(q("0.1")), &cfg).unwrap();
        assert_eq!((v, err), (0, ErrorTerm::single(Coeff::EpsB, int(4)).unwrap()));
        let (v, _) = teal_interval_bound(&p, None, 30, 30, int(1), Variant::Log2, &cfg).unwrap();
        assert_eq!(v, 0);
        assert!(teal_interval_bound(&p, None, 2, 8, int(1), Variant::Log2, &cfg).is_err());
    }

    #[test]
    fn hypothesis_examples() {
        let cfg = EngineConfig::default();
        let ideal = ComplexityProfile::ideal_direction(200);
        for v in [Variant::Exact, Variant::Log2, Variant::Sqrt] {
            assert_eq!(direction_hypothesis(&ideal, 0, 200, int(1), v, &cfg).unwrap(), Hypothesis::Pass);
        }
        // flat on (8, 16]
        let g4 = scale_seq_surrogate(&SeqRule::Geometric { k: 4 }, 2).unwrap();
        let masked = predict_profile(&mask_intervals(MaskKind::D0, &g4, 40).unwrap());
        assert_eq!(
            direction_hypothesis(&masked, 0, 40, int(1), Variant::Exact, &cfg).unwrap(),
            Hypothesis::Fail { s: 9 }
        );
        // c log2 40 > 5 absorbs five masked bits, not six
        assert_eq!(
            direction_hypothesis(&masked, 0, 40, int(1), Variant::Log2, &cfg).unwrap(),
            Hypothesis::Fail { s: 14 }
        );
        let half: Vec<i64> = (0..=64).map(|s: i64| (s + 1) / 2).collect();
        let half = ComplexityProfile::new(half, 1).unwrap();
        assert_eq!(
            direction_hypothesis(&half, 0, 64, rat(1, 2), Variant::Exact, &cfg).unwrap(),
            Hypothesis::Pass
        );
    }

    #[test]
    fn chain_on_maximal_profiles() {
        let cfg = EngineConfig::small_horizon();
        let px = piecewise(96, |r| r as i64);
        let pe = ComplexityProfile::ideal_direction(96);
        let c = chain_certificate(&px, &pe, &seq(&[2, 8, 32]), int(1), Variant::Exact, &cfg).unwrap();
        assert!(c.is_applicable());
        assert_eq!(c.case, 1);
        assert_eq!(c.total_value, 0);
        assert_eq!(c.raw_bound, 96);
        assert_eq!(c.certified_bound, int(96) - c.error_value);

        let half = piecewise(96, |r| r.div_ceil(2) as i64);
        let c = chain_certificate(&half, &pe, &seq(&[2, 8, 32]), rat(1, 2), Variant::Log2, &cfg).unwrap();
        assert!(c.is_applicable());
        let floor = rat(1, 2) - c.error_value / int(96);
        assert!(c.certified_rate >= floor.max(Rat::zero()));
    }

    #[test]
    fn chain_reports_failing_block() {
        let cfg = EngineConfig::small_horizon();
        let g4 = scale_seq_surrogate(&SeqRule::Geometric { k: 4 }, 2).unwrap();
        let pe = predict_profile(&mask_intervals(MaskKind::D0, &g4, 400).unwrap());
        let px = piecewise(400, |r| r as i64);
        // 400 > (2 * 8)^2, so one split spans the masked stretch
        let c = chain_certificate(&px, &pe, &g4, int(1), Variant::Exact, &cfg).unwrap();
        assert!(!c.is_applicable());
        assert!(matches!(c.status, Status::Inapplicable { a: 9, b: 400, s: 9 }));
        assert_eq!(c.certified_rate, int(0));
    }

    #[test]
    fn eps_chain_reports_blanket_rate() {
        let cfg = EngineConfig::default();
        let px = piecewise(64, |r| r as i64);
        let pe = ComplexityProfile::ideal_direction(64);
        let c = chain_certificate(&px, &pe, &seq(&[2, 16]), int(1), Variant::Eps(q("0.01")), &cfg)
            .unwrap();
        assert_eq!(c.statement_id, "prop5.1");
        assert_eq!(c.blanket_rate, Some(q("0.75")));
    }

    #[test]
    fn half_dimension_examples() {
        let cfg = EngineConfig::default();
        let pe = ComplexityProfile::ideal_direction(100);
        let single = seq(&[2]);

        let tight = piecewise(100, |r| 2 * r.saturating_sub(50) as i64);
        let c = bourgain_certificate(&tight, &pe, &single, &cfg).unwrap();
        assert_eq!(c.case, 2);
        assert_eq!(c.ledger.len(), 2);
        assert_eq!((c.ledger[0].b, c.ledger[1].label), (50, Color::Yellow));
        assert_eq!(c.yellow_length, 50);
        assert_eq!(c.raw_bound, 50);
        assert!(c.extra_log);

        let early = piecewise(100, |r| 2 * r.min(30) as i64);
        let c = bourgain_certificate(&early, &pe, &single, &cfg).unwrap();
        assert!(c.yellow_set.is_empty());
        assert_eq!(c.raw_bound, 60);

        let unit = piecewise(100, |r| r as i64);
        let c = bourgain_certificate(&unit, &pe, &single, &cfg).unwrap();
        assert_eq!(c.raw_bound, 100);

        // the partition regime gives the same tight value
        let paper = scale_seq_paper(2, DEFAULT_SEQ_CAP).unwrap();
        let c = bourgain_certificate(&tight, &pe, &paper, &cfg).unwrap();
        assert_eq!(c.case, 1);
        assert_eq!(c.raw_bound, 50);
        assert_eq!(c.corollary, Some(int(50) - c.error_value));
    }

    #[test]
    fn certificates_serialize_deterministically() {
        let cfg = EngineConfig::default();
        let px = piecewise(300, |r| (r as i64 * 3) / 4);
        let pe = ComplexityProfile::ideal_direction(300);
        let paper = scale_seq_paper(2, DEFAULT_SEQ_CAP).unwrap();
        let a = chain_certificate(&px, &pe, &paper, rat(3, 4), Variant::Log2, &cfg).unwrap();
        let b = chain_certificate(&px, &pe, &paper, rat(3, 4), Variant::Log2, &cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let back: BoundCertificate = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(back, a);
        assert!(a.to_json().starts_with("{\"statement_id\":\"prop5.4\",\"horizon\":300"));
    }

    #[test]
    fn closed_form_certificates() {
        let px = piecewise(256, |r| r as i64);
        let pe = ComplexityProfile::ideal_direction(256);
        let c = certify_thm31(&px, &pe, int(1), &EngineConfig::default()).unwrap();
        assert_eq!(c.value, int(256 - 8));
        let c = certify_thm32(&px, &pe, 128).unwrap();
        assert_eq!(c.value, int(64));
        assert_eq!(c.projection_lower, Some(int(192)));
    }
}
