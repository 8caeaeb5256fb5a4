//! Exact rational helpers shared by the profile calculus and the bound engine.
//!
//! Irrational quantities (`log2 b`, `sqrt b`) never enter a comparison as a
//! float: inequalities against them are decided exactly with big integers, and
//! numeric evaluation rounds them *up* onto the grid `2^-16`.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = Ratio<i128>;

/// Fractional bits of the upward-rounding grid used for `sqrt` and `log2`.
pub const ROUND_BITS: u32 = 16;

pub fn rat(numer: i128, denom: i128) -> Rat {
    Rat::new(numer, denom)
}

pub fn int(n: impl Into<i128>) -> Rat {
    Rat::from_integer(n.into())
}

/// Parses `3`, `-2`, `1/2`, `0.01` or `1e-4` into an exact rational.
pub fn parse_rat(text: &str) -> Result<Rat> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((n, d)) = text.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rat::new(n, d));
    }
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = text[i + 1..].parse().map_err(|_| bad())?;
            (&text[..i], e)
        }
        None => (text, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let numer: i128 = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    if scale.unsigned_abs() > 30 {
        return Err(bad());
    }
    let pow = 10i128.pow(scale.unsigned_abs());
    let mut value = if scale >= 0 {
        Rat::from_integer(numer * pow)
    } else {
        Rat::new(numer, pow)
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

pub fn format_rat(x: &Rat) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Rat) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

pub fn ceil_int(x: &Rat) -> i128 {
    x.ceil().to_integer()
}

pub fn floor_int(x: &Rat) -> i128 {
    x.floor().to_integer()
}

fn big(n: i128) -> BigUint {
    BigUint::from(n.unsigned_abs())
}

fn exact_sqrt(n: &BigUint) -> Option<BigUint> {
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Upper bound on `sqrt(x)` for `x >= 0`: exact when numerator and denominator
/// are perfect squares, otherwise the next multiple of `2^-16` above the root.
pub fn sqrt_up(x: &Rat) -> Rat {
    assert!(!x.is_negative(), "sqrt_up of a negative rational");
    if x.is_zero() {
        return Rat::zero();
    }
    let (n, d) = (big(*x.numer()), big(*x.denom()));
    if let (Some(rn), Some(rd)) = (exact_sqrt(&n), exact_sqrt(&d)) {
        return Rat::new(
            rn.to_i128().expect("root fits"),
            rd.to_i128().expect("root fits"),
        );
    }
    // smallest m with m^2 * d >= n * 2^32
    let target = n << (2 * ROUND_BITS);
    let mut m = (&target / &d).sqrt();
    while &m * &m * &d < target {
        m += 1u32;
    }
    Rat::new(m.to_i128().expect("root fits"), 1i128 << ROUND_BITS)
}

/// Upper bound on `log2(b)` for `b >= 1`: exact on powers of two, otherwise
/// `ceil(2^16 log2 b) / 2^16` plus one grid step of guard against libm error.
pub fn log2_up(b: u64) -> Rat {
    assert!(b >= 1, "log2_up of zero");
    if b.is_power_of_two() {
        return int(b.trailing_zeros());
    }
    let scaled = (b as f64).log2() * f64::from(1u32 << ROUND_BITS);
    let m = scaled.ceil() as i128 + 1;
    Rat::new(m, 1i128 << ROUND_BITS)
}

/// Smallest `a` with `2^a >= r` (`r >= 1`).
pub fn ceil_log2(r: u64) -> u64 {
    assert!(r >= 1);
    u64::from(64 - (r - 1).leading_zeros()) * u64::from(r > 1)
}

/// Decides `x <= c * log2(b)` exactly (`b >= 1`).
pub fn le_c_log2(x: &Rat, c: u32, b: u64) -> bool {
    if !x.is_positive() {
        return true;
    }
    if c == 0 || b <= 1 {
        return false;
    }
    // x = n/d > 0:  n/d <= c log2 b  <=>  2^n <= b^(d c)
    let n = *x.numer() as u128;
    let dc = (*x.denom() as u128) * u128::from(c);
    let floor_log = u128::from(63 - b.leading_zeros());
    if n <= floor_log * dc {
        return true;
    }
    if b.is_power_of_two() || n >= (floor_log + 1) * dc {
        return false;
    }
    let (Ok(n), Ok(dc)) = (u64::try_from(n), u32::try_from(dc)) else {
        return false;
    };
    let lhs = BigUint::one() << n;
    let rhs = BigUint::from(b).pow(dc);
    lhs <= rhs
}

/// Decides `x <= c * sqrt(b)` exactly.
pub fn le_c_sqrt(x: &Rat, c: u32, b: u64) -> bool {
    if !x.is_positive() {
        return true;
    }
    let rhs_sq = Rat::from_integer(i128::from(c) * i128::from(c) * i128::from(b));
    x * x <= rhs_sq
}

/// Serializes a rational as the string `n/d` (or `n`). Needed inside
/// internally tagged enums, where serde buffers values and drops `i128`.
pub mod as_string {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{format_rat, parse_rat, Rat};

    pub fn serialize<S: Serializer>(x: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let text = String::deserialize(d)?;
        parse_rat(&text).map_err(serde::de::Error::custom)
    }
}
