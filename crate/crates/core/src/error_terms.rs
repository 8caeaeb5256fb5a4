//! Symbolic slack terms.
//!
//! An [`ErrorTerm`] is a non-negative combination of the slack shapes that
//! appear in the projection bounds:
//!
//! ```text
//! c_const + c_log*log2(b) + c_log2*log2(b)^2 + c_sqrt*sqrt(b) + c_epsb*eps*b + c_lin*b
//! ```
//!
//! Certificates carry these coefficients exactly and only evaluate them at the
//! end, rounding every irrational factor upward so the evaluated slack never
//! understates the symbolic one.

use std::ops::Add;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rational::{log2_up, sqrt_up, Rat};

/// Names one coefficient of an [`ErrorTerm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coeff {
    Const,
    Log,
    Log2,
    Sqrt,
    EpsB,
    Lin,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawErrorTerm")]
pub struct ErrorTerm {
    c_const: Rat,
    c_log: Rat,
    c_log2: Rat,
    c_sqrt: Rat,
    c_epsb: Rat,
    c_lin: Rat,
}

#[derive(Deserialize)]
struct RawErrorTerm {
    c_const: Rat,
    c_log: Rat,
    c_log2: Rat,
    c_sqrt: Rat,
    c_epsb: Rat,
    c_lin: Rat,
}

impl TryFrom<RawErrorTerm> for ErrorTerm {
    type Error = Error;

    fn try_from(raw: RawErrorTerm) -> Result<Self> {
        let term = ErrorTerm {
            c_const: raw.c_const,
            c_log: raw.c_log,
            c_log2: raw.c_log2,
            c_sqrt: raw.c_sqrt,
            c_epsb: raw.c_epsb,
            c_lin: raw.c_lin,
        };
        if term.coeffs().iter().any(|c| c.is_negative()) {
            return domain("error term coefficients must be non-negative");
        }
        Ok(term)
    }
}

impl ErrorTerm {
    pub fn zero() -> Self {
        Self::default()
    }

    /// A term with a single non-zero coefficient.
    pub fn single(coeff: Coeff, value: Rat) -> Result<Self> {
        if value.is_negative() {
            return domain(format!("negative {coeff:?} coefficient"));
        }
        let mut term = Self::zero();
        *term.slot(coeff) = value;
        Ok(term)
    }

    pub fn get(&self, coeff: Coeff) -> Rat {
        match coeff {
            Coeff::Const => self.c_const,
            Coeff::Log => self.c_log,
            Coeff::Log2 => self.c_log2,
            Coeff::Sqrt => self.c_sqrt,
            Coeff::EpsB => self.c_epsb,
            Coeff::Lin => self.c_lin,
        }
    }

    fn slot(&mut self, coeff: Coeff) -> &mut Rat {
        match coeff {
            Coeff::Const => &mut self.c_const,
            Coeff::Log => &mut self.c_log,
            Coeff::Log2 => &mut self.c_log2,
            Coeff::Sqrt => &mut self.c_sqrt,
            Coeff::EpsB => &mut self.c_epsb,
            Coeff::Lin => &mut self.c_lin,
        }
    }

    fn coeffs(&self) -> [Rat; 6] {
        [
            self.c_const,
            self.c_log,
            self.c_log2,
            self.c_sqrt,
            self.c_epsb,
            self.c_lin,
        ]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs().iter().all(Zero::is_zero)
    }

    /// Multiplies every coefficient by `k >= 0`.
    pub fn scale(&self, k: Rat) -> Result<Self> {
        if k.is_negative() {
            return domain("error terms can only be scaled by a non-negative factor");
        }
        Ok(ErrorTerm {
            c_const: self.c_const * k,
            c_log: self.c_log * k,
            c_log2: self.c_log2 * k,
            c_sqrt: self.c_sqrt * k,
            c_epsb: self.c_epsb * k,
            c_lin: self.c_lin * k,
        })
    }

    /// Conservative numeric value at precision `b >= 2` and slack rate `eps >= 0`.
    pub fn eval(&self, b: u64, eps: Rat) -> Result<Rat> {
        self.eval_flagged(b, eps, false)
    }

    /// As [`ErrorTerm::eval`]; with `extra_log` the `c_log2` term carries one
    /// more factor of `log2 b`, so it stands for `(log2 b)^3`.
    pub fn eval_flagged(&self, b: u64, eps: Rat, extra_log: bool) -> Result<Rat> {
        if b < 2 {
            return domain(format!("error terms are evaluated at precision >= 2, got {b}"));
        }
        if eps.is_negative() {
            return domain("eps must be non-negative");
        }
        let lg = log2_up(b);
        let bq = Rat::from_integer(i128::from(b));
        let mut squared_log = lg * lg;
        if extra_log {
            squared_log *= lg;
        }
        Ok(self.c_const
            + self.c_log * lg
            + self.c_log2 * squared_log
            + self.c_sqrt * sqrt_up(&bq)
            + self.c_epsb * eps * bq
            + self.c_lin * bq)
    }
}

impl Add for ErrorTerm {
    type Output = ErrorTerm;

    fn add(self, rhs: ErrorTerm) -> ErrorTerm {
        &self + &rhs
    }
}

impl Add for &ErrorTerm {
    type Output = ErrorTerm;

    fn add(self, rhs: &ErrorTerm) -> ErrorTerm {
        ErrorTerm {
            c_const: self.c_const + rhs.c_const,
            c_log: self.c_log + rhs.c_log,
            c_log2: self.c_log2 + rhs.c_log2,
            c_sqrt: self.c_sqrt + rhs.c_sqrt,
            c_epsb: self.c_epsb + rhs.c_epsb,
            c_lin: self.c_lin + rhs.c_lin,
        }
    }
}

impl std::iter::Sum for ErrorTerm {
    fn sum<I: Iterator<Item = ErrorTerm>>(iter: I) -> Self {
        iter.fold(ErrorTerm::zero(), |acc, t| acc + t)
    }
}
