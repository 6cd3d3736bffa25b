//! Positive real parameters compared against integer counts without rounding.
//!
//! Values that fit comfortably in 64-bit fractions are kept as exact ratios, so
//! a user-supplied `0.1` becomes `1/10` and `d >= 0.1 * n` is decided by integer
//! cross-multiplication. The hierarchy constants derived from them shrink doubly
//! exponentially; those are kept as base-2 logarithms instead.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Below `2^-40` a value is stored by its logarithm.
const EXACT_FLOOR_LOG2: f64 = -40.0;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Repr {
    Ratio { num: u64, den: u64 },
    Tiny { log2: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Param(Repr);

impl Param {
    pub fn new(x: f64) -> Result<Param> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::Contract(format!("parameter must be positive and finite, got {x}")));
        }
        if x.log2() < EXACT_FLOOR_LOG2 {
            return Ok(Param(Repr::Tiny { log2: x.log2() }));
        }
        let r = Ratio::<i64>::approximate_float(x)
            .filter(|r| *r.numer() > 0 && *r.denom() > 0)
            .ok_or_else(|| Error::Contract(format!("cannot represent parameter {x}")))?;
        Ok(Param(Repr::Ratio { num: *r.numer() as u64, den: *r.denom() as u64 }))
    }

    pub fn ratio(num: u64, den: u64) -> Param {
        assert!(num > 0 && den > 0, "ratio parameters must be positive");
        let r = Ratio::new(num, den);
        Param(Repr::Ratio { num: *r.numer(), den: *r.denom() })
    }

    /// Builds `2^log2`. An infinite or NaN exponent means the chain underflowed
    /// even the logarithmic representation.
    pub fn from_log2(log2: f64) -> Result<Param> {
        if !log2.is_finite() {
            return Err(Error::Diagnostic(format!("parameter exponent {log2} is not finite")));
        }
        if log2 < EXACT_FLOOR_LOG2 {
            Ok(Param(Repr::Tiny { log2 }))
        } else {
            Param::new(log2.exp2())
        }
    }

    pub fn log2(&self) -> f64 {
        match self.0 {
            Repr::Ratio { num, den } => (num as f64).log2() - (den as f64).log2(),
            Repr::Tiny { log2 } => log2,
        }
    }

    /// Nearest `f64`; tiny values may flush to zero.
    pub fn value(&self) -> f64 {
        match self.0 {
            Repr::Ratio { num, den } => num as f64 / den as f64,
            Repr::Tiny { log2 } => log2.exp2(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.0, Repr::Ratio { .. })
    }

    /// `(numerator, denominator)` in lowest terms when stored exactly.
    pub fn as_ratio(&self) -> Option<(u64, u64)> {
        match self.0 {
            Repr::Ratio { num, den } => Some((num, den)),
            Repr::Tiny { .. } => None,
        }
    }

    pub fn powf(&self, e: f64) -> Result<Param> {
        Param::from_log2(self.log2() * e)
    }

    pub fn times(&self, c: f64) -> Result<Param> {
        if c.is_nan() || c <= 0.0 {
            return Err(Error::Contract(format!("scale factor must be positive, got {c}")));
        }
        Param::from_log2(self.log2() + c.log2())
    }

    /// Geometric interpolation: `lo^(1-w) * hi^w`.
    pub fn between(lo: Param, hi: Param, w: f64) -> Result<Param> {
        Param::from_log2((1.0 - w) * lo.log2() + w * hi.log2())
    }

    pub fn min(self, other: Param) -> Param {
        if other.log2() < self.log2() {
            other
        } else {
            self
        }
    }

    pub fn lt(&self, other: &Param) -> bool {
        match (self.0, other.0) {
            (Repr::Ratio { num: a, den: b }, Repr::Ratio { num: c, den: d }) => {
                (a as u128) * (d as u128) < (c as u128) * (b as u128)
            }
            _ => self.log2() < other.log2(),
        }
    }

    /// `lhs <= self * scale`.
    pub fn count_le_times(&self, lhs: u128, scale: u128) -> bool {
        match self.0 {
            Repr::Ratio { num, den } => {
                match (lhs.checked_mul(den as u128), scale.checked_mul(num as u128)) {
                    (Some(l), Some(r)) => l <= r,
                    _ => log_le(lhs, self.log2(), scale),
                }
            }
            Repr::Tiny { log2 } => log_le(lhs, log2, scale),
        }
    }

    /// `lhs < self * scale`.
    pub fn count_lt_times(&self, lhs: u128, scale: u128) -> bool {
        match self.0 {
            Repr::Ratio { num, den } => {
                match (lhs.checked_mul(den as u128), scale.checked_mul(num as u128)) {
                    (Some(l), Some(r)) => r > l,
                    _ => log_lt(lhs, self.log2(), scale),
                }
            }
            Repr::Tiny { log2 } => log_lt(lhs, log2, scale),
        }
    }

    /// Ceiling of `self * scale`, saturating for astronomically large products.
    pub fn ceil_times(&self, scale: u64) -> u64 {
        let approx = (self.value() * scale as f64).ceil();
        let mut k = if approx.is_finite() && approx >= 0.0 { approx as u64 } else { u64::MAX };
        while k > 0 && !self.count_lt_times((k - 1) as u128, scale as u128) {
            k -= 1;
        }
        while k < u64::MAX && self.count_lt_times(k as u128, scale as u128) {
            k += 1;
        }
        k
    }
}

/// `lhs <= 2^log2 * scale` in the log domain.
fn log_le(lhs: u128, log2: f64, scale: u128) -> bool {
    if lhs == 0 {
        return true;
    }
    if scale == 0 {
        return false;
    }
    (lhs as f64).log2() <= log2 + (scale as f64).log2()
}

/// `lhs < 2^log2 * scale` in the log domain.
fn log_lt(lhs: u128, log2: f64, scale: u128) -> bool {
    if scale == 0 {
        return false;
    }
    if lhs == 0 {
        return true;
    }
    (lhs as f64).log2() < log2 + (scale as f64).log2()
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Repr::Ratio { num, den: 1 } => write!(f, "{num}"),
            Repr::Ratio { num, den } => write!(f, "{num}/{den}"),
            Repr::Tiny { log2 } => write!(f, "2^{log2}"),
        }
    }
}

impl Serialize for Param {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            Repr::Ratio { .. } => s.serialize_f64(self.value()),
            Repr::Tiny { log2 } => s.serialize_str(&format!("2^{log2}")),
        }
    }
}

impl<'de> Deserialize<'de> for Param {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Param, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        use serde::de::Error as _;
        match Raw::deserialize(d)? {
            Raw::Num(x) => Param::new(x).map_err(D::Error::custom),
            Raw::Text(t) => {
                let exp = t
                    .strip_prefix("2^")
                    .and_then(|e| e.parse::<f64>().ok())
                    .ok_or_else(|| D::Error::custom(format!("bad parameter {t:?}")))?;
                Param::from_log2(exp).map_err(D::Error::custom)
            }
        }
    }
}
