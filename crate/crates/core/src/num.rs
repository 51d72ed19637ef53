//! Exact decimal numbers stored as 64-bit integers in units of `1 / SCALE`.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Number of integer ticks per unit.
pub const SCALE: i64 = 1_000_000;
const SCALE_DIGITS: usize = 6;

/// A finite real number with six exact decimal places.
///
/// All arithmetic in the crate runs on these values so that equality tests
/// (DBM closure, the transient identity) are exact.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Num(i64);

impl Num {
    pub const ZERO: Num = Num(0);

    pub const fn from_ticks(ticks: i64) -> Self {
        Num(ticks)
    }

    pub const fn ticks(self) -> i64 {
        self.0
    }

    pub const fn from_int(v: i64) -> Self {
        Num(v * SCALE)
    }

    /// Rounds to the nearest tick.
    pub fn from_f64(v: f64) -> Self {
        Num((v * SCALE as f64).round() as i64)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn is_integer(self) -> bool {
        self.0 % SCALE == 0
    }

    pub fn abs(self) -> Self {
        Num(self.0.abs())
    }

    /// Multiplies by a small integer factor.
    pub fn times(self, k: i64) -> Self {
        Num(self.0 * k)
    }
}

impl Add for Num {
    type Output = Num;
    fn add(self, rhs: Num) -> Num {
        Num(self.0 + rhs.0)
    }
}

impl AddAssign for Num {
    fn add_assign(&mut self, rhs: Num) {
        self.0 += rhs.0;
    }
}

impl Sub for Num {
    type Output = Num;
    fn sub(self, rhs: Num) -> Num {
        Num(self.0 - rhs.0)
    }
}

impl SubAssign for Num {
    fn sub_assign(&mut self, rhs: Num) {
        self.0 -= rhs.0;
    }
}

impl Neg for Num {
    type Output = Num;
    fn neg(self) -> Num {
        Num(-self.0)
    }
}

impl From<i64> for Num {
    fn from(v: i64) -> Self {
        Num::from_int(v)
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let mag = self.0.unsigned_abs();
        let int = mag / SCALE as u64;
        let frac = mag % SCALE as u64;
        if frac == 0 {
            write!(f, "{sign}{int}")
        } else {
            let digits = format!("{frac:0width$}", width = SCALE_DIGITS);
            write!(f, "{sign}{int}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl fmt::Debug for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Num {
    type Err = Error;

    /// Parses plain decimals (`-2.5`, `+3`, `.5`) and scientific notation
    /// (`1e-3`). More than six fractional digits after normalisation is an
    /// error rather than a silent rounding.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Number(s.to_string());
        let t = s.trim();
        let (mantissa, exp) = match t.find(['e', 'E']) {
            Some(pos) => {
                let e: i32 = t[pos + 1..].parse().map_err(|_| bad())?;
                (&t[..pos], e)
            }
            None => (t, 0),
        };
        let (neg, body) = match mantissa.as_bytes().first() {
            Some(b'-') => (true, &mantissa[1..]),
            Some(b'+') => (false, &mantissa[1..]),
            _ => (false, mantissa),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((a, b)) => (a, b),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let mut digits: String = format!("{int_part}{frac_part}");
        // decimal point position counted from the right end of `digits`
        let mut frac_len = frac_part.len() as i32 - exp;
        if frac_len < 0 {
            digits.extend(std::iter::repeat_n('0', (-frac_len) as usize));
            frac_len = 0;
        }
        let mut frac_len = frac_len as usize;
        while frac_len > SCALE_DIGITS {
            if !digits.ends_with('0') {
                return Err(bad());
            }
            digits.pop();
            frac_len -= 1;
        }
        digits.extend(std::iter::repeat_n('0', SCALE_DIGITS - frac_len));
        let digits = digits.trim_start_matches('0');
        let mag: i64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
        Ok(Num(if neg { -mag } else { mag }))
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_integer() {
            serializer.serialize_i64(self.0 / SCALE)
        } else {
            // Display output is the shortest exact decimal, which f64 round-trips.
            let v: f64 = self.to_string().parse().map_err(serde::ser::Error::custom)?;
            serializer.serialize_f64(v)
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let n = serde_json::Number::deserialize(deserializer)?;
        n.to_string().parse().map_err(serde::de::Error::custom)
    }
}
