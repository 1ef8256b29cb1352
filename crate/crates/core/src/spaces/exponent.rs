use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A norm exponent: an exact rational `p >= 1` or `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Ratio<i64>),
    Infinity,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(Ratio::new_raw(1, 1));
    pub const TWO: Exponent = Exponent::Finite(Ratio::new_raw(2, 1));

    /// `num/den`, reduced. Fails unless the value is at least 1.
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::BadExponent(format!("{num}/{den}")));
        }
        let r = Ratio::new(num, den);
        if r < Ratio::one() {
            return Err(Error::BadExponent(format!("{r} is below 1")));
        }
        Ok(Exponent::Finite(r))
    }

    pub fn integer(p: u32) -> Result<Self> {
        Exponent::new(p as i64, 1)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Exponent::Finite(r) if r.is_one())
    }

    pub fn is_two(&self) -> bool {
        matches!(self, Exponent::Finite(r) if *r == Ratio::from_integer(2))
    }

    /// The exponent as an integer, if it is one.
    pub fn as_integer(&self) -> Option<u32> {
        match self {
            Exponent::Finite(r) if r.is_integer() => r.to_integer().to_u32(),
            _ => None,
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Exponent::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// The conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(&self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::ONE,
            Exponent::Finite(r) if r.is_one() => Exponent::Infinity,
            Exponent::Finite(r) => {
                let q = *r / (*r - Ratio::one());
                debug_assert!(!q.is_zero());
                Exponent::Finite(q)
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinity => f.write_str("inf"),
            Exponent::Finite(r) => write!(f, "{r}"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    /// Accepts `inf`, `infinity`, `∞`, integers, fractions `a/b` and short
    /// decimals such as `1.5`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::BadExponent(format!("cannot parse {s:?}"));
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => return Ok(Exponent::Infinity),
            _ => {}
        }
        if let Some((a, b)) = t.split_once('/') {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            return Exponent::new(a, b);
        }
        if let Some((int, frac)) = t.split_once('.') {
            if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let den = 10i64.pow(frac.len() as u32);
            let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
            return Exponent::new(int * den + frac, den);
        }
        let a: i64 = t.parse().map_err(|_| bad())?;
        Exponent::new(a, 1)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Exponent;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an exponent such as \"inf\", \"2\" or \"4/3\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exponent, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exponent, E> {
                let v = i64::try_from(v).map_err(E::custom)?;
                Exponent::new(v, 1).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exponent, E> {
                Exponent::new(v, 1).map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exponent, E> {
                if v.is_infinite() && v > 0.0 {
                    return Ok(Exponent::Infinity);
                }
                format!("{v}").parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}
