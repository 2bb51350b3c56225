//! Exact arithmetic in the ring of dyadic rationals `Z[1/2]`.
//!
//! A [`Dyadic`] is `mantissa * 2^exp2` with an arbitrary-precision mantissa.
//! Values are kept canonical (odd mantissa, or the pair `(0, 0)`), so
//! structural equality is value equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{FmmError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    mantissa: BigInt,
    exp2: i64,
}

fn exp_add(a: i64, b: i64) -> i64 {
    a.checked_add(b).expect("dyadic exponent overflow")
}

impl Dyadic {
    /// Builds the canonical representative of `mantissa * 2^exp2`.
    pub fn normalize(mantissa: impl Into<BigInt>, exp2: i64) -> Self {
        let mantissa = mantissa.into();
        if mantissa.is_zero() {
            return Self::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        if tz == 0 {
            return Dyadic { mantissa, exp2 };
        }
        Dyadic {
            mantissa: mantissa >> tz,
            exp2: exp_add(exp2, tz as i64),
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exp2: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic::from(1i64)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exp2: self.exp2,
        }
    }

    /// Multiplies by `2^e`.
    pub fn shift(&self, e: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic {
            mantissa: self.mantissa.clone(),
            exp2: exp_add(self.exp2, e),
        }
    }

    /// Returns `Some((negative, e))` when the value is `±2^e`.
    pub fn as_signed_power_of_two(&self) -> Option<(bool, i64)> {
        if self.mantissa.magnitude().is_one() {
            Some((self.is_negative(), self.exp2))
        } else {
            None
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.exp2 < 0 {
            return None;
        }
        let shift = usize::try_from(self.exp2).ok()?;
        if shift >= 64 {
            return if self.is_zero() { Some(0) } else { None };
        }
        (&self.mantissa << shift).to_i64()
    }

    /// Exact conversion from a finite float. Non-finite inputs yield `None`.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Self::zero());
        }
        let (m, e) = decompose_f64(x);
        Some(Dyadic::normalize(m, e as i64))
    }

    /// Exact conversion to `f64`, or `None` if rounding would be needed.
    pub fn to_f64_exact(&self) -> Option<f64> {
        let r = self.to_f64_rounded();
        if r.is_finite() && Dyadic::from_f64(r).as_ref() == Some(self) {
            Some(r)
        } else {
            None
        }
    }

    /// Round-to-nearest-even conversion to `f64` (overflow gives ±inf).
    pub fn to_f64_rounded(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        round_to_f64(self.is_negative(), self.mantissa.magnitude(), self.exp2)
    }
}

/// Splits a finite nonzero float into `(m, e)` with `x = m * 2^e`, `|m| < 2^53`.
pub(crate) fn decompose_f64(x: f64) -> (i64, i32) {
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    if biased == 0 {
        (sign * frac, -1074)
    } else {
        (sign * (frac | (1i64 << 52)), biased - 1075)
    }
}

pub(crate) fn pow2_f64(e: i32) -> f64 {
    debug_assert!((-1074..=1023).contains(&e));
    if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (e + 1074))
    }
}

/// `q * 2^e` for an integer `q < 2^54`, exact whenever the result is representable.
fn ldexp(q: f64, e: i64) -> f64 {
    if e > 1023 {
        if e > 2200 {
            return q * f64::INFINITY;
        }
        return q * pow2_f64(1023) * pow2_f64((e - 1023) as i32);
    }
    if e < -1074 {
        if e < -1074 - 60 {
            return 0.0;
        }
        return q * pow2_f64((e + 60) as i32) * pow2_f64(-60);
    }
    q * pow2_f64(e as i32)
}

/// Rounds `±magnitude * 2^exp` to the nearest float, ties to even.
pub(crate) fn round_to_f64(negative: bool, magnitude: &BigUint, exp: i64) -> f64 {
    let nbits = magnitude.bits() as i64;
    if nbits == 0 {
        return 0.0;
    }
    // binary exponent of the leading bit
    let lead = nbits - 1 + exp;
    let precision = if lead >= -1022 {
        53
    } else {
        53 - (-1022 - lead)
    };
    let drop = nbits - precision;
    let (q, qexp) = if drop <= 0 {
        (magnitude.clone(), exp)
    } else {
        let drop_u = drop as u64;
        let q = magnitude >> drop_u;
        let rem = magnitude - (&q << drop_u);
        let half = BigUint::one() << (drop_u - 1);
        let round_up = match rem.cmp(&half) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => q.is_odd(),
        };
        (if round_up { q + 1u32 } else { q }, exp + drop)
    };
    let qf = q.to_f64().unwrap_or(f64::INFINITY);
    let v = if qf == 0.0 { 0.0 } else { ldexp(qf, qexp) };
    if negative {
        -v
    } else {
        v
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::normalize(BigInt::from(v), 0)
    }
}

impl From<i32> for Dyadic {
    fn from(v: i32) -> Self {
        Dyadic::from(v as i64)
    }
}

impl From<BigInt> for Dyadic {
    fn from(v: BigInt) -> Self {
        Dyadic::normalize(v, 0)
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (lo, hi) = if self.exp2 <= rhs.exp2 {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let diff = (hi.exp2 - lo.exp2) as usize;
        let sum = &lo.mantissa + (&hi.mantissa << diff);
        Dyadic::normalize(sum, lo.exp2)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        // product of odd mantissas is odd: already canonical
        Dyadic {
            mantissa: &self.mantissa * &rhs.mantissa,
            exp2: exp_add(self.exp2, rhs.exp2),
        }
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -&self.mantissa,
            exp2: self.exp2,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: Dyadic) -> Dyadic {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -&self
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self - other;
        d.mantissa.sign().cmp(&Sign::NoSign)
    }
}

/// Renders as an integer or as `p/2^k`.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp2 >= 0 {
            write!(f, "{}", &self.mantissa << (self.exp2 as usize))
        } else {
            write!(f, "{}/2^{}", self.mantissa, -self.exp2)
        }
    }
}

/// Accepts `n`, `p/2^k`, and `p/d` with `d` a power of two.
impl FromStr for Dyadic {
    type Err = FmmError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || FmmError::Parse(format!("invalid dyadic literal '{s}'"));
        let s = s.trim();
        match s.split_once('/') {
            None => Ok(Dyadic::from(BigInt::from_str(s).map_err(|_| bad())?)),
            Some((num, den)) => {
                let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
                let den = den.trim();
                let k = if let Some(k) = den.strip_prefix("2^") {
                    k.parse::<i64>().map_err(|_| bad())?
                } else {
                    let d = den.parse::<u64>().map_err(|_| bad())?;
                    if !d.is_power_of_two() {
                        return Err(bad());
                    }
                    d.trailing_zeros() as i64
                };
                Ok(Dyadic::normalize(num, -k))
            }
        }
    }
}
