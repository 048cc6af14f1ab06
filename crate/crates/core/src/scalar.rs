//! Scalar abstractions shared by every numeric path.
//!
//! [`Scalar`] covers the exact and the approximate field types (`f64`,
//! [`BigRational`], [`MpFloat`]); [`Real`] adds the transcendental functions
//! that only approximate types can provide.

mod mp;

pub use mp::MpFloat;

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// A field element usable by the polynomial and probability layers.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static
{
    fn from_bigint(n: &BigInt) -> Self;
    fn from_ratio(r: &BigRational) -> Self;
    fn to_f64(&self) -> f64;

    fn from_i64(n: i64) -> Self {
        Self::from_bigint(&BigInt::from(n))
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

/// An approximate real type with elementary functions.
pub trait Real: Scalar {
    /// Exact conversion for `MpFloat`; panics on non-finite input.
    fn from_f64(x: f64) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    /// Natural logarithm; the argument must be positive.
    fn ln(&self) -> Self;
    fn sin_cos(&self) -> (Self, Self);
    fn pi() -> Self;
    /// Unit roundoff of the type.
    fn epsilon() -> Self;
    /// Number of significant decimal digits carried.
    fn digits() -> u32;
}

impl Scalar for f64 {
    fn from_bigint(n: &BigInt) -> Self {
        n.to_f64().unwrap_or(if n.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        })
    }
    fn from_ratio(r: &BigRational) -> Self {
        ratio_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin_cos(&self) -> (Self, Self) {
        f64::sin_cos(*self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn epsilon() -> Self {
        f64::EPSILON / 2.0
    }
    fn digits() -> u32 {
        15
    }
}

impl Scalar for BigRational {
    fn from_bigint(n: &BigInt) -> Self {
        BigRational::from_integer(n.clone())
    }
    fn from_ratio(r: &BigRational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
}

/// Correctly scaled conversion that survives numerators and denominators
/// far outside the `f64` range.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let Some(x) = ToPrimitive::to_f64(r) {
        if x.is_finite() && x != 0.0 {
            return x;
        }
    }
    let n = r.numer().abs();
    let d = r.denom().abs();
    let shift = n.bits() as i64 - d.bits() as i64;
    let (n2, d2) = if shift > 0 {
        (n.clone(), d.clone() << (shift as u64))
    } else {
        (n.clone() << ((-shift) as u64), d.clone())
    };
    // n2/d2 lies in (1/2, 2); keep 64 quotient bits.
    let q = (n2 << 64u32) / d2;
    let m = q.to_f64().unwrap_or(0.0);
    let v = libm::ldexp(m, (shift - 64).clamp(-5000, 5000) as i32);
    if r.is_negative() {
        -v
    } else {
        v
    }
}

/// Exact conversion of a finite `f64` to a rational.
pub fn f64_to_ratio(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Parses `a/b`, decimal, or scientific notation into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a = parse_rational(a)?;
        let b = parse_rational(b)?;
        if b.is_zero() {
            return None;
        }
        return Some(a / b);
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let mut v = BigRational::from_integer(digits.parse::<BigInt>().ok()?);
    let e = exp - frac.len() as i64;
    if e.unsigned_abs() > 100_000 {
        return None;
    }
    let ten = BigRational::from_integer(BigInt::from(10));
    let p = num_traits::pow(ten, e.unsigned_abs() as usize);
    if e >= 0 {
        v *= p;
    } else {
        v /= p;
    }
    Some(if neg { -v } else { v })
}

/// `base^k` for any scalar.
pub fn powi<T: Scalar>(base: &T, k: usize) -> T {
    let mut acc = T::one();
    let mut b = base.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * b.clone();
        }
        k >>= 1;
        if k > 0 {
            b = b.clone() * b;
        }
    }
    acc
}

/// Modulus of a complex number over a [`Real`] type.
pub fn cabs<T: Real>(z: &num_complex::Complex<T>) -> T {
    (z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone()).sqrt()
}


#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn parses_rationals() {
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(parse_rational("1/2"), Some(half.clone()));
        assert_eq!(parse_rational("0.5"), Some(half.clone()));
        assert_eq!(parse_rational("5e-1"), Some(half.clone()));
        assert_eq!(parse_rational("-2.5E1"), Some(BigRational::from_integer((-25).into())));
        assert_eq!(parse_rational(".25"), Some(BigRational::new(1.into(), 4.into())));
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn huge_ratio_to_f64() {
        let big = BigInt::from(3) << 3000u32;
        let r = BigRational::new(big.clone(), big << 1u32);
        assert_eq!(ratio_to_f64(&r), 0.5);
        let tiny = BigRational::new(BigInt::one(), BigInt::one() << 1030u32);
        assert!(ratio_to_f64(&tiny) > 0.0 || ratio_to_f64(&tiny) == 0.0);
        let r = BigRational::new(BigInt::from(7) << 2000u32, BigInt::one() << 2000u32);
        assert_eq!(ratio_to_f64(&r), 7.0);
    }

    #[test]
    fn powi_matches_repeated_product() {
        assert_eq!(powi(&3.0f64, 5), 243.0);
        let r = BigRational::new(2.into(), 3.into());
        assert_eq!(powi(&r, 3), BigRational::new(8.into(), 27.into()));
        assert_eq!(powi(&r, 0), BigRational::one());
    }
}
