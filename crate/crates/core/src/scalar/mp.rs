//! Binary floating point with a compile-time mantissa width.
//!
//! A value is `man * 2^exp` with `|man|` holding exactly `BITS` bits (or zero).
//! Every arithmetic operation rounds to nearest, ties to even.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use super::{parse_rational, Real, Scalar};

#[derive(Clone)]
pub struct MpFloat<const BITS: u32> {
    man: BigInt,
    exp: i64,
}

fn round_shift_mag(mag: &BigUint, s: u64) -> BigUint {
    if s == 0 {
        return mag.clone();
    }
    let q = mag >> s;
    if !mag.bit(s - 1) {
        return q;
    }
    let below_half = mag.trailing_zeros().is_some_and(|tz| tz < s - 1);
    if below_half || q.bit(0) {
        q + 1u32
    } else {
        q
    }
}

fn round_shift(m: &BigInt, s: u64) -> BigInt {
    let r = round_shift_mag(m.magnitude(), s);
    BigInt::from_biguint(if m.is_negative() { Sign::Minus } else { Sign::Plus }, r)
}

/// Shift by a signed amount, rounding when bits are dropped.
fn shift_signed(m: &BigInt, by: i64) -> BigInt {
    if by >= 0 {
        m << (by as u64)
    } else {
        round_shift(m, (-by) as u64)
    }
}

impl<const BITS: u32> MpFloat<BITS> {
    fn from_parts(man: BigInt, exp: i64) -> Self {
        if man.is_zero() {
            return Self { man, exp: 0 };
        }
        let b = man.bits();
        let bits = BITS as u64;
        if b > bits {
            let s = b - bits;
            let mut m = round_shift(&man, s);
            let mut e = exp + s as i64;
            if m.bits() > bits {
                m >>= 1u32;
                e += 1;
            }
            Self { man: m, exp: e }
        } else {
            let s = bits - b;
            Self { man: man << s, exp: exp - s as i64 }
        }
    }

    pub fn zero_value() -> Self {
        Self { man: BigInt::zero(), exp: 0 }
    }

    pub fn is_negative(&self) -> bool {
        self.man.is_negative()
    }

    /// Binary exponent of the leading bit, `floor(log2 |x|)`; zero maps to `i64::MIN`.
    pub fn ilog2(&self) -> i64 {
        if self.man.is_zero() {
            i64::MIN
        } else {
            self.exp + BITS as i64 - 1
        }
    }

    /// Multiply by `2^k` exactly.
    pub fn ldexp(&self, k: i64) -> Self {
        if self.man.is_zero() {
            return self.clone();
        }
        Self { man: self.man.clone(), exp: self.exp + k }
    }

    /// Truncation toward zero.
    pub fn trunc_int(&self) -> BigInt {
        if self.exp >= 0 {
            &self.man << (self.exp as u64)
        } else {
            let mag = self.man.magnitude() >> ((-self.exp) as u64);
            BigInt::from_biguint(self.man.sign(), mag)
        }
    }

    /// Nearest integer, ties away from zero.
    pub fn round_int(&self) -> BigInt {
        let half = Self::from_parts(BigInt::one(), -1);
        let shifted = if self.is_negative() { self.clone() - half } else { self.clone() + half };
        shifted.trunc_int()
    }

    /// Exact value as a rational.
    pub fn to_ratio(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.man << (self.exp as u64))
        } else {
            BigRational::new(self.man.clone(), BigInt::one() << ((-self.exp) as u64))
        }
    }

    /// Value as a fixed-point integer scaled by `2^w`.
    fn to_fixed(&self, w: u64) -> BigInt {
        shift_signed(&self.man, self.exp + w as i64)
    }

    fn from_fixed(v: BigInt, w: u64) -> Self {
        Self::from_parts(v, -(w as i64))
    }

    fn work_bits() -> u64 {
        BITS as u64 + 64
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.man.is_zero() {
            return "0".to_string();
        }
        let digits = digits.max(1);
        let mag = self.to_ratio().abs();
        let approx = (self.man.magnitude().bits() as f64 + self.exp as f64) * std::f64::consts::LOG10_2;
        let mut k = approx.floor() as i64;
        let ten = BigInt::from(10);
        let lo = num_traits::pow(ten.clone(), digits - 1);
        let hi = &lo * &ten;
        let q = loop {
            let p = digits as i64 - 1 - k;
            let scale = BigRational::from_integer(num_traits::pow(ten.clone(), p.unsigned_abs() as usize));
            let scaled = if p >= 0 { &mag * scale } else { &mag / scale };
            let q = scaled.round().to_integer();
            if q >= hi {
                k += 1;
            } else if q < lo {
                k -= 1;
            } else {
                break q;
            }
        };
        let s = q.to_string();
        let sign = if self.is_negative() { "-" } else { "" };
        let (head, tail) = s.split_at(1);
        let tail = tail.trim_end_matches('0');
        if tail.is_empty() {
            format!("{sign}{head}e{k}")
        } else {
            format!("{sign}{head}.{tail}e{k}")
        }
    }
}

fn constant_cache() -> &'static Mutex<HashMap<(u8, u64), BigInt>> {
    static CACHE: OnceLock<Mutex<HashMap<(u8, u64), BigInt>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(tag: u8, w: u64, f: impl FnOnce(u64) -> BigInt) -> BigInt {
    if let Some(v) = constant_cache().lock().unwrap().get(&(tag, w)) {
        return v.clone();
    }
    let v = f(w);
    constant_cache().lock().unwrap().insert((tag, w), v.clone());
    v
}

/// `sum_k x^(2k+1)/(2k+1)` for `x = 1/n`, fixed point at `w` bits.
fn atan_like_inv(n: u64, w: u64, alternating: bool) -> BigInt {
    let one = BigInt::one() << w;
    let n = BigInt::from(n);
    let n2 = &n * &n;
    let mut pow = one / &n;
    let mut sum = pow.clone();
    let mut k = 1u64;
    loop {
        pow /= &n2;
        if pow.is_zero() {
            break;
        }
        let t = &pow / BigInt::from(2 * k + 1);
        if alternating && k % 2 == 1 {
            sum -= t;
        } else {
            sum += t;
        }
        k += 1;
    }
    sum
}

fn fixed_pi(w: u64) -> BigInt {
    cached(0, w, |w| {
        let g = w + 32;
        let v = atan_like_inv(5, g, true) * 16 - atan_like_inv(239, g, true) * 4;
        round_shift(&v, 32)
    })
}

fn fixed_ln2(w: u64) -> BigInt {
    cached(1, w, |w| {
        let g = w + 32;
        let v = atan_like_inv(3, g, false) * 2;
        round_shift(&v, 32)
    })
}

/// `exp(r)` for fixed-point `r` with `|r| < 1`.
fn fixed_exp_small(r: &BigInt, w: u64) -> BigInt {
    let one = BigInt::one() << w;
    let mut sum = one.clone();
    let mut term = one;
    let mut i = 1u64;
    loop {
        term = (&term * r) >> w;
        term /= BigInt::from(i);
        if term.is_zero() {
            break;
        }
        sum += &term;
        i += 1;
    }
    sum
}

/// `(sin r, cos r)` for fixed-point `|r| <= 1`.
fn fixed_sin_cos_small(r: &BigInt, w: u64) -> (BigInt, BigInt) {
    let one = BigInt::one() << w;
    let r2 = (r * r) >> w;
    let mut s = r.clone();
    let mut c = one.clone();
    let mut ts = r.clone();
    let mut tc = one;
    let mut k = 1u64;
    loop {
        ts = -((&ts * &r2) >> w) / BigInt::from((2 * k) * (2 * k + 1));
        tc = -((&tc * &r2) >> w) / BigInt::from((2 * k - 1) * (2 * k));
        if ts.is_zero() && tc.is_zero() {
            break;
        }
        s += &ts;
        c += &tc;
        k += 1;
    }
    (s, c)
}

impl<const BITS: u32> MpFloat<BITS> {
    fn exp_impl(&self) -> Self {
        if self.man.is_zero() {
            return Self::one();
        }
        let xf = self.to_f64();
        assert!(xf.abs() < 1e15, "MpFloat::exp argument out of range: {xf}");
        let n = (xf / std::f64::consts::LN_2).round() as i64;
        let k: u64 = 12;
        let w = Self::work_bits() + k + 16 + 64 - (n.unsigned_abs().leading_zeros() as u64);
        let x = self.to_fixed(w);
        let r = x - fixed_ln2(w) * BigInt::from(n);
        let mut s = fixed_exp_small(&(r >> k), w);
        for _ in 0..k {
            s = (&s * &s) >> w;
        }
        Self::from_parts(s, n - w as i64)
    }

    fn ln_impl(&self) -> Self {
        assert!(!self.is_negative() && !self.man.is_zero(), "MpFloat::ln of non-positive value");
        let w = Self::work_bits() + 16;
        // x = f * 2^e with f in [1/sqrt2, sqrt2).
        let mut e = self.exp + BITS as i64;
        let mut f = self.man.clone() << (w - BITS as u64); // f / 2^w in [1/2, 1)
        let inv_sqrt2 = BigInt::from(0xB504_F333_F9DE_6484u64) << (w - 64);
        if f < inv_sqrt2 {
            f <<= 1u32;
            e -= 1;
        }
        let one = BigInt::one() << w;
        let y = ((&f - &one) << w) / (&f + &one);
        let y2 = (&y * &y) >> w;
        let mut pow = y.clone();
        let mut sum = y;
        let mut k = 1u64;
        loop {
            pow = (&pow * &y2) >> w;
            let t = &pow / BigInt::from(2 * k + 1);
            if t.is_zero() {
                break;
            }
            sum += t;
            k += 1;
        }
        let total = sum * 2 + fixed_ln2(w) * BigInt::from(e);
        Self::from_fixed(total, w)
    }

    fn sin_cos_impl(&self) -> (Self, Self) {
        if self.man.is_zero() {
            return (Self::zero(), Self::one());
        }
        let halvings: u64 = 8;
        let mag_bits = (self.ilog2().max(0) as u64) + 2;
        let w = Self::work_bits() + 2 * halvings + 16 + mag_bits;
        let x = self.to_fixed(w);
        let two_pi = fixed_pi(w) << 1u32;
        let (q, _) = (&x + (&two_pi >> 1u32)).div_mod_floor(&two_pi);
        let r = x - q * &two_pi;
        let (mut s, mut c) = fixed_sin_cos_small(&(r >> halvings), w);
        for _ in 0..halvings {
            let s2 = (&s * &c) >> (w - 1);
            let c2 = ((&c * &c) - (&s * &s)) >> w;
            s = s2;
            c = c2;
        }
        (Self::from_fixed(s, w), Self::from_fixed(c, w))
    }

    fn sqrt_impl(&self) -> Self {
        assert!(!self.is_negative(), "MpFloat::sqrt of negative value");
        if self.man.is_zero() {
            return self.clone();
        }
        let mut k = BITS as i64 + 4;
        if (self.exp - k).rem_euclid(2) != 0 {
            k += 1;
        }
        let n = self.man.magnitude() << (k as u64);
        let s = n.sqrt();
        let exact = &s * &s == n;
        let mut m = s << 1u32;
        if !exact {
            m += 1u32;
        }
        Self::from_parts(BigInt::from(m), (self.exp - k) / 2 - 1)
    }
}

impl<const BITS: u32> PartialEq for MpFloat<BITS> {
    fn eq(&self, other: &Self) -> bool {
        self.man == other.man && self.exp == other.exp
    }
}

impl<const BITS: u32> PartialOrd for MpFloat<BITS> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let sa = self.man.sign();
        let sb = other.man.sign();
        let rank = |s: Sign| match s {
            Sign::Minus => 0,
            Sign::NoSign => 1,
            Sign::Plus => 2,
        };
        if sa != sb {
            return Some(rank(sa).cmp(&rank(sb)));
        }
        let mag = self.exp.cmp(&other.exp).then_with(|| self.man.magnitude().cmp(other.man.magnitude()));
        Some(if sa == Sign::Minus { mag.reverse() } else { mag })
    }
}

impl<const BITS: u32> Add for MpFloat<BITS> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if rhs.man.is_zero() {
            return self;
        }
        if self.man.is_zero() {
            return rhs;
        }
        let (hi, lo) = if self.exp >= rhs.exp { (self, rhs) } else { (rhs, self) };
        let d = (hi.exp - lo.exp) as u64;
        if d > BITS as u64 + 4 {
            return hi;
        }
        Self::from_parts((hi.man << d) + lo.man, lo.exp)
    }
}

impl<const BITS: u32> Sub for MpFloat<BITS> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<const BITS: u32> Mul for MpFloat<BITS> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::from_parts(self.man * rhs.man, self.exp + rhs.exp)
    }
}

impl<const BITS: u32> Div for MpFloat<BITS> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.man.is_zero(), "MpFloat division by zero");
        if self.man.is_zero() {
            return self;
        }
        let shift = BITS as u64 + 3;
        let num = self.man.magnitude() << shift;
        let (q, r) = num.div_rem(rhs.man.magnitude());
        let mut q = q << 1u32;
        if !r.is_zero() {
            q += 1u32;
        }
        let sign = if self.man.sign() == rhs.man.sign() { Sign::Plus } else { Sign::Minus };
        Self::from_parts(BigInt::from_biguint(sign, q), self.exp - rhs.exp - shift as i64 - 1)
    }
}

impl<const BITS: u32> Rem for MpFloat<BITS> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        let q = (self.clone() / rhs.clone()).trunc_int();
        self - rhs * Self::from_parts(q, 0)
    }
}

impl<const BITS: u32> Neg for MpFloat<BITS> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { man: -self.man, exp: self.exp }
    }
}

impl<const BITS: u32> Zero for MpFloat<BITS> {
    fn zero() -> Self {
        Self::zero_value()
    }
    fn is_zero(&self) -> bool {
        self.man.is_zero()
    }
}

impl<const BITS: u32> One for MpFloat<BITS> {
    fn one() -> Self {
        Self::from_parts(BigInt::one(), 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseMpError;

impl fmt::Display for ParseMpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid decimal literal")
    }
}

impl std::error::Error for ParseMpError {}

impl<const BITS: u32> Num for MpFloat<BITS> {
    type FromStrRadixErr = ParseMpError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, ParseMpError> {
        if radix != 10 {
            return Err(ParseMpError);
        }
        parse_rational(s).map(|r| Self::from_ratio(&r)).ok_or(ParseMpError)
    }
}

impl<const BITS: u32> std::str::FromStr for MpFloat<BITS> {
    type Err = ParseMpError;
    fn from_str(s: &str) -> Result<Self, ParseMpError> {
        Self::from_str_radix(s, 10)
    }
}

impl<const BITS: u32> fmt::Display for MpFloat<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(Self::digits() as usize))
    }
}

impl<const BITS: u32> fmt::Debug for MpFloat<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<const BITS: u32> Scalar for MpFloat<BITS> {
    fn from_bigint(n: &BigInt) -> Self {
        Self::from_parts(n.clone(), 0)
    }

    fn from_ratio(r: &BigRational) -> Self {
        Self::from_bigint(r.numer()) / Self::from_bigint(r.denom())
    }

    fn to_f64(&self) -> f64 {
        if self.man.is_zero() {
            return 0.0;
        }
        let keep = 64u64.min(BITS as u64);
        let top = round_shift(&self.man, BITS as u64 - keep);
        let m = top.to_f64().unwrap_or(0.0);
        let e = self.exp + (BITS as u64 - keep) as i64;
        libm::ldexp(m, e.clamp(-5000, 5000) as i32)
    }

    fn abs_val(&self) -> Self {
        Self { man: self.man.abs(), exp: self.exp }
    }
}

impl<const BITS: u32> Real for MpFloat<BITS> {
    fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "MpFloat::from_f64 of non-finite value {x}");
        if x == 0.0 {
            return Self::zero();
        }
        let (m, e, s) = num_traits::float::FloatCore::integer_decode(x);
        let m = BigInt::from(m) * BigInt::from(s);
        Self::from_parts(m, e as i64)
    }
    fn sqrt(&self) -> Self {
        self.sqrt_impl()
    }
    fn exp(&self) -> Self {
        self.exp_impl()
    }
    fn ln(&self) -> Self {
        self.ln_impl()
    }
    fn sin_cos(&self) -> (Self, Self) {
        self.sin_cos_impl()
    }
    fn pi() -> Self {
        let w = Self::work_bits();
        Self::from_fixed(fixed_pi(w), w)
    }
    fn epsilon() -> Self {
        Self::from_parts(BigInt::one(), -(BITS as i64))
    }
    fn digits() -> u32 {
        ((BITS - 1) as f64 * std::f64::consts::LOG10_2).floor() as u32
    }
}
