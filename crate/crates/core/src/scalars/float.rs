//! Complex floating point with configurable decimal precision, built on
//! arbitrary-size integer mantissas.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{ExactScalar, Scalar};
use crate::error::{Error, Result};

/// Lowest precision accepted anywhere, in decimal digits.
pub const MIN_DIGITS: u32 = 30;

const BITS_PER_DIGIT: f64 = std::f64::consts::LOG2_10;
const GUARD_BITS: u64 = 8;

pub(crate) fn digits_to_bits(digits: u32) -> u64 {
    (f64::from(digits.max(MIN_DIGITS)) * BITS_PER_DIGIT).ceil() as u64 + GUARD_BITS
}

/// Real binary float `mantissa · 2^exp`, rounded to `bits` significant bits.
#[derive(Clone, PartialEq, Eq)]
pub struct BigFloat {
    mantissa: BigInt,
    exp: i64,
    bits: u64,
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

impl BigFloat {
    pub fn zero(bits: u64) -> Self {
        BigFloat { mantissa: BigInt::zero(), exp: 0, bits }
    }

    fn normalized(mut mantissa: BigInt, mut exp: i64, bits: u64) -> Self {
        if mantissa.is_zero() {
            return Self::zero(bits);
        }
        let len = mantissa.bits();
        if len > bits {
            let shift = len - bits;
            // Round to nearest, ties away from zero.
            let half = BigInt::from(1u8) << (shift - 1);
            mantissa = if mantissa.is_negative() { -((-mantissa + half) >> shift) } else { (mantissa + half) >> shift };
            exp += shift as i64;
        }
        // Strip trailing zero bits so equal values compare equal.
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            mantissa >>= tz;
            exp += tz as i64;
        }
        BigFloat { mantissa, exp, bits }
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt, bits: u64) -> Self {
        if num.is_zero() {
            return Self::zero(bits);
        }
        let shift = (bits + 2 + den.bits()).saturating_sub(num.bits()) as i64;
        let (q, _) = (num << shift as usize).div_rem(den);
        Self::normalized(q, -shift, bits)
    }

    pub fn from_exact(x: &BigRational, bits: u64) -> Self {
        Self::from_ratio(x.numer(), x.denom(), bits)
    }

    pub fn from_f64(x: f64, bits: u64) -> Self {
        if x == 0.0 || !x.is_finite() {
            return Self::zero(bits);
        }
        let raw = x.to_bits();
        let sign = if raw >> 63 == 0 { 1i64 } else { -1 };
        let exponent = ((raw >> 52) & 0x7ff) as i64;
        let fraction = (raw & ((1u64 << 52) - 1)) as i64;
        let (mantissa, exp) =
            if exponent == 0 { (fraction, -1074) } else { (fraction | (1i64 << 52), exponent - 1075) };
        Self::normalized(BigInt::from(sign * mantissa), exp, bits)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Exponent of the highest set bit; very negative for zero.
    fn magnitude(&self) -> i64 {
        if self.is_zero() {
            i64::MIN / 4
        } else {
            self.exp + self.mantissa.bits() as i64
        }
    }

    pub fn neg(&self) -> Self {
        BigFloat { mantissa: -&self.mantissa, ..self.clone() }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let bits = self.bits.max(rhs.bits);
        if rhs.is_zero() {
            return BigFloat { bits, ..self.clone() };
        }
        if self.is_zero() {
            return BigFloat { bits, ..rhs.clone() };
        }
        let gap = self.magnitude() - rhs.magnitude();
        if gap > bits as i64 + 2 {
            return BigFloat { bits, ..self.clone() };
        }
        if -gap > bits as i64 + 2 {
            return BigFloat { bits, ..rhs.clone() };
        }
        let exp = self.exp.min(rhs.exp);
        let a = &self.mantissa << (self.exp - exp) as usize;
        let b = &rhs.mantissa << (rhs.exp - exp) as usize;
        Self::normalized(a + b, exp, bits)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let bits = self.bits.max(rhs.bits);
        Self::normalized(&self.mantissa * &rhs.mantissa, self.exp + rhs.exp, bits)
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::PoleEncountered("float division by zero".into()));
        }
        let bits = self.bits.max(rhs.bits);
        if self.is_zero() {
            return Ok(Self::zero(bits));
        }
        let shift = (bits + 2 + rhs.mantissa.bits()).saturating_sub(self.mantissa.bits());
        let q = (&self.mantissa << shift as usize) / &rhs.mantissa;
        Ok(Self::normalized(q, self.exp - shift as i64 - rhs.exp, bits))
    }

    /// Nearest `f64`, saturating to 0 or ±∞ outside its range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let len = self.mantissa.bits();
        let (top, exp) = if len > 60 {
            let shift = len - 60;
            ((&self.mantissa >> shift).to_i64().unwrap_or(0), self.exp + shift as i64)
        } else {
            (self.mantissa.to_i64().unwrap_or(0), self.exp)
        };
        let exp = exp.clamp(-2200, 2200) as i32;
        // Split the scaling so intermediate powers stay finite.
        let half = exp / 2;
        top as f64 * 2f64.powi(half) * 2f64.powi(exp - half)
    }

    /// Exact rational value of this float.
    pub fn to_exact(&self) -> BigRational {
        let one = BigInt::from(1u8);
        if self.exp >= 0 {
            BigRational::from_integer(&self.mantissa << self.exp as usize)
        } else {
            BigRational::new(self.mantissa.clone(), one << (-self.exp) as usize)
        }
    }

    pub fn cmp_abs(&self, rhs: &Self) -> Ordering {
        self.abs().sub(&rhs.abs()).mantissa.sign().cmp(&Sign::NoSign)
    }

    pub fn abs(&self) -> Self {
        BigFloat { mantissa: self.mantissa.abs(), ..self.clone() }
    }

    /// Decimal scientific rendering with `digits` significant digits.
    pub fn to_sci_string(&self, digits: usize) -> String {
        let x = self.to_exact();
        if Zero::is_zero(&x) {
            return "0".into();
        }
        let neg = x.is_negative();
        let x = x.abs();
        let ten = BigRational::from_integer(10.into());
        let mut e10 = (self.to_f64().abs().log10().floor() as i64).clamp(-100_000, 100_000);
        if !self.to_f64().is_normal() {
            e10 = (self.magnitude() as f64 * std::f64::consts::LOG10_2).floor() as i64;
        }
        let scale = |k: i64| -> BigRational {
            if k >= 0 {
                num_traits::pow(ten.clone(), k as usize)
            } else {
                num_traits::pow(ten.clone(), (-k) as usize).recip()
            }
        };
        let mut m = &x * scale(digits as i64 - 1 - e10);
        let upper = num_traits::pow(ten.clone(), digits);
        while m >= upper {
            m /= &ten;
            e10 += 1;
        }
        while m < num_traits::pow(ten.clone(), digits - 1) {
            m *= &ten;
            e10 -= 1;
        }
        let rounded = (m + BigRational::new(1.into(), 2.into())).floor().to_integer().to_string();
        let (head, tail) = rounded.split_at(1);
        format!("{}{}.{}e{}", if neg { "-" } else { "" }, head, tail, e10)
    }
}

/// Complex number with real and imaginary [`BigFloat`] parts.
///
/// Values created from exact rationals remember that rational, so combining
/// them with a higher-precision operand re-materializes them at the higher
/// precision instead of silently dragging it down.
#[derive(Clone)]
pub struct FloatScalar {
    re: BigFloat,
    im: BigFloat,
    exact: Option<Arc<BigRational>>,
}

impl PartialEq for FloatScalar {
    fn eq(&self, other: &Self) -> bool {
        self.re.mantissa == other.re.mantissa
            && self.re.exp == other.re.exp
            && self.im.mantissa == other.im.mantissa
            && self.im.exp == other.im.exp
    }
}

impl fmt::Debug for FloatScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:e} {:+e}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl FloatScalar {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        let bits = re.bits.max(im.bits);
        FloatScalar { re: BigFloat { bits, ..re }, im: BigFloat { bits, ..im }, exact: None }
    }

    pub fn from_exact_digits(x: &ExactScalar, digits: u32) -> Self {
        let bits = digits_to_bits(digits);
        FloatScalar { re: BigFloat::from_exact(x, bits), im: BigFloat::zero(bits), exact: Some(Arc::new(x.clone())) }
    }

    pub fn from_f64_digits(re: f64, im: f64, digits: u32) -> Self {
        let bits = digits_to_bits(digits);
        FloatScalar::new(BigFloat::from_f64(re, bits), BigFloat::from_f64(im, bits))
    }

    pub fn re(&self) -> &BigFloat {
        &self.re
    }

    pub fn im(&self) -> &BigFloat {
        &self.im
    }

    pub fn bits(&self) -> u64 {
        self.re.bits
    }

    /// Decimal precision carried by this value.
    pub fn digits(&self) -> u32 {
        ((self.bits() - GUARD_BITS) as f64 / BITS_PER_DIGIT).floor() as u32
    }

    pub fn conj(&self) -> Self {
        FloatScalar { re: self.re.clone(), im: self.im.neg(), exact: None }
    }

    /// |z| as an `f64` (enough range for residual reporting).
    pub fn abs_f64(&self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }

    /// |re| + |im| without leaving the high-precision domain, as `f64`.
    pub fn l1_f64(&self) -> f64 {
        self.re.abs().add(&self.im.abs()).to_f64()
    }

    fn at_bits(&self, bits: u64) -> std::borrow::Cow<'_, Self> {
        match &self.exact {
            Some(x) if self.bits() < bits => std::borrow::Cow::Owned(FloatScalar {
                re: BigFloat::from_exact(x, bits),
                im: BigFloat::zero(bits),
                exact: Some(x.clone()),
            }),
            _ => std::borrow::Cow::Borrowed(self),
        }
    }

    fn aligned<'a>(&'a self, rhs: &'a Self) -> (std::borrow::Cow<'a, Self>, std::borrow::Cow<'a, Self>) {
        let bits = self.bits().max(rhs.bits());
        (self.at_bits(bits), rhs.at_bits(bits))
    }
}

impl Scalar for FloatScalar {
    fn zero() -> Self {
        Self::from_exact_digits(&<BigRational as Zero>::zero(), MIN_DIGITS)
    }
    fn one() -> Self {
        Self::from_i64(1)
    }
    fn from_i64(n: i64) -> Self {
        Self::from_exact_digits(&BigRational::from_integer(n.into()), MIN_DIGITS)
    }
    fn from_exact(x: &ExactScalar) -> Self {
        Self::from_exact_digits(x, MIN_DIGITS)
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn add(&self, rhs: &Self) -> Self {
        let (a, b) = self.aligned(rhs);
        FloatScalar { re: a.re.add(&b.re), im: a.im.add(&b.im), exact: None }
    }

    fn sub(&self, rhs: &Self) -> Self {
        let (a, b) = self.aligned(rhs);
        FloatScalar { re: a.re.sub(&b.re), im: a.im.sub(&b.im), exact: None }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = self.aligned(rhs);
        if a.im.is_zero() && b.im.is_zero() {
            let bits = a.bits();
            return FloatScalar { re: a.re.mul(&b.re), im: BigFloat::zero(bits), exact: None };
        }
        FloatScalar {
            re: a.re.mul(&b.re).sub(&a.im.mul(&b.im)),
            im: a.re.mul(&b.im).add(&a.im.mul(&b.re)),
            exact: None,
        }
    }

    fn neg(&self) -> Self {
        FloatScalar { re: self.re.neg(), im: self.im.neg(), exact: self.exact.as_ref().map(|x| Arc::new(-&**x)) }
    }

    fn try_inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::PoleEncountered("inverse of zero float".into()));
        }
        if self.im.is_zero() {
            let one = BigFloat::normalized(BigInt::from(1u8), 0, self.bits());
            return Ok(FloatScalar { re: one.div(&self.re)?, im: self.im.clone(), exact: None });
        }
        let norm = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        Ok(FloatScalar { re: self.re.div(&norm)?, im: self.im.neg().div(&norm)?, exact: None })
    }

    fn coincides(&self, other: &Self) -> bool {
        let scale = self.abs_f64().max(other.abs_f64()).max(1.0);
        let tol = 10f64.powi(5 - self.digits().min(other.digits()) as i32);
        self.sub(other).abs_f64() <= tol * scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fl(n: i64, d: i64, digits: u32) -> FloatScalar {
        FloatScalar::from_exact_digits(&BigRational::new(n.into(), d.into()), digits)
    }

    #[test]
    fn thirds_round_trip_at_high_precision() {
        let x = fl(1, 3, 60);
        let back = x.mul(&FloatScalar::from_i64(3)).sub(&FloatScalar::one());
        assert!(back.abs_f64() < 1e-58, "{:?}", back);
    }

    #[test]
    fn low_precision_constants_do_not_downgrade() {
        let third = FloatScalar::from_exact(&BigRational::new(1.into(), 3.into()));
        let hi = fl(3, 1, 80);
        let err = third.mul(&hi).sub(&FloatScalar::one());
        assert!(err.abs_f64() < 1e-78, "{:?}", err);
        assert_eq!(third.mul(&hi).digits(), 80);
    }

    #[test]
    fn complex_inverse() {
        let z = FloatScalar::new(BigFloat::from_f64(3.0, 200), BigFloat::from_f64(4.0, 200));
        let w = z.try_inv().unwrap();
        assert!((w.re().to_f64() - 0.12).abs() < 1e-15);
        assert!((w.im().to_f64() + 0.16).abs() < 1e-15);
        assert!(z.mul(&w).sub(&FloatScalar::one()).abs_f64() < 1e-55);
    }

    #[test]
    fn precision_floor_is_enforced() {
        assert!(fl(1, 7, 5).digits() >= MIN_DIGITS);
    }

    #[test]
    fn scientific_rendering() {
        let x = FloatScalar::from_exact_digits(&BigRational::new((-22).into(), 7.into()), 40);
        assert_eq!(x.re().to_sci_string(8), "-3.1428571e0");
        assert_eq!(BigFloat::from_f64(0.00125, 100).to_sci_string(3), "1.25e-3");
    }

    #[test]
    fn tiny_values_survive_f64_conversion() {
        let tiny = fl(1, 1, 60).mul(&FloatScalar::from_f64_digits(1e-45, 0.0, 60));
        assert!((tiny.abs_f64() / 1e-45 - 1.0).abs() < 1e-12);
    }
}
