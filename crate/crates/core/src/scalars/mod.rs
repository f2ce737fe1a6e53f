//! Computation fields.
//!
//! Everything downstream of this module is written against [`Scalar`], so the
//! same code runs over exact rationals ([`ExactScalar`]), rational functions
//! of a single regulator ε ([`RegulatedScalar`]) and high-precision complex
//! floats ([`FloatScalar`]).

mod float;
mod regulated;
mod sample;
mod series;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub use float::{BigFloat, FloatScalar, MIN_DIGITS};
pub use regulated::{reg_eval_at_zero, Poly, RegulatedScalar, DEFAULT_DEGREE_CAP};
pub(crate) use sample::degenerate_q;
pub use sample::{
    sample_generic_config, sample_generic_config_with_q, sample_twist, GenericConfig, SampleConfig, SampleCounts,
};
pub use series::{SeriesScalar, DEFAULT_SERIES_TERMS};

/// Arbitrary-precision rational number, always stored in lowest terms.
pub type ExactScalar = BigRational;

/// A commutative field element.
///
/// Arithmetic is by reference and infallible except for inversion. Values
/// are immutable once built, so every implementor is `Send + Sync`.
pub trait Scalar: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_exact(x: &ExactScalar) -> Self;
    fn is_zero(&self) -> bool;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;

    /// Multiplicative inverse; fails on zero.
    fn try_inv(&self) -> Result<Self>;

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.mul(&rhs.try_inv()?))
    }

    /// Whether two values are to be treated as the same spectral point.
    /// Exact fields compare syntactically; the float field uses a tolerance.
    fn coincides(&self, other: &Self) -> bool {
        self == other
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn powi(&self, exp: i32) -> Result<Self> {
        let base = if exp < 0 { self.try_inv()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..exp.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }
}

/// A field of functions of the regulator ε that can be evaluated at ε = 0.
pub trait Regulator: Scalar {
    /// The value `x·(1 + multiplier·ε)`.
    fn lift(x: &ExactScalar, multiplier: &ExactScalar) -> Self;

    /// A hint for truncating fields: keep about `terms` significant terms in
    /// values derived from this one. Exact representations ignore it.
    fn with_precision(self, _terms: usize) -> Self {
        self
    }

    /// Limit at ε = 0; `PoleAtZero` for a genuine pole.
    fn eval_at_zero(&self) -> Result<ExactScalar>;
}

/// Product of an iterator of scalars; the empty product is one.
pub fn product<'a, F: Scalar>(items: impl IntoIterator<Item = &'a F>) -> F {
    items.into_iter().fold(F::one(), |acc, x| acc.mul(x))
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_exact(x: &ExactScalar) -> Self {
        x.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn try_inv(&self) -> Result<Self> {
        if Zero::is_zero(self) {
            Err(Error::PoleEncountered("inverse of zero".into()))
        } else {
            Ok(self.recip())
        }
    }
}

/// Parses `p/r`, `p` or a decimal-free signed integer into an exact rational.
pub fn parse_exact(text: &str) -> Result<ExactScalar> {
    let text = text.trim();
    let bad = || Error::Config(format!("not an exact rational: {text:?}"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Canonical `p/r` rendering used in reports (`p` alone for integers).
pub fn format_exact(x: &ExactScalar) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Absolute value of an exact rational, convenience for magnitude checks.
pub fn exact_abs(x: &ExactScalar) -> ExactScalar {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> ExactScalar {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parse_and_format_round_trip() {
        let x = parse_exact("-6/4").unwrap();
        assert_eq!(x, rat(-3, 2));
        assert_eq!(format_exact(&x), "-3/2");
        assert_eq!(format_exact(&parse_exact("7").unwrap()), "7");
        assert!(parse_exact("1/0").is_err());
        assert!(parse_exact("abc").is_err());
    }

    #[test]
    fn inverse_of_zero_is_a_pole() {
        assert!(matches!(<ExactScalar as Scalar>::zero().try_inv(), Err(Error::PoleEncountered(_))));
    }

    #[test]
    fn powi_handles_negative_exponents() {
        let two = rat(2, 1);
        assert_eq!(two.powi(-3).unwrap(), rat(1, 8));
        assert_eq!(two.powi(0).unwrap(), rat(1, 1));
    }

    fn small_rat() -> impl Strategy<Value = ExactScalar> {
        (-50i64..50, 1i64..50).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #[test]
        fn exact_field_axioms(a in small_rat(), b in small_rat(), c in small_rat()) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            if !Scalar::is_zero(&a) {
                prop_assert!(Scalar::is_one(&a.mul(&a.try_inv().unwrap())));
            }
        }
    }
}
