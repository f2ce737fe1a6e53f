//! Truncated Laurent series in ε with exact coefficients and tracked precision.
//!
//! This is the workhorse regulated field for large partition sums: unlike
//! [`RegulatedScalar`](super::RegulatedScalar) it never runs polynomial gcds,
//! and every value carries the exponent below which its coefficients are
//! known exactly, so truncation can never produce a wrong limit — only a
//! reported loss of precision.

use std::fmt;

use num_rational::BigRational;

use super::{ExactScalar, Regulator, Scalar};
use crate::error::{Error, Result};

/// Default number of significant terms kept after a lossy operation.
pub const DEFAULT_SERIES_TERMS: usize = 12;

/// Precision marker for values known exactly.
const EXACT: i32 = i32::MAX / 4;

/// `ε^val · Σ coeffs[k] ε^k + O(ε^prec)`.
///
/// Invariants: `coeffs` is empty (the value is zero to the known precision)
/// or starts with a nonzero coefficient; `val + coeffs.len() <= prec`.
#[derive(Clone, PartialEq, Eq)]
pub struct SeriesScalar {
    val: i32,
    coeffs: Vec<BigRational>,
    prec: i32,
    terms: usize,
}

impl fmt::Debug for SeriesScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| format!("{c}·ε^{}", self.val + k as i32))
            .collect();
        let body = if body.is_empty() { "0".to_string() } else { body.join(" + ") };
        if self.prec >= EXACT {
            write!(f, "{body}")
        } else {
            write!(f, "{body} + O(ε^{})", self.prec)
        }
    }
}

impl SeriesScalar {
    fn build(val: i32, mut coeffs: Vec<BigRational>, prec: i32, terms: usize) -> Self {
        let lead = coeffs.iter().position(|c| !c.is_zero());
        let (val, coeffs) = match lead {
            None => (0, Vec::new()),
            Some(k) => {
                coeffs.drain(..k);
                let val = val + k as i32;
                let keep = ((prec - val).max(0) as usize).min(coeffs.len());
                coeffs.truncate(keep);
                while coeffs.last().is_some_and(Scalar::is_zero) {
                    coeffs.pop();
                }
                (val, coeffs)
            }
        };
        if coeffs.is_empty() {
            return SeriesScalar { val: 0, coeffs, prec, terms };
        }
        SeriesScalar { val, coeffs, prec, terms }
    }

    fn constant(c: BigRational) -> Self {
        Self::build(0, vec![c], EXACT, DEFAULT_SERIES_TERMS)
    }

    /// The regulator ε itself.
    pub fn epsilon() -> Self {
        Self::build(1, vec![BigRational::one()], EXACT, DEFAULT_SERIES_TERMS)
    }

    /// Sets how many significant terms survive lossy operations.
    pub fn with_terms(mut self, terms: usize) -> Self {
        self.terms = terms.max(1);
        self
    }

    /// Exponent of the leading term (0 for zero).
    pub fn valuation(&self) -> i32 {
        self.val
    }

    /// Exponent up to which coefficients are known; `None` if exact.
    pub fn precision(&self) -> Option<i32> {
        (self.prec < EXACT).then_some(self.prec)
    }

    fn relative_precision(&self) -> i32 {
        if self.prec >= EXACT {
            EXACT
        } else {
            self.prec - self.val
        }
    }

    fn coeff(&self, exp: i32) -> BigRational {
        let k = exp - self.val;
        if k < 0 {
            return BigRational::zero();
        }
        self.coeffs.get(k as usize).cloned().unwrap_or_else(<BigRational as Scalar>::zero)
    }

    /// Inverse of a series with nonzero constant term `coeffs[0]`, to `len` terms.
    fn inverse_unit(coeffs: &[BigRational], len: usize) -> Vec<BigRational> {
        let c0_inv = coeffs[0].recip();
        let mut out: Vec<BigRational> = Vec::with_capacity(len);
        out.push(c0_inv.clone());
        for k in 1..len {
            let mut acc = BigRational::zero();
            for j in 1..=k.min(coeffs.len() - 1) {
                acc += &coeffs[j] * &out[k - j];
            }
            out.push(-acc * &c0_inv);
        }
        out
    }
}

impl Scalar for SeriesScalar {
    fn zero() -> Self {
        Self::build(0, Vec::new(), EXACT, DEFAULT_SERIES_TERMS)
    }
    fn one() -> Self {
        Self::constant(BigRational::one())
    }
    fn from_i64(n: i64) -> Self {
        Self::constant(BigRational::from_integer(n.into()))
    }
    fn from_exact(x: &ExactScalar) -> Self {
        Self::constant(x.clone())
    }
    /// True only for an exact zero: a value that merely vanishes to the
    /// known order must not be dropped from a sum.
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.prec >= EXACT
    }

    fn add(&self, rhs: &Self) -> Self {
        let terms = self.terms.min(rhs.terms);
        if rhs.coeffs.is_empty() && rhs.prec >= self.prec {
            return self.clone();
        }
        if self.coeffs.is_empty() && self.prec >= rhs.prec {
            return rhs.clone();
        }
        let prec = self.prec.min(rhs.prec);
        let lo = match (self.coeffs.is_empty(), rhs.coeffs.is_empty()) {
            (true, _) => rhs.val,
            (_, true) => self.val,
            _ => self.val.min(rhs.val),
        };
        let hi = (self.val + self.coeffs.len() as i32).max(rhs.val + rhs.coeffs.len() as i32).min(prec);
        let coeffs = (lo..hi.max(lo)).map(|e| self.coeff(e) + rhs.coeff(e)).collect();
        Self::build(lo, coeffs, prec, terms)
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    fn mul(&self, rhs: &Self) -> Self {
        let terms = self.terms.min(rhs.terms);
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            // A product with an inexact zero is zero to the precision that
            // the other factor's leading order allows.
            let prec = match (self.coeffs.is_empty(), rhs.coeffs.is_empty()) {
                (true, true) => self.prec.saturating_add(rhs.prec).min(EXACT),
                (true, false) => self.prec.saturating_add(rhs.val).min(EXACT),
                _ => rhs.prec.saturating_add(self.val).min(EXACT),
            };
            return Self::build(0, Vec::new(), prec, terms);
        }
        let val = self.val + rhs.val;
        let rel = self.relative_precision().min(rhs.relative_precision());
        let natural = self.coeffs.len() + rhs.coeffs.len() - 1;
        let (len, prec) = if rel >= EXACT && natural <= terms {
            (natural, EXACT)
        } else {
            let len = (rel.max(0) as usize).min(terms);
            (len, val + len as i32)
        };
        let mut out = vec![BigRational::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            for (j, b) in rhs.coeffs.iter().enumerate().take(len - i) {
                out[i + j] += a * b;
            }
        }
        Self::build(val, out, prec, terms)
    }

    fn neg(&self) -> Self {
        SeriesScalar { coeffs: self.coeffs.iter().map(|c| -c).collect(), ..self.clone() }
    }

    fn try_inv(&self) -> Result<Self> {
        if self.coeffs.is_empty() {
            return Err(if self.prec >= EXACT {
                Error::PoleEncountered("inverse of zero series".into())
            } else {
                Error::PrecisionExhausted(format!("inverse of a series that vanishes to O(ε^{})", self.prec))
            });
        }
        let val = -self.val;
        if self.coeffs.len() == 1 && self.prec >= EXACT {
            return Ok(Self::build(val, vec![self.coeffs[0].recip()], EXACT, self.terms));
        }
        let len = (self.relative_precision().max(1) as usize).min(self.terms);
        let out = Self::inverse_unit(&self.coeffs, len);
        Ok(Self::build(val, out, val + len as i32, self.terms))
    }

    fn coincides(&self, other: &Self) -> bool {
        self.sub(other).coeffs.is_empty()
    }
}

impl Regulator for SeriesScalar {
    fn lift(x: &ExactScalar, multiplier: &ExactScalar) -> Self {
        Self::build(0, vec![x.clone(), x * multiplier], EXACT, DEFAULT_SERIES_TERMS)
    }

    fn with_precision(self, terms: usize) -> Self {
        self.with_terms(terms)
    }

    fn eval_at_zero(&self) -> Result<ExactScalar> {
        if self.coeffs.is_empty() {
            return if self.prec > 0 {
                Ok(BigRational::zero())
            } else {
                Err(Error::PrecisionExhausted(format!("value known only to O(ε^{})", self.prec)))
            };
        }
        match self.val {
            v if v < 0 => Err(Error::PoleAtZero),
            0 => Ok(self.coeffs[0].clone()),
            _ => Ok(BigRational::zero()),
        }
    }
}
