//! Rational functions of a single regulator ε with exact coefficients.

use std::fmt;

use num_rational::BigRational;

use super::{ExactScalar, Regulator, Scalar};
use crate::error::{Error, Result};

/// Default bound on numerator and denominator degree.
pub const DEFAULT_DEGREE_CAP: usize = 64;

/// Dense univariate polynomial, coefficients stored low → high with no
/// trailing zeros. The zero polynomial has no coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly(Vec<BigRational>);

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}·ε"),
                _ => format!("{c}·ε^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn constant(c: BigRational) -> Self {
        Poly::new(vec![c])
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn one() -> Self {
        Poly(vec![BigRational::one()])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.0.len() <= 1
    }

    fn lead(&self) -> &BigRational {
        self.0.last().expect("nonzero polynomial")
    }

    pub fn eval_at_zero(&self) -> BigRational {
        self.0.first().cloned().unwrap_or_else(<BigRational as Scalar>::zero)
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        let zero = BigRational::zero();
        Poly::new((0..n).map(|k| self.0.get(k).unwrap_or(&zero) + rhs.0.get(k).unwrap_or(&zero)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        if self.0.len() == 1 {
            return rhs.scale(&self.0[0]);
        }
        if rhs.0.len() == 1 {
            return self.scale(&rhs.0[0]);
        }
        let mut out = vec![BigRational::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Euclidean division; `rhs` must be nonzero.
    pub fn div_rem(&self, rhs: &Poly) -> (Poly, Poly) {
        assert!(!rhs.is_zero(), "polynomial division by zero");
        if self.0.len() < rhs.0.len() {
            return (Poly::zero(), self.clone());
        }
        let lead_inv = rhs.lead().recip();
        let mut rem = self.0.clone();
        let shift_max = self.0.len() - rhs.0.len();
        let mut quot = vec![BigRational::zero(); shift_max + 1];
        for shift in (0..=shift_max).rev() {
            let c = &rem[shift + rhs.0.len() - 1] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (k, b) in rhs.0.iter().enumerate() {
                rem[shift + k] -= &c * b;
            }
            quot[shift] = c;
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Exact quotient, for callers that know the division is exact.
    pub fn div_exact(&self, rhs: &Poly) -> Poly {
        let (q, r) = self.div_rem(rhs);
        debug_assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Returns `(lead, self / lead)`.
    pub fn monic(&self) -> (BigRational, Poly) {
        if self.is_zero() {
            return (BigRational::one(), Poly::zero());
        }
        let lead = self.lead().clone();
        if lead.is_one() {
            return (lead, self.clone());
        }
        let inv = lead.recip();
        (lead, self.scale(&inv))
    }

    /// Monic greatest common divisor (zero only if both inputs are zero).
    pub fn gcd(&self, rhs: &Poly) -> Poly {
        if self.is_constant() && !self.is_zero() || rhs.is_constant() && !rhs.is_zero() {
            return Poly::one();
        }
        let (mut a, mut b) = (self.monic().1, rhs.monic().1);
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r.monic().1;
        }
        a
    }
}

/// `num(ε)/den(ε)` in lowest terms with monic denominator.
///
/// Arithmetic cannot fail, so growth past the degree cap is recorded on the
/// value and surfaces as [`Error::DegreeCapExceeded`] on evaluation or
/// inversion.
#[derive(Clone)]
pub struct RegulatedScalar {
    num: Poly,
    den: Poly,
    cap: Option<usize>,
    overflow: Option<(usize, usize)>,
}

impl fmt::Debug for RegulatedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((degree, cap)) = self.overflow {
            return write!(f, "<degree {degree} over cap {cap}>");
        }
        if self.den.is_constant() {
            write!(f, "{:?}", self.num)
        } else {
            write!(f, "({:?}) / ({:?})", self.num, self.den)
        }
    }
}

impl PartialEq for RegulatedScalar {
    fn eq(&self, other: &Self) -> bool {
        self.overflow == other.overflow && self.num == other.num && self.den == other.den
    }
}

fn merge_cap(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl RegulatedScalar {
    /// Builds `num/den`, normalizing; fails if `den` is the zero polynomial.
    pub fn from_polys(num: Poly, den: Poly, cap: usize) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::PoleEncountered("zero denominator polynomial".into()));
        }
        Ok(Self::normalized(num, den, Some(cap)))
    }

    fn normalized(num: Poly, den: Poly, cap: Option<usize>) -> Self {
        let g = num.gcd(&den);
        let (num, den) = if g.is_constant() { (num, den) } else { (num.div_exact(&g), den.div_exact(&g)) };
        Self::assemble(num, den, cap)
    }

    /// Final step of every constructor: monic denominator and cap check.
    fn assemble(num: Poly, den: Poly, cap: Option<usize>) -> Self {
        let (lead, den) = den.monic();
        let num = if num.is_zero() {
            return Self::constant(BigRational::zero(), cap);
        } else if lead.is_one() {
            num
        } else {
            num.scale(&lead.recip())
        };
        let degree = num.degree().max(den.degree());
        let overflow = cap.filter(|&c| degree > c).map(|c| (degree, c));
        RegulatedScalar { num, den, cap, overflow }
    }

    fn constant(c: BigRational, cap: Option<usize>) -> Self {
        RegulatedScalar { num: Poly::new(vec![c]), den: Poly::one(), cap, overflow: None }
    }

    /// The regulator ε itself.
    pub fn epsilon() -> Self {
        RegulatedScalar {
            num: Poly::new(vec![BigRational::zero(), BigRational::one()]),
            den: Poly::one(),
            cap: None,
            overflow: None,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = Some(cap);
        let degree = self.num.degree().max(self.den.degree());
        if degree > cap {
            self.overflow = Some((degree, cap));
        }
        self
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    fn check(&self) -> Result<()> {
        match self.overflow {
            Some((degree, cap)) => Err(Error::DegreeCapExceeded { degree, cap }),
            None => Ok(()),
        }
    }

    fn poisoned(a: &Self, b: &Self) -> Option<Self> {
        a.overflow.or(b.overflow).map(|o| RegulatedScalar {
            num: Poly::zero(),
            den: Poly::one(),
            cap: merge_cap(a.cap, b.cap),
            overflow: Some(o),
        })
    }

    fn as_constant(&self) -> Option<&BigRational> {
        (self.den.is_constant() && self.num.is_constant() && !self.num.is_zero()).then(|| &self.num.0[0])
    }
}

/// Value of a regulated quantity at ε = 0.
pub fn reg_eval_at_zero(x: &RegulatedScalar) -> Result<ExactScalar> {
    x.check()?;
    let d0 = x.den.eval_at_zero();
    if d0.is_zero() {
        return Err(Error::PoleAtZero);
    }
    Ok(x.num.eval_at_zero() / d0)
}

impl Scalar for RegulatedScalar {
    fn zero() -> Self {
        Self::constant(BigRational::zero(), None)
    }
    fn one() -> Self {
        Self::constant(BigRational::one(), None)
    }
    fn from_i64(n: i64) -> Self {
        Self::constant(BigRational::from_integer(n.into()), None)
    }
    fn from_exact(x: &ExactScalar) -> Self {
        Self::constant(x.clone(), None)
    }
    fn is_zero(&self) -> bool {
        self.overflow.is_none() && self.num.is_zero()
    }

    fn add(&self, rhs: &Self) -> Self {
        if let Some(p) = Self::poisoned(self, rhs) {
            return p;
        }
        let cap = merge_cap(self.cap, rhs.cap);
        if self.num.is_zero() {
            return RegulatedScalar { cap, ..rhs.clone() };
        }
        if rhs.num.is_zero() {
            return RegulatedScalar { cap, ..self.clone() };
        }
        if self.den == rhs.den {
            return Self::normalized(self.num.add(&rhs.num), self.den.clone(), cap);
        }
        let g = self.den.gcd(&rhs.den);
        if g.is_constant() {
            let num = self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den));
            return Self::assemble(num, self.den.mul(&rhs.den), cap);
        }
        let b1 = self.den.div_exact(&g);
        let d1 = rhs.den.div_exact(&g);
        let t = self.num.mul(&d1).add(&rhs.num.mul(&b1));
        let h = t.gcd(&g);
        let (t, dh) = if h.is_constant() { (t, rhs.den.clone()) } else { (t.div_exact(&h), rhs.den.div_exact(&h)) };
        Self::assemble(t, b1.mul(&dh), cap)
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    fn mul(&self, rhs: &Self) -> Self {
        if let Some(p) = Self::poisoned(self, rhs) {
            return p;
        }
        let cap = merge_cap(self.cap, rhs.cap);
        if self.num.is_zero() || rhs.num.is_zero() {
            return Self::constant(BigRational::zero(), cap);
        }
        if let Some(c) = self.as_constant() {
            return RegulatedScalar { num: rhs.num.scale(c), den: rhs.den.clone(), cap, overflow: None }
                .with_cap_opt(cap);
        }
        if let Some(c) = rhs.as_constant() {
            return RegulatedScalar { num: self.num.scale(c), den: self.den.clone(), cap, overflow: None }
                .with_cap_opt(cap);
        }
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let (a, d) = if g1.is_constant() {
            (self.num.clone(), rhs.den.clone())
        } else {
            (self.num.div_exact(&g1), rhs.den.div_exact(&g1))
        };
        let (c, b) = if g2.is_constant() {
            (rhs.num.clone(), self.den.clone())
        } else {
            (rhs.num.div_exact(&g2), self.den.div_exact(&g2))
        };
        Self::assemble(a.mul(&c), b.mul(&d), cap)
    }

    fn neg(&self) -> Self {
        RegulatedScalar { num: self.num.neg(), ..self.clone() }
    }

    fn try_inv(&self) -> Result<Self> {
        self.check()?;
        if self.num.is_zero() {
            return Err(Error::PoleEncountered("inverse of zero rational function".into()));
        }
        Ok(Self::assemble(self.den.clone(), self.num.clone(), self.cap))
    }
}

impl RegulatedScalar {
    fn with_cap_opt(self, cap: Option<usize>) -> Self {
        match cap {
            Some(c) => self.with_cap(c),
            None => self,
        }
    }
}

impl Regulator for RegulatedScalar {
    fn lift(x: &ExactScalar, multiplier: &ExactScalar) -> Self {
        RegulatedScalar {
            num: Poly::new(vec![x.clone(), x * multiplier]),
            den: Poly::one(),
            cap: Some(DEFAULT_DEGREE_CAP),
            overflow: None,
        }
    }

    fn eval_at_zero(&self) -> Result<ExactScalar> {
        reg_eval_at_zero(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn poly(cs: &[i64]) -> Poly {
        Poly::new(cs.iter().map(|&c| r(c, 1)).collect())
    }

    fn rf(num: &[i64], den: &[i64]) -> RegulatedScalar {
        RegulatedScalar::from_polys(poly(num), poly(den), DEFAULT_DEGREE_CAP).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(reg_eval_at_zero(&rf(&[1, 1], &[1, -1])).unwrap(), r(1, 1));
        let eps = RegulatedScalar::epsilon();
        assert_eq!(reg_eval_at_zero(&eps.try_div(&eps).unwrap()).unwrap(), r(1, 1));
        assert_eq!(reg_eval_at_zero(&eps.try_inv().unwrap()), Err(Error::PoleAtZero));
    }

    #[test]
    fn normalization_makes_equality_syntactic() {
        // (ε² − 1)/(2ε − 2) = (ε + 1)/2
        let a = rf(&[-1, 0, 1], &[-2, 2]);
        let b = rf(&[1, 1], &[2]);
        assert_eq!(a, b);
        assert!(a.denominator().is_constant());
    }

    #[test]
    fn gcd_is_monic() {
        let g = poly(&[-2, 0, 2]).gcd(&poly(&[3, 3]));
        assert_eq!(g, poly(&[1, 1]));
    }

    #[test]
    fn degree_cap_is_an_error() {
        let x = RegulatedScalar::lift(&r(2, 1), &r(1, 1)).with_cap(3);
        let mut p = RegulatedScalar::one();
        for _ in 0..4 {
            p = p.mul(&x);
        }
        assert_eq!(reg_eval_at_zero(&p), Err(Error::DegreeCapExceeded { degree: 4, cap: 3 }));
        assert!(p.try_inv().is_err());
    }

    fn small_rf() -> impl Strategy<Value = RegulatedScalar> {
        (prop::collection::vec(-6i64..6, 1..4), prop::collection::vec(-6i64..6, 1..4))
            .prop_filter_map("nonzero denominator", |(n, d)| {
                RegulatedScalar::from_polys(poly(&n), poly(&d), DEFAULT_DEGREE_CAP).ok()
            })
    }

    proptest! {
        #[test]
        fn field_axioms(a in small_rf(), b in small_rf(), c in small_rf()) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.sub(&a), RegulatedScalar::zero());
            if !a.is_zero() {
                prop_assert!(a.mul(&a.try_inv().unwrap()).is_one());
            }
        }

        #[test]
        fn evaluation_is_multiplicative(a in small_rf(), b in small_rf()) {
            if let (Ok(x), Ok(y)) = (reg_eval_at_zero(&a), reg_eval_at_zero(&b)) {
                prop_assert_eq!(reg_eval_at_zero(&a.mul(&b)).unwrap(), &x * &y);
                prop_assert_eq!(reg_eval_at_zero(&a.add(&b)).unwrap(), &x + &y);
            }
        }
    }
}
