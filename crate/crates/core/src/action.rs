//! Multiple actions T_ij(w̄)·B^{a,b}(ū;v̄) as partition sums, their single-point
//! resolved forms, the transfer eigenvalue and the Bethe residuals.
//!
//! Throughout, η̄ = {ū, w̄} and ξ̄ = {v̄, w̄}. The action parameters w̄ appear in
//! three roles: bare (arguments of λ₂, K and f next to w̄ itself), as members
//! of ξ̄ and as members of η̄. In the exact field all three coincide and many
//! individual terms are singular; [`ActionPoints::regulated`] splits the
//! ξ̄- and η̄-copies along the regulator so the sum can be evaluated as a limit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bethe::{build_bethe, BetheLabel};
use crate::chain::{ChainSpec, MonodromyCache, StateVector};
use crate::error::{Error, Result};
use crate::izergin::{izergin_kl, izergin_kr};
use crate::rmatrix::Deformation;
use crate::scalars::{ExactScalar, Regulator, Scalar};
use crate::setcalc::{f_prod, partition_indices};

/// A monodromy entry T_ij, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Entry(pub usize, pub usize);

impl Entry {
    /// All nine entries, upper-triangular and diagonal ones first.
    pub const ALL: [Entry; 9] = [
        Entry(1, 3),
        Entry(1, 2),
        Entry(2, 3),
        Entry(2, 2),
        Entry(1, 1),
        Entry(3, 3),
        Entry(2, 1),
        Entry(3, 2),
        Entry(3, 1),
    ];

    pub fn new(i: usize, j: usize) -> Result<Self> {
        if (1..=3).contains(&i) && (1..=3).contains(&j) {
            Ok(Entry(i, j))
        } else {
            Err(Error::Config(format!("no monodromy entry ({i},{j})")))
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0, self.1)
    }
}

impl FromStr for Entry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("entry must be two digits such as 31, got {s:?}"));
        let mut digits = s.trim().chars().map(|c| c.to_digit(10).map(|d| d as usize));
        match (digits.next(), digits.next(), digits.next()) {
            (Some(Some(i)), Some(Some(j)), None) => Entry::new(i, j),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for Entry {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Entry> for String {
    fn from(e: Entry) -> String {
        e.to_string()
    }
}

/// The three copies of the action parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionPoints<F> {
    pub bare: Vec<F>,
    pub xi: Vec<F>,
    pub eta: Vec<F>,
}

impl<F: Scalar> ActionPoints<F> {
    /// All three roles share the same values (no regulator).
    pub fn unregulated(w: Vec<F>) -> Self {
        ActionPoints { bare: w.clone(), xi: w.clone(), eta: w }
    }

    pub fn len(&self) -> usize {
        self.bare.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bare.is_empty()
    }
}

impl<R: Regulator> ActionPoints<R> {
    /// w_m·(1 + c′_m ε) in ξ̄, w_m·(1 + c″_m ε) in η̄, bare w_m unshifted.
    pub fn regulated(w: &[ExactScalar], cfg: &RegulatorConfig) -> Result<Self> {
        if cfg.xi.len() < w.len() || cfg.eta.len() < w.len() {
            return Err(Error::Config(format!("regulator multipliers cover fewer than {} points", w.len())));
        }
        let lift = |mults: &[i64]| {
            w.iter()
                .zip(mults)
                .map(|(x, &m)| R::lift(x, &ExactScalar::from_integer(m.into())).with_precision(cfg.terms))
                .collect()
        };
        Ok(ActionPoints { bare: w.iter().map(R::from_exact).collect(), xi: lift(&cfg.xi), eta: lift(&cfg.eta) })
    }
}

/// Fixed regulator multipliers, one pair per action parameter, and the
/// number of series terms to start from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegulatorConfig {
    pub xi: Vec<i64>,
    pub eta: Vec<i64>,
    /// Initial truncation for series fields; doubled (up to
    /// [`MAX_SERIES_TERMS`]) whenever precision runs out.
    pub terms: usize,
}

pub const MAX_SERIES_TERMS: usize = 64;

impl RegulatorConfig {
    pub fn primary() -> Self {
        RegulatorConfig { xi: vec![3, 6, 9, 12], eta: vec![-5, -10, -15, -20], terms: 4 }
    }

    /// A second, unrelated assignment for direction-independence checks.
    pub fn secondary() -> Self {
        RegulatorConfig { xi: vec![7, 11, 17, 23], eta: vec![-2, 13, -19, 29], terms: 4 }
    }

    fn single(&self, m: usize) -> Self {
        RegulatorConfig { xi: vec![self.xi[m]], eta: vec![self.eta[m]], terms: self.terms }
    }

    /// Runs `job` with growing truncation until it stops running out of precision.
    fn retry<T>(&self, mut job: impl FnMut(&Self) -> Result<T>) -> Result<T> {
        let mut cfg = self.clone();
        loop {
            match job(&cfg) {
                Err(Error::PrecisionExhausted(_)) if cfg.terms < MAX_SERIES_TERMS => cfg.terms *= 2,
                other => return other,
            }
        }
    }
}

impl Default for RegulatorConfig {
    fn default() -> Self {
        Self::primary()
    }
}

/// Where a term came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Index lists of the parts of η̄ = {ū, w̄} and ξ̄ = {v̄, w̄} (ū, v̄ first).
    Partition { eta: Vec<Vec<usize>>, xi: Vec<Vec<usize>> },
    /// A term group of a resolved single action and the summation indices
    /// (j over ū, i and i′ over v̄) that produced it.
    Resolved { group: String, indices: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionTerm<F> {
    pub coefficient: F,
    /// The same coefficient with the alternative T₃₁ denominator, when requested.
    pub alt_coefficient: Option<F>,
    pub label: BetheLabel<F>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionResult<F> {
    pub entry: Entry,
    pub terms: Vec<ActionTerm<F>>,
}

fn pick<F: Clone>(xs: &[F], idx: &[usize]) -> Vec<F> {
    idx.iter().map(|&i| xs[i].clone()).collect()
}

fn without<F: Clone>(xs: &[F], skip: &[usize]) -> Vec<F> {
    xs.iter().enumerate().filter(|(k, _)| !skip.contains(k)).map(|(_, x)| x.clone()).collect()
}

fn with<F: Clone>(xs: &[F], extra: &F) -> Vec<F> {
    let mut out = xs.to_vec();
    out.push(extra.clone());
    out
}

fn check_points<F: Scalar>(points: &ActionPoints<F>, label: &BetheLabel<F>) -> Result<()> {
    let n = points.len();
    if points.xi.len() != n || points.eta.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: points.xi.len().min(points.eta.len()) });
    }
    let clash = points.bare.iter().any(|w| label.u.iter().chain(label.v.iter()).any(|x| x.coincides(w)));
    if clash {
        return Err(Error::Precondition("action parameters must be disjoint from the Bethe parameters".into()));
    }
    Ok(())
}

/// The multiple action T_ij(w̄)·B^{a,b}(ū;v̄) as a sum over partitions.
///
/// Shape-infeasible entries (too few elements to fill the required parts)
/// give an empty result. With `alternative` set, T₃₁ terms also carry the
/// coefficient built with the second printed form of its denominator.
pub fn act_multiple<F: Scalar>(
    entry: Entry,
    points: &ActionPoints<F>,
    label: &BetheLabel<F>,
    chain: &ChainSpec<F>,
    alternative: bool,
) -> Result<ActionResult<F>> {
    check_points(points, label)?;
    let def = chain.deformation();
    let n = points.len();
    let w = &points.bare[..];
    let eta: Vec<F> = label.u.iter().chain(&points.eta).cloned().collect();
    let xi: Vec<F> = label.v.iter().chain(&points.xi).cloned().collect();
    let fp = |x: &[F], y: &[F]| f_prod(def, x, y);
    let kl = |x: &[F], y: &[F]| izergin_kl(def, x, y);
    let kr = |x: &[F], y: &[F]| izergin_kr(def, x, y);
    let lam = chain.lambda2_set(w);
    let mut terms = Vec::new();
    let mut push = |coef: F, alt: Option<F>, u: Vec<F>, v: Vec<F>, eta_p: Vec<Vec<usize>>, xi_p: Vec<Vec<usize>>| {
        terms.push(ActionTerm {
            coefficient: lam.mul(&coef),
            alt_coefficient: alt.map(|a| lam.mul(&a)),
            label: BetheLabel::new(u, v)?,
            provenance: Provenance::Partition { eta: eta_p, xi: xi_p },
        });
        Ok::<_, Error>(())
    };
    let splits = |set: &[F], sizes: &[usize]| -> Result<Vec<Vec<Vec<usize>>>> {
        if sizes.iter().sum::<usize>() > set.len() {
            return Ok(Vec::new());
        }
        let mut sizes = sizes.to_vec();
        sizes.push(set.len() - sizes.iter().sum::<usize>());
        partition_indices(set.len(), &sizes)
    };

    match entry {
        Entry(1, 3) => push(F::one(), None, eta.clone(), xi.clone(), vec![], vec![])?,
        Entry(1, 2) => {
            for p in splits(&xi, &[n])? {
                let (x1, x2) = (pick(&xi, &p[0]), pick(&xi, &p[1]));
                let coef = fp(&x2, &x1)?.try_div(&fp(w, &x1)?)?.mul(&kr(w, &x1)?);
                push(coef, None, eta.clone(), x2, vec![], p)?;
            }
        }
        Entry(2, 3) => {
            for p in splits(&eta, &[n])? {
                let (e1, e2) = (pick(&eta, &p[0]), pick(&eta, &p[1]));
                let coef = fp(&e1, &e2)?.try_div(&fp(&e1, w)?)?.mul(&kl(&e1, w)?);
                push(coef, None, e2, xi.clone(), p, vec![])?;
            }
        }
        Entry(2, 2) | Entry(1, 1) | Entry(3, 3) => {
            for pe in splits(&eta, &[n])? {
                let (e1, e2) = (pick(&eta, &pe[0]), pick(&eta, &pe[1]));
                for px in splits(&xi, &[n])? {
                    let (x1, x2) = (pick(&xi, &px[0]), pick(&xi, &px[1]));
                    let coef = match entry {
                        Entry(2, 2) => fp(&x2, &x1)?
                            .mul(&fp(&e1, &e2)?)
                            .try_div(&fp(w, &x1)?.mul(&fp(&e1, w)?))?
                            .mul(&kr(w, &x1)?)
                            .mul(&kl(&e1, w)?),
                        Entry(1, 1) => chain
                            .r1_set(&e1)?
                            .mul(&fp(&x2, &x1)?)
                            .mul(&fp(&e2, &e1)?)
                            .try_div(&fp(&x2, &e1)?.mul(&fp(w, &x1)?).mul(&fp(&x1, &e1)?))?
                            .mul(&kr(w, &x1)?)
                            .mul(&kr(&x1, &e1)?),
                        _ => chain
                            .r3_set(&x1)?
                            .mul(&fp(&x1, &x2)?)
                            .mul(&fp(&e1, &e2)?)
                            .try_div(&fp(&x1, &e2)?.mul(&fp(&x1, &e1)?).mul(&fp(&e1, w)?))?
                            .mul(&kl(&e1, w)?)
                            .mul(&kl(&x1, &e1)?),
                    };
                    push(coef, None, e2.clone(), x2, pe.clone(), px)?;
                }
            }
        }
        Entry(2, 1) => {
            for pe in splits(&eta, &[n, n])? {
                let (e1, e2, e3) = (pick(&eta, &pe[0]), pick(&eta, &pe[1]), pick(&eta, &pe[2]));
                for px in splits(&xi, &[n])? {
                    let (x1, x2) = (pick(&xi, &px[0]), pick(&xi, &px[1]));
                    let coef = chain
                        .r1_set(&e1)?
                        .mul(&fp(&e2, &e1)?)
                        .mul(&fp(&e2, &e3)?)
                        .mul(&fp(&e3, &e1)?)
                        .mul(&fp(&x2, &x1)?)
                        .try_div(&fp(&xi, &e1)?.mul(&fp(w, &x1)?).mul(&fp(&e2, w)?))?
                        .mul(&kl(&e2, w)?)
                        .mul(&kr(&x1, &e1)?)
                        .mul(&kr(w, &x1)?);
                    push(coef, None, e3.clone(), x2, pe.clone(), px)?;
                }
            }
        }
        Entry(3, 2) => {
            for px in splits(&xi, &[n, n])? {
                let (x1, x2, x3) = (pick(&xi, &px[0]), pick(&xi, &px[1]), pick(&xi, &px[2]));
                for pe in splits(&eta, &[n])? {
                    let (e1, e2) = (pick(&eta, &pe[0]), pick(&eta, &pe[1]));
                    let coef = chain
                        .r3_set(&x1)?
                        .mul(&fp(&x1, &x2)?)
                        .mul(&fp(&x1, &x3)?)
                        .mul(&fp(&x3, &x2)?)
                        .mul(&fp(&e1, &e2)?)
                        .try_div(&fp(&x1, &eta)?.mul(&fp(&e1, w)?).mul(&fp(w, &x2)?))?
                        .mul(&kl(&e1, w)?)
                        .mul(&kl(&x1, &e1)?)
                        .mul(&kr(w, &x2)?);
                    push(coef, None, e2, x3.clone(), pe, px.clone())?;
                }
            }
        }
        Entry(3, 1) => {
            for px in splits(&xi, &[n, n])? {
                let (x1, x2, x3) = (pick(&xi, &px[0]), pick(&xi, &px[1]), pick(&xi, &px[2]));
                for pe in splits(&eta, &[n, n])? {
                    let (e1, e2, e3) = (pick(&eta, &pe[0]), pick(&eta, &pe[1]), pick(&eta, &pe[2]));
                    let numer = chain
                        .r1_set(&e2)?
                        .mul(&chain.r3_set(&x1)?)
                        .mul(&kl(&x1, &e1)?)
                        .mul(&kr(&x2, &e2)?)
                        .mul(&kl(&e1, w)?)
                        .mul(&kr(w, &x2)?)
                        .mul(&fp(&e1, &e2)?)
                        .mul(&fp(&e1, &e3)?)
                        .mul(&fp(&e3, &e2)?)
                        .mul(&fp(&x1, &x2)?)
                        .mul(&fp(&x1, &x3)?)
                        .mul(&fp(&x3, &x2)?);
                    let common = fp(&e1, w)?.mul(&fp(w, &x2)?);
                    let denom = fp(&x1, &eta)?.mul(&fp(&x3, &e2)?).mul(&fp(&x2, &e2)?).mul(&common);
                    let alt = if alternative {
                        let denom = fp(&xi, &e2)?.mul(&fp(&x1, &e1)?).mul(&fp(&x1, &e3)?).mul(&common);
                        Some(numer.try_div(&denom)?)
                    } else {
                        None
                    };
                    push(numer.try_div(&denom)?, alt, e3, x3.clone(), pe, px.clone())?;
                }
            }
        }
        _ => unreachable!("Entry is validated on construction"),
    }
    Ok(ActionResult { entry, terms })
}

/// Scalar helpers shared by the resolved forms.
struct Single<'a, F> {
    def: &'a Deformation<F>,
    chain: &'a ChainSpec<F>,
    w: F,
    w_eta: F,
    w_xi: F,
}

type RawTerm<F> = (F, Vec<F>, Vec<F>, String, Vec<usize>);

impl<F: Scalar> Single<'_, F> {
    fn f(&self, x: &F, y: &F) -> Result<F> {
        self.def.f(x, y)
    }
    fn fp(&self, x: &[F], y: &[F]) -> Result<F> {
        f_prod(self.def, x, y)
    }
    /// K^(r)₁(x|y) = y·g(x,y)
    fn kr1(&self, x: &F, y: &F) -> Result<F> {
        Ok(y.mul(&self.def.g(x, y)?))
    }
    /// K^(l)₁(x|y) = x·g(x,y)
    fn kl1(&self, x: &F, y: &F) -> Result<F> {
        Ok(x.mul(&self.def.g(x, y)?))
    }
    fn lam(&self) -> F {
        self.chain.lambda2(&self.w)
    }
    fn eta(&self, us: &[F]) -> Vec<F> {
        with(us, &self.w_eta)
    }
    fn xi(&self, vs: &[F]) -> Vec<F> {
        with(vs, &self.w_xi)
    }

    fn t13(&self, us: &[F], vs: &[F]) -> Result<Vec<RawTerm<F>>> {
        Ok(vec![(self.lam(), self.eta(us), self.xi(vs), "coincident".into(), vec![])])
    }

    fn t12(&self, us: &[F], vs: &[F]) -> Result<Vec<RawTerm<F>>> {
        let w = &self.w;
        let mut out = vec![(
            self.lam().mul(&self.fp(vs, std::slice::from_ref(w))?),
            self.eta(us),
            vs.to_vec(),
            "diagonal".into(),
            vec![],
        )];
        for (i, vi) in vs.iter().enumerate() {
            let rest = without(vs, &[i]);
            let coef = self.lam().mul(&self.kr1(w, vi)?).mul(&self.fp(&rest, std::slice::from_ref(vi))?);
            out.push((coef, self.eta(us), self.xi(&rest), "replace-v".into(), vec![i]));
        }
        Ok(out)
    }

    fn t23(&self, us: &[F], vs: &[F]) -> Result<Vec<RawTerm<F>>> {
        let w = &self.w;
        let mut out = vec![(
            self.lam().mul(&self.fp(std::slice::from_ref(w), us)?),
            us.to_vec(),
            self.xi(vs),
            "diagonal".into(),
            vec![],
        )];
        for (j, uj) in us.iter().enumerate() {
            let rest = without(us, &[j]);
            let coef = self.lam().mul(&self.kl1(uj, w)?).mul(&self.fp(std::slice::from_ref(uj), &rest)?);
            out.push((coef, self.eta(&rest), self.xi(vs), "replace-u".into(), vec![j]));
        }
        Ok(out)
    }

    fn t22(&self, us: &[F], vs: &[F]) -> Result<Vec<RawTerm<F>>> {
        let w = std::slice::from_ref(&self.w);
        let (fwu, fvw) = (self.fp(w, us)?, self.fp(vs, w)?);
        let mut out = vec![(self.lam().mul(&fwu).mul(&fvw), us.to_vec(), vs.to_vec(), "diagonal".into(), vec![])];
        for (i, vi) in vs.iter().enumerate() {
            let rv = without(vs, &[i]);
            let coef = self.lam().mul(&fwu).mul(&self.kr1(&w[0], vi)?).mul(&self.fp(&rv, std::slice::from_ref(vi))?);
            out.push((coef, us.to_vec(), self.xi(&rv), "replace-v".into(), vec![i]));
        }
        for (j, uj) in us.iter().enumerate() {
            let ru = without(us, &[j]);
            let kf = self.kl1(uj, &w[0])?.mul(&self.fp(std::slice::from_ref(uj), &ru)?);
            out.push((self.lam().mul(&fvw).mul(&kf), self.eta(&ru), vs.to_vec(), "replace-u".into(), vec![j]));
            for (i, vi) in vs.iter().enumerate() {
                let rv = without(vs, &[i]);
                let coef = self.lam().mul(&kf).mul(&self.kr1(&w[0], vi)?).mul(&self.fp(&rv, std::slice::from_ref(vi))?);
                out.push((coef, self.eta(&ru), self.xi(&rv), "replace-both".into(), vec![j, i]));
            }
        }
        Ok(out)
    }

    fn t11(&self, us: &[F], vs: &[F]) -> Result<Vec<RawTerm<F>>> {
        let w = std::slice::from_ref(&self.w);
        let lead = self.lam().mul(&self.chain.r1(&w[0])?).mul(&self.fp(us, w)?);
        let mut out = vec![(lead, us.to_vec(), vs.to_vec(), "diagonal".into(), vec![])];
        for (j, uj) in us.iter().enumerate() {
            let ru = without(us, &[j]);
            let uj_s = std::slice::from_ref(uj);
            let base = self.lam().mul(&self.chain.r1(uj)?).mul(&self.fp(&ru, uj_s)?).try_div(&self.fp(vs, uj_s)?)?;
            let coef = base.mul(&self.kr1(&w[0], uj)?).mul(&self.fp(vs, w)?);
            out.push((coef, self.eta(&ru), vs.to_vec(), "replace-u".into(), vec![j]));
            for (i, vi) in vs.iter().enumerate() {
                let rv = without(vs, &[i]);
                let coef = base
                    .mul(&self.kr1(&w[0], vi)?)
                    .mul(&self.kr1(vi, uj)?)
                    .mul(&self.fp(&rv, std::slice::from_ref(vi))?);
                out.push((coef, self.eta(&ru), self.xi(&rv), "replace-both".into(), vec![j, i]));
            }
        }
        Ok(out)
    }

    fn t33(&self, us: &[F], vs: &[F]) -> Result<Vec<RawTerm<F>>> {
        let w = std::slice::from_ref(&self.w);
        let lead = self.lam().mul(&self.chain.r3(&w[0])?).mul(&self.fp(w, vs)?);
        let mut out = vec![(lead, us.to_vec(), vs.to_vec(), "diagonal".into(), vec![])];
        for (i, vi) in vs.iter().enumerate() {
            let rv = without(vs, &[i]);
            let vi_s = std::slice::from_ref(vi);
            let base = self.lam().mul(&self.chain.r3(vi)?).mul(&self.fp(vi_s, &rv)?).try_div(&self.fp(vi_s, us)?)?;
            let coef = base.mul(&self.kl1(vi, &w[0])?).mul(&self.fp(w, us)?);
            out.push((coef, us.to_vec(), self.xi(&rv), "replace-v".into(), vec![i]));
            for (j, uj) in us.iter().enumerate() {
                let ru = without(us, &[j]);
                let coef = base
                    .mul(&self.kl1(uj, &w[0])?)
                    .mul(&self.kl1(vi, uj)?)
                    .mul(&self.fp(std::slice::from_ref(uj), &ru)?);
                out.push((coef, self.eta(&ru), self.xi(&rv), "replace-both".into(), vec![j, i]));
            }
        }
        Ok(out)
    }

    fn t21(&self, us: &[F], vs: &[F]) -> Result<Vec<RawTerm<F>>> {
        let w = std::slice::from_ref(&self.w);
        let mut out = Vec::new();
        for (j, uj) in us.iter().enumerate() {
            let ru = without(us, &[j]);
            let uj_s = std::slice::from_ref(uj);
            let base = self
                .lam()
                .mul(&self.chain.r1(uj)?)
                .mul(&self.fp(w, &ru)?)
                .mul(&self.fp(&ru, uj_s)?)
                .try_div(&self.fp(vs, uj_s)?)?;
            let coef = base.mul(&self.kr1(&w[0], uj)?).mul(&self.fp(vs, w)?);
            out.push((coef, ru.clone(), vs.to_vec(), "lowered".into(), vec![j]));
            for (i, vi) in vs.iter().enumerate() {
                let rv = without(vs, &[i]);
                let coef = base
                    .mul(&self.kr1(&w[0], vi)?)
                    .mul(&self.kr1(vi, uj)?)
                    .mul(&self.fp(&rv, std::slice::from_ref(vi))?);
                out.push((coef, ru.clone(), self.xi(&rv), "lowered-replace-v".into(), vec![j, i]));
            }
            let outer = self.kl1(uj, &w[0])?.mul(&self.fp(uj_s, &ru)?);
            for (c, u, v, group, mut idx) in self.t11(&ru, vs)? {
                idx.insert(0, j);
                out.push((outer.mul(&c), u, v, format!("via-11/{group}"), idx));
            }
        }
        Ok(out)
    }

    fn t32(&self, us: &[F], vs: &[F]) -> Result<Vec<RawTerm<F>>> {
        let w = std::slice::from_ref(&self.w);
        let fwu = self.fp(w, us)?;
        let mut out = Vec::new();
        for (i, vi) in vs.iter().enumerate() {
            let rv = without(vs, &[i]);
            let vi_s = std::slice::from_ref(vi);
            let coef = self
                .lam()
                .mul(&self.kr1(&w[0], vi)?)
                .mul(&self.chain.r3(&w[0])?)
                .mul(&self.fp(w, &rv)?)
                .mul(&self.fp(&rv, vi_s)?);
            out.push((coef, us.to_vec(), rv.clone(), "lowered-w".into(), vec![i]));
            let base = self
                .lam()
                .mul(&self.kl1(vi, &w[0])?)
                .mul(&self.chain.r3(vi)?)
                .mul(&self.fp(vi_s, &rv)?)
                .mul(&fwu)
                .try_div(&self.fp(vi_s, us)?)?;
            out.push((base.mul(&self.fp(&rv, w)?), us.to_vec(), rv.clone(), "lowered".into(), vec![i]));
            for (k, vk) in vs.iter().enumerate().filter(|&(k, _)| k != i) {
                let rest = without(vs, &[i, k]);
                let coef = base.mul(&self.kr1(&w[0], vk)?).mul(&self.fp(&rest, std::slice::from_ref(vk))?);
                out.push((coef, us.to_vec(), self.xi(&rest), "lowered-replace-v".into(), vec![i, k]));
            }
            for (j, uj) in us.iter().enumerate() {
                let ru = without(us, &[j]);
                let outer = self
                    .kl1(uj, &w[0])?
                    .mul(&self.kl1(vi, uj)?)
                    .mul(&self.chain.r3(vi)?)
                    .mul(&self.fp(vi_s, &rv)?)
                    .mul(&self.fp(std::slice::from_ref(uj), &ru)?)
                    .try_div(&self.fp(vi_s, us)?)?;
                for (c, u, v, group, mut idx) in self.t12(&ru, &rv)? {
                    idx.splice(0..0, [j, i]);
                    out.push((outer.mul(&c), u, v, format!("via-12/{group}"), idx));
                }
            }
        }
        Ok(out)
    }

    fn t31(&self, us: &[F], vs: &[F]) -> Result<Vec<RawTerm<F>>> {
        let w = std::slice::from_ref(&self.w);
        let mut out = Vec::new();
        for (j, uj) in us.iter().enumerate() {
            let ru = without(us, &[j]);
            let uj_s = std::slice::from_ref(uj);
            for (i, vi) in vs.iter().enumerate() {
                let rv = without(vs, &[i]);
                let vi_s = std::slice::from_ref(vi);
                let coef = self
                    .lam()
                    .mul(&self.kr1(vi, uj)?)
                    .mul(&self.kr1(&w[0], vi)?)
                    .mul(&self.chain.r1(uj)?)
                    .mul(&self.chain.r3(&w[0])?)
                    .mul(&self.fp(&ru, uj_s)?)
                    .mul(&self.fp(w, &rv)?)
                    .mul(&self.fp(&rv, vi_s)?)
                    .try_div(&self.fp(vs, uj_s)?)?;
                out.push((coef, ru.clone(), rv.clone(), "lowered-w".into(), vec![j, i]));
                let base = self
                    .lam()
                    .mul(&self.kl1(vi, &w[0])?)
                    .mul(&self.chain.r1(uj)?)
                    .mul(&self.chain.r3(vi)?)
                    .mul(&self.fp(&ru, uj_s)?)
                    .mul(&self.fp(w, &ru)?)
                    .mul(&self.fp(vi_s, &rv)?)
                    .try_div(&self.f(vi, uj)?.mul(&self.fp(vi_s, &ru)?).mul(&self.fp(&rv, uj_s)?))?;
                let coef = base.mul(&self.kr1(&w[0], uj)?).mul(&self.fp(&rv, w)?);
                out.push((coef, ru.clone(), rv.clone(), "lowered".into(), vec![j, i]));
                for (k, vk) in vs.iter().enumerate().filter(|&(k, _)| k != i) {
                    let rest = without(vs, &[i, k]);
                    let coef = base
                        .mul(&self.kr1(vk, uj)?)
                        .mul(&self.kr1(&w[0], vk)?)
                        .mul(&self.fp(&rest, std::slice::from_ref(vk))?);
                    out.push((coef, ru.clone(), self.xi(&rest), "lowered-replace-v".into(), vec![j, i, k]));
                }
                let outer = self
                    .kl1(vi, uj)?
                    .mul(&self.kl1(uj, &w[0])?)
                    .mul(&self.chain.r3(vi)?)
                    .mul(&self.fp(uj_s, &ru)?)
                    .mul(&self.fp(vi_s, &rv)?)
                    .try_div(&self.fp(vi_s, us)?)?;
                for (c, u, v, group, mut idx) in self.t11(&ru, &rv)? {
                    idx.splice(0..0, [j, i]);
                    out.push((outer.mul(&c), u, v, format!("via-11/{group}"), idx));
                }
            }
        }
        Ok(out)
    }
}

/// T_ij(w)·B^{a,b}(ū;v̄) in resolved single-point form.
///
/// Every coefficient is a regular function of the bare w and the Bethe
/// parameters; the only coincidences left sit inside labels such as
/// B({ū_j, w}; {v̄_i, w}), which use the η̄- and ξ̄-copies of w. Lower
/// entries are expanded by substituting the resolved T₁₁ and T₁₂ actions.
pub fn act_single_resolved<F: Scalar>(
    entry: Entry,
    point: &ActionPoints<F>,
    label: &BetheLabel<F>,
    chain: &ChainSpec<F>,
) -> Result<ActionResult<F>> {
    if point.len() != 1 {
        return Err(Error::Precondition(format!("resolved actions take one point, got {}", point.len())));
    }
    check_points(point, label)?;
    let s = Single {
        def: chain.deformation(),
        chain,
        w: point.bare[0].clone(),
        w_eta: point.eta[0].clone(),
        w_xi: point.xi[0].clone(),
    };
    let (us, vs) = (&label.u[..], &label.v[..]);
    let raw = match entry {
        Entry(1, 3) => s.t13(us, vs)?,
        Entry(1, 2) => s.t12(us, vs)?,
        Entry(2, 3) => s.t23(us, vs)?,
        Entry(2, 2) => s.t22(us, vs)?,
        Entry(1, 1) => s.t11(us, vs)?,
        Entry(3, 3) => s.t33(us, vs)?,
        Entry(2, 1) => s.t21(us, vs)?,
        Entry(3, 2) => s.t32(us, vs)?,
        Entry(3, 1) => s.t31(us, vs)?,
        _ => unreachable!("Entry is validated on construction"),
    };
    let terms = raw
        .into_iter()
        .map(|(coefficient, u, v, group, indices)| {
            Ok(ActionTerm {
                coefficient,
                alt_coefficient: None,
                label: BetheLabel::new(u, v)?,
                provenance: Provenance::Resolved { group, indices },
            })
        })
        .collect::<Result<_>>()?;
    Ok(ActionResult { entry, terms })
}

/// Σ coefficient·B(label), summed in the regulated field before the limit.
pub fn evaluate_result<R: Regulator>(
    res: &ActionResult<R>,
    cache: &mut MonodromyCache<R>,
) -> Result<StateVector<ExactScalar>> {
    let mut total = StateVector::zero(cache.chain().dim());
    for term in &res.terms {
        if term.coefficient.is_zero() {
            continue;
        }
        let vec = build_bethe(&term.label, cache)?;
        total.add_scaled(&term.coefficient, &vec);
    }
    total.iter().map(Regulator::eval_at_zero).collect::<Result<Vec<_>>>().map(StateVector)
}

fn lift_label<R: Scalar>(label: &BetheLabel<ExactScalar>) -> Result<BetheLabel<R>> {
    BetheLabel::new(label.u.iter().map(R::from_exact).collect(), label.v.iter().map(R::from_exact).collect())
}

/// The oracle: T_ij(w_n)···T_ij(w₁)·B(label) by matrix application.
pub fn direct_action(
    entry: Entry,
    w: &[ExactScalar],
    label: &BetheLabel<ExactScalar>,
    cache: &mut MonodromyCache<ExactScalar>,
) -> Result<StateVector<ExactScalar>> {
    let mut vec = build_bethe(label, cache)?;
    for x in w {
        vec = cache.get(x)?.apply(entry.0, entry.1, &vec);
    }
    Ok(vec)
}

/// Evaluates the partition-sum formula at an exact point through the
/// regulated field `R`.
pub fn evaluate_multiple<R: Regulator>(
    entry: Entry,
    w: &[ExactScalar],
    label: &BetheLabel<ExactScalar>,
    chain: &ChainSpec<ExactScalar>,
    cfg: &RegulatorConfig,
) -> Result<StateVector<ExactScalar>> {
    let lifted = chain.lift(R::from_exact);
    let label = lift_label(label)?;
    let mut cache = MonodromyCache::new(lifted.clone());
    cfg.retry(|cfg| {
        let points = ActionPoints::<R>::regulated(w, cfg)?;
        evaluate_result(&act_multiple(entry, &points, &label, &lifted, false)?, &mut cache)
    })
}

/// Evaluates the resolved single-point form at an exact point.
pub fn evaluate_resolved<R: Regulator>(
    entry: Entry,
    w: &ExactScalar,
    label: &BetheLabel<ExactScalar>,
    chain: &ChainSpec<ExactScalar>,
    cfg: &RegulatorConfig,
) -> Result<StateVector<ExactScalar>> {
    let lifted = chain.lift(R::from_exact);
    let label = lift_label(label)?;
    let mut cache = MonodromyCache::new(lifted.clone());
    cfg.retry(|cfg| {
        let points = ActionPoints::<R>::regulated(std::slice::from_ref(w), cfg)?;
        evaluate_result(&act_single_resolved(entry, &points, &label, &lifted)?, &mut cache)
    })
}

/// Applies the single-point formula once per w_m (w₁ first), expanding every
/// intermediate label, and evaluates the final sum once.
pub fn evaluate_sequential<R: Regulator>(
    entry: Entry,
    w: &[ExactScalar],
    label: &BetheLabel<ExactScalar>,
    chain: &ChainSpec<ExactScalar>,
    cfg: &RegulatorConfig,
) -> Result<StateVector<ExactScalar>> {
    let lifted = chain.lift(R::from_exact);
    let label = lift_label::<R>(label)?;
    let mut cache = MonodromyCache::new(lifted.clone());
    cfg.retry(|cfg| {
        let mut layer = vec![(R::one(), label.clone())];
        for (m, x) in w.iter().enumerate() {
            let points = ActionPoints::<R>::regulated(std::slice::from_ref(x), &cfg.single(m))?;
            let mut next = Vec::new();
            for (c, lab) in &layer {
                for t in act_multiple(entry, &points, lab, &lifted, false)?.terms {
                    next.push((c.mul(&t.coefficient), t.label));
                }
            }
            layer = next;
        }
        let terms = layer
            .into_iter()
            .map(|(coefficient, label)| ActionTerm {
                coefficient,
                alt_coefficient: None,
                label,
                provenance: Provenance::Partition { eta: vec![], xi: vec![] },
            })
            .collect();
        evaluate_result(&ActionResult { entry, terms }, &mut cache)
    })
}

/// τ(w; ū, v̄) = λ₁(w)f(ū,w) + λ₂(w)f(w,ū)f(v̄,w) + λ₃(w)f(w,v̄)
pub fn transfer_eigenvalue<F: Scalar>(w: &F, us: &[F], vs: &[F], chain: &ChainSpec<F>) -> Result<F> {
    let def = chain.deformation();
    let ws = std::slice::from_ref(w);
    let t1 = chain.lambda1(w)?.mul(&f_prod(def, us, ws)?);
    let t2 = chain.lambda2(w).mul(&f_prod(def, ws, us)?).mul(&f_prod(def, vs, ws)?);
    let t3 = chain.lambda3(w).mul(&f_prod(def, ws, vs)?);
    Ok(t1.add(&t2).add(&t3))
}

/// Residuals of the Bethe equations, ū first then v̄:
/// r₁(u_j) − f(u_j,ū_j)/f(ū_j,u_j)·f(v̄,u_j) and r₃(v_i) − f(v̄_i,v_i)/f(v_i,v̄_i)·f(v_i,ū).
pub fn bethe_residuals<F: Scalar>(us: &[F], vs: &[F], chain: &ChainSpec<F>) -> Result<Vec<F>> {
    let def = chain.deformation();
    let mut out = Vec::with_capacity(us.len() + vs.len());
    for (j, uj) in us.iter().enumerate() {
        let (uj_s, rest) = (std::slice::from_ref(uj), without(us, &[j]));
        let rhs = f_prod(def, uj_s, &rest)?.try_div(&f_prod(def, &rest, uj_s)?)?.mul(&f_prod(def, vs, uj_s)?);
        out.push(chain.r1(uj)?.sub(&rhs));
    }
    for (i, vi) in vs.iter().enumerate() {
        let (vi_s, rest) = (std::slice::from_ref(vi), without(vs, &[i]));
        let rhs = f_prod(def, &rest, vi_s)?.try_div(&f_prod(def, vi_s, &rest)?)?.mul(&f_prod(def, vi_s, us)?);
        out.push(chain.r3(vi)?.sub(&rhs));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::vacuum;
    use crate::scalars::{RegulatedScalar, SeriesScalar};
    use num_rational::BigRational;

    fn r(n: i64, d: i64) -> ExactScalar {
        BigRational::new(n.into(), d.into())
    }

    fn chain(twist: Option<ExactScalar>) -> ChainSpec<ExactScalar> {
        ChainSpec::new(vec![r(13, 10), r(29, 10), r(9, 20)], r(7, 4), twist).unwrap()
    }

    const US: [(i64, i64); 2] = [(61, 100), (177, 100)];
    const VS: [(i64, i64); 2] = [(223, 100), (37, 100)];
    const WS: [(i64, i64); 2] = [(111, 100), (37, 10)];

    fn label(a: usize, b: usize) -> BetheLabel<ExactScalar> {
        BetheLabel::new(
            US[..a].iter().map(|&(n, d)| r(n, d)).collect(),
            VS[..b].iter().map(|&(n, d)| r(n, d)).collect(),
        )
        .unwrap()
    }

    fn ws(n: usize) -> Vec<ExactScalar> {
        WS[..n].iter().map(|&(n, d)| r(n, d)).collect()
    }

    #[test]
    fn entry_parsing() {
        assert_eq!("31".parse::<Entry>().unwrap(), Entry(3, 1));
        assert!("41".parse::<Entry>().is_err());
        assert!("3".parse::<Entry>().is_err());
        assert_eq!(Entry(1, 2).to_string(), "12");
    }

    #[test]
    fn vacuum_specializations() {
        let ch = chain(None);
        let pts = ActionPoints::<ExactScalar>::unregulated(ws(1));
        let res = act_multiple(Entry(1, 3), &pts, &BetheLabel::vacuum(), &ch, false).unwrap();
        assert_eq!(res.terms.len(), 1);
        assert_eq!(res.terms[0].label, BetheLabel::new(ws(1), ws(1)).unwrap());

        // The lone T₂₂ term is 0/0-like at the coincident point; its limit is λ₂(w) = 1.
        let lifted = ch.lift(SeriesScalar::from_exact);
        let reg = ActionPoints::<SeriesScalar>::regulated(&ws(1), &RegulatorConfig::primary()).unwrap();
        let res = act_multiple(Entry(2, 2), &reg, &BetheLabel::vacuum(), &lifted, false).unwrap();
        assert_eq!(res.terms.len(), 1);
        assert_eq!(res.terms[0].coefficient.eval_at_zero().unwrap(), r(1, 1));
        assert_eq!(res.terms[0].label, BetheLabel::vacuum());

        let lowered = act_multiple(Entry(2, 1), &pts, &BetheLabel::vacuum(), &ch, false).unwrap();
        assert!(lowered.terms.is_empty());
    }

    #[test]
    fn t12_on_vacuum_resolves_to_b10() {
        let ch = chain(None);
        let got = evaluate_multiple::<SeriesScalar>(
            Entry(1, 2),
            &ws(1),
            &BetheLabel::vacuum(),
            &ch,
            &RegulatorConfig::primary(),
        )
        .unwrap();
        let b10 = crate::bethe::bethe_vector(&BetheLabel::new(ws(1), vec![]).unwrap(), &ch).unwrap();
        assert_eq!(got, b10);
    }

    #[test]
    fn single_actions_match_the_oracle() {
        for twist in [None, Some(r(-3, 2))] {
            let ch = chain(twist);
            let mut cache = MonodromyCache::new(ch.clone());
            for (a, b) in [(0, 0), (1, 0), (1, 1), (2, 1)] {
                let lab = label(a, b);
                for entry in Entry::ALL {
                    let want = direct_action(entry, &ws(1), &lab, &mut cache).unwrap();
                    let cfg = RegulatorConfig::primary();
                    let got = evaluate_multiple::<SeriesScalar>(entry, &ws(1), &lab, &ch, &cfg).unwrap();
                    assert_eq!(got, want, "multiple {entry} on ({a},{b})");
                    let got = evaluate_resolved::<SeriesScalar>(entry, &ws(1)[0], &lab, &ch, &cfg).unwrap();
                    assert_eq!(got, want, "resolved {entry} on ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn double_action_and_induction() {
        let ch = chain(Some(r(5, 3)));
        let mut cache = MonodromyCache::new(ch.clone());
        let lab = label(1, 1);
        for entry in [Entry(2, 3), Entry(2, 2)] {
            let want = direct_action(entry, &ws(2), &lab, &mut cache).unwrap();
            let cfg = RegulatorConfig::secondary();
            assert_eq!(evaluate_multiple::<SeriesScalar>(entry, &ws(2), &lab, &ch, &cfg).unwrap(), want);
            assert_eq!(evaluate_sequential::<SeriesScalar>(entry, &ws(2), &lab, &ch, &cfg).unwrap(), want);
        }
    }

    #[test]
    fn rational_function_regulator_agrees() {
        let ch = chain(None);
        let mut cache = MonodromyCache::new(ch.clone());
        let lab = label(1, 0);
        let want = direct_action(Entry(1, 2), &ws(1), &lab, &mut cache).unwrap();
        let got =
            evaluate_multiple::<RegulatedScalar>(Entry(1, 2), &ws(1), &lab, &ch, &RegulatorConfig::primary()).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn act31_denominator_forms_agree() {
        let ch = chain(Some(r(2, 7)));
        let lifted = ch.lift(RegulatedScalar::from_exact);
        let pts = ActionPoints::<RegulatedScalar>::regulated(&ws(1), &RegulatorConfig::primary()).unwrap();
        let res = act_multiple(Entry(3, 1), &pts, &lift_label(&label(2, 1)).unwrap(), &lifted, true).unwrap();
        assert!(!res.terms.is_empty());
        for t in &res.terms {
            assert_eq!(Some(&t.coefficient), t.alt_coefficient.as_ref());
        }
    }

    #[test]
    fn unregulated_coincidences_are_poles() {
        let ch = chain(None);
        let pts = ActionPoints::unregulated(ws(1));
        assert!(matches!(act_multiple(Entry(1, 2), &pts, &label(1, 1), &ch, false), Err(Error::PoleEncountered(_))));
        let clash = ActionPoints::unregulated(vec![r(61, 100)]);
        assert!(matches!(act_multiple(Entry(1, 3), &clash, &label(1, 0), &ch, false), Err(Error::Precondition(_))));
    }

    #[test]
    fn eigenvalue_and_residuals() {
        let ch = chain(Some(r(3, 2)));
        let w = r(11, 3);
        let vac = transfer_eigenvalue(&w, &[], &[], &ch).unwrap();
        assert_eq!(vac, ch.lambda1(&w).unwrap() + ch.lambda2(&w) + ch.lambda3(&w));
        let t = crate::chain::build_monodromy(&ch, &w).unwrap().transfer();
        assert_eq!(t.apply(&vacuum(&ch)), vacuum(&ch).scale(&vac));

        let (u, z) = (r(5, 7), ch.inhomogeneities().to_vec());
        let res = bethe_residuals(std::slice::from_ref(&u), &[], &ch).unwrap();
        let lam: ExactScalar = z.iter().map(|zi| ch.deformation().f(&u, zi).unwrap()).product();
        assert_eq!(res, vec![lam - r(1, 1)]);
        let untwisted = chain(None);
        assert_eq!(bethe_residuals(&[], &[r(2, 9)], &untwisted).unwrap(), vec![r(0, 1)]);

        let us = [r(5, 7), r(-2, 3)];
        let vs = [r(9, 4)];
        let swapped = [r(-2, 3), r(5, 7)];
        assert_eq!(
            transfer_eigenvalue(&w, &us, &vs, &ch).unwrap(),
            transfer_eigenvalue(&w, &swapped, &vs, &ch).unwrap()
        );
    }
}
