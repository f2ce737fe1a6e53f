//! Exact checks of the Izergin-determinant identities at a given point.
//!
//! Each check evaluates both sides independently and compares them in the
//! field; a `false` result is a genuine counterexample at that point.

use crate::error::Result;
use crate::rmatrix::Deformation;
use crate::scalars::{ExactScalar, Regulator, Scalar};
use crate::setcalc::{f_prod, partition_indices};

use super::{izergin_k, izergin_kl, izergin_kr};

fn minus_q_pow<F: Scalar>(def: &Deformation<F>, n: i32) -> Result<F> {
    def.q().neg().powi(n)
}

fn pick<F: Clone>(xs: &[F], idx: &[usize]) -> Vec<F> {
    idx.iter().map(|&i| xs[i].clone()).collect()
}

/// K₁(x|y) = g(x,y).
pub fn initial_condition<F: Scalar>(def: &Deformation<F>, x: &F, y: &F) -> Result<bool> {
    Ok(izergin_k(def, std::slice::from_ref(x), std::slice::from_ref(y))? == def.g(x, y)?)
}

/// K_n(αx̄|αȳ) = α⁻ⁿ K_n(x̄|ȳ).
pub fn rescaling<F: Scalar>(def: &Deformation<F>, xs: &[F], ys: &[F], alpha: &F) -> Result<bool> {
    let scale = |v: &[F]| v.iter().map(|x| x.mul(alpha)).collect::<Vec<_>>();
    let lhs = izergin_k(def, &scale(xs), &scale(ys))?;
    let rhs = alpha.powi(-(xs.len() as i32))?.mul(&izergin_k(def, xs, ys)?);
    Ok(lhs == rhs)
}

/// K(x̄,zq⁻²|ȳ,z) = −(q/z)K(x̄|ȳ) and K(x̄,z|ȳ,zq²) = −1/(qz)·K(x̄|ȳ).
pub fn reduction<F: Scalar>(def: &Deformation<F>, xs: &[F], ys: &[F], z: &F) -> Result<bool> {
    let base = izergin_k(def, xs, ys)?;
    let with = |x: F, y: F| {
        let (mut a, mut b) = (xs.to_vec(), ys.to_vec());
        a.push(x);
        b.push(y);
        izergin_k(def, &a, &b)
    };
    let down = with(def.shift_down(z), z.clone())?;
    let up = with(z.clone(), def.shift_up(z))?;
    let down_rhs = def.q().try_div(z)?.neg().mul(&base);
    let up_rhs = def.q().mul(z).try_inv()?.neg().mul(&base);
    Ok(down == down_rhs && up == up_rhs)
}

/// K_n(x̄q⁻²|ȳ) = (−q)ⁿ f⁻¹(ȳ,x̄) K_n(ȳ|x̄) and K_n(x̄|ȳq²) = (−q)⁻ⁿ f⁻¹(ȳ,x̄) K_n(ȳ|x̄).
pub fn inverse_order<F: Scalar>(def: &Deformation<F>, xs: &[F], ys: &[F]) -> Result<bool> {
    let n = xs.len() as i32;
    let down: Vec<F> = xs.iter().map(|x| def.shift_down(x)).collect();
    let up: Vec<F> = ys.iter().map(|y| def.shift_up(y)).collect();
    let swapped = izergin_k(def, ys, xs)?.try_div(&f_prod(def, ys, xs)?)?;
    let first = izergin_k(def, &down, ys)? == minus_q_pow(def, n)?.mul(&swapped);
    let second = izergin_k(def, xs, &up)? == minus_q_pow(def, -n)?.mul(&swapped);
    Ok(first && second)
}

/// The same reversal for the modified determinants:
/// K^(r)_n(x̄q⁻²|ȳ) = (−q)ⁿ f⁻¹(ȳ,x̄) K^(l)_n(ȳ|x̄),
/// K^(l)_n(x̄|ȳq²) = (−q)⁻ⁿ f⁻¹(ȳ,x̄) K^(r)_n(ȳ|x̄).
pub fn inverse_order_modified<F: Scalar>(def: &Deformation<F>, xs: &[F], ys: &[F]) -> Result<bool> {
    let n = xs.len() as i32;
    let down: Vec<F> = xs.iter().map(|x| def.shift_down(x)).collect();
    let up: Vec<F> = ys.iter().map(|y| def.shift_up(y)).collect();
    let f_inv = f_prod(def, ys, xs)?.try_inv()?;
    let first = izergin_kr(def, &down, ys)? == minus_q_pow(def, n)?.mul(&f_inv).mul(&izergin_kl(def, ys, xs)?);
    let second = izergin_kl(def, xs, &up)? == minus_q_pow(def, -n)?.mul(&f_inv).mul(&izergin_kr(def, ys, xs)?);
    Ok(first && second)
}

/// Outcome of the residue check at x_n → y_n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResidueCheck {
    /// K_n itself is singular at the point.
    pub k_is_singular: bool,
    /// The residue f(y_n,ȳ_n)f(x̄_n,y_n)K_{n−1}(x̄_n|ȳ_n) vanishes exactly, so
    /// K_n must be regular there.
    pub residue_vanishes: bool,
    /// K_n minus the stated pole part has a finite limit.
    pub remainder_is_regular: bool,
}

impl ResidueCheck {
    pub fn holds(&self) -> bool {
        self.k_is_singular != self.residue_vanishes && self.remainder_is_regular
    }
}

/// K_n(x̄|ȳ) − g(x_n,y_n)f(y_n,ȳ_n)f(x̄_n,x_n)K_{n−1}(x̄_n|ȳ_n) stays finite as
/// x_n → y_n. Evaluated in a regulated field at x_n = y_n(1 + ε); the given
/// x_n is ignored.
pub fn residue_regularity<R: Regulator>(
    q: &ExactScalar,
    xs: &[ExactScalar],
    ys: &[ExactScalar],
) -> Result<ResidueCheck> {
    let n = xs.len();
    let def: Deformation<R> = Deformation::new(R::from_exact(q))?;
    let mut x: Vec<R> = xs.iter().map(R::from_exact).collect();
    let y: Vec<R> = ys.iter().map(R::from_exact).collect();
    x[n - 1] = R::lift(&ys[n - 1], &ExactScalar::from_integer(1.into()));
    let (xn, yn) = (&x[n - 1], &y[n - 1]);
    let (x_rest, y_rest) = (&x[..n - 1], &y[..n - 1]);
    let k = izergin_k(&def, &x, &y)?;
    let pole = def
        .g(xn, yn)?
        .mul(&f_prod(&def, std::slice::from_ref(yn), y_rest)?)
        .mul(&f_prod(&def, x_rest, std::slice::from_ref(xn))?)
        .mul(&izergin_k(&def, x_rest, y_rest)?);
    let exact: Deformation<ExactScalar> = Deformation::new(q.clone())?;
    let yn_exact = std::slice::from_ref(&ys[n - 1]);
    let residue = f_prod(&exact, yn_exact, &ys[..n - 1])?
        .mul(&f_prod(&exact, &xs[..n - 1], yn_exact)?)
        .mul(&izergin_k(&exact, &xs[..n - 1], &ys[..n - 1])?);
    Ok(ResidueCheck {
        residue_vanishes: residue.is_zero(),
        k_is_singular: k.eval_at_zero().is_err(),
        remainder_is_regular: k.sub(&pole).eval_at_zero().is_ok(),
    })
}

/// The three closed forms of the summation lemma, each compared with the
/// partition sum over γ̄ ⇒ {γ̄_I, γ̄_II}, #γ̄_I = #ᾱ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SummationCheck {
    /// Σ K(γ_I|α)K(β|γ_II)f(γ_II,γ_I) = (−q)^{−m₁} f(γ,α) K({αq⁻², β}|γ)
    pub first_form: bool,
    /// … = (−q)^{m₂} f(β,γ) K(γ|{α, βq²})
    pub second_form: bool,
    /// Σ K^(l)(γ_I|α)K^(r)(β|γ_II)f(γ_II,γ_I) = (−q)^{m₂} f(β,γ) K^(l)(γ|{α, βq²})
    pub modified_form: bool,
}

impl SummationCheck {
    pub fn holds(&self) -> bool {
        self.first_form && self.second_form && self.modified_form
    }
}

pub fn summation_lemma<F: Scalar>(
    def: &Deformation<F>,
    alpha: &[F],
    beta: &[F],
    gamma: &[F],
) -> Result<SummationCheck> {
    let (m1, m2) = (alpha.len(), beta.len());
    let mut plain = F::zero();
    let mut modified = F::zero();
    for parts in partition_indices(gamma.len(), &[m1, m2])? {
        let (g1, g2) = (pick(gamma, &parts[0]), pick(gamma, &parts[1]));
        let f = f_prod(def, &g2, &g1)?;
        plain = plain.add(&izergin_k(def, &g1, alpha)?.mul(&izergin_k(def, beta, &g2)?).mul(&f));
        modified = modified.add(&izergin_kl(def, &g1, alpha)?.mul(&izergin_kr(def, beta, &g2)?).mul(&f));
    }
    let down: Vec<F> = alpha.iter().map(|a| def.shift_down(a)).chain(beta.iter().cloned()).collect();
    let up: Vec<F> = alpha.iter().cloned().chain(beta.iter().map(|b| def.shift_up(b))).collect();
    let first = minus_q_pow(def, -(m1 as i32))?.mul(&f_prod(def, gamma, alpha)?).mul(&izergin_k(def, &down, gamma)?);
    let pref = minus_q_pow(def, m2 as i32)?.mul(&f_prod(def, beta, gamma)?);
    let second = pref.mul(&izergin_k(def, gamma, &up)?);
    let lr = pref.mul(&izergin_kl(def, gamma, &up)?);
    Ok(SummationCheck { first_form: plain == first, second_form: plain == second, modified_form: modified == lr })
}

/// K^(r)₁(w|v)K^(r)₁(v|u) + K^(l)₁(u|w)K^(r)₁(w|v) + K^(l)₁(u|w)K^(l)₁(v|u) = 0.
pub fn three_term<F: Scalar>(def: &Deformation<F>, u: &F, v: &F, w: &F) -> Result<bool> {
    let kr = |x: &F, y: &F| izergin_kr(def, std::slice::from_ref(x), std::slice::from_ref(y));
    let kl = |x: &F, y: &F| izergin_kl(def, std::slice::from_ref(x), std::slice::from_ref(y));
    let sum = kr(w, v)?.mul(&kr(v, u)?).add(&kl(u, w)?.mul(&kr(w, v)?)).add(&kl(u, w)?.mul(&kl(v, u)?));
    Ok(sum.is_zero())
}
