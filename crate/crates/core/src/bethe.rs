//! Off-shell Bethe vectors and dual Bethe vectors built from monodromy entries.
//!
//! B^{a,b}(ū;v̄) = Σ K^(r)_k(v̄_I|ū_I) / (λ₂(ū_II)λ₂(v̄)) · f(v̄_II,v̄_I)f(ū_I,ū_II)/f(v̄,ū)
//!                · T₁₃(v̄_I)T₂₃(v̄_II)T₁₂(ū_II)|0⟩,
//!
//! summed over ū ⇒ {ū_I, ū_II}, v̄ ⇒ {v̄_I, v̄_II} with #ū_I = #v̄_I = k. The
//! dual vector uses K^(l) and ⟨0|T₂₁(ū_II)T₃₂(v̄_II)T₃₁(v̄_I).

use crate::chain::{dual_vacuum, vacuum, ChainSpec, MonodromyCache, StateVector};
use crate::error::Result;
use crate::izergin::{izergin_kl, izergin_kr};
use crate::scalars::Scalar;
use crate::setcalc::{f_prod, partition_indices, SpectralSet};

/// Identifies B^{a,b}(ū;v̄): a = #ū, b = #v̄.
#[derive(Clone, Debug, PartialEq)]
pub struct BetheLabel<F> {
    pub u: SpectralSet<F>,
    pub v: SpectralSet<F>,
}

impl<F: Scalar> BetheLabel<F> {
    pub fn new(u: Vec<F>, v: Vec<F>) -> Result<Self> {
        Ok(BetheLabel { u: SpectralSet::new(u)?, v: SpectralSet::new(v)? })
    }

    pub fn vacuum() -> Self {
        BetheLabel { u: SpectralSet::empty(), v: SpectralSet::empty() }
    }

    pub fn a(&self) -> usize {
        self.u.len()
    }

    pub fn b(&self) -> usize {
        self.v.len()
    }

    /// Whether the weight (N−a, a−b, b) can be realized on `sites` sites.
    pub fn feasible(&self, sites: usize) -> bool {
        self.b() <= self.a() && self.a() <= sites
    }
}

fn pick<F: Clone>(xs: &[F], idx: &[usize]) -> Vec<F> {
    idx.iter().map(|&i| xs[i].clone()).collect()
}

/// Which family of monodromy entries a construction uses.
#[derive(Clone, Copy)]
enum Side {
    /// T₁₂, T₂₃, T₁₃ acting on |0⟩.
    Right,
    /// T₂₁, T₃₂, T₃₁ acting on ⟨0|.
    Left,
}

fn build<F: Scalar>(side: Side, label: &BetheLabel<F>, cache: &mut MonodromyCache<F>) -> Result<StateVector<F>> {
    let chain = cache.chain().clone();
    let dim = chain.dim();
    if !label.feasible(chain.sites()) {
        return Ok(StateVector::zero(dim));
    }
    let def = chain.deformation();
    let (us, vs) = (&label.u[..], &label.v[..]);
    let (a, b) = (us.len(), vs.len());
    let common = f_prod(def, vs, us)?.mul(&chain.lambda2_set(vs)).try_inv()?;
    let apply = |cache: &mut MonodromyCache<F>, ij: (usize, usize), xs: &[F], mut vec: StateVector<F>| {
        for x in xs {
            let t = cache.get(x)?;
            vec = match side {
                Side::Right => t.apply(ij.0, ij.1, &vec),
                Side::Left => t.apply_left(ij.1, ij.0, &vec),
            };
        }
        Ok::<_, crate::Error>(vec)
    };
    let start = match side {
        Side::Right => vacuum(&chain),
        Side::Left => dual_vacuum(&chain),
    };
    let mut out = StateVector::zero(dim);
    for k in 0..=a.min(b) {
        for u_parts in partition_indices(a, &[k, a - k])? {
            let (u1, u2) = (pick(us, &u_parts[0]), pick(us, &u_parts[1]));
            let u_coef = f_prod(def, &u1, &u2)?.try_div(&chain.lambda2_set(&u2))?;
            let base = apply(cache, (1, 2), &u2, start.clone())?;
            if base.is_zero() {
                continue;
            }
            for v_parts in partition_indices(b, &[k, b - k])? {
                let (v1, v2) = (pick(vs, &v_parts[0]), pick(vs, &v_parts[1]));
                let k_factor = match side {
                    Side::Right => izergin_kr(def, &v1, &u1)?,
                    Side::Left => izergin_kl(def, &v1, &u1)?,
                };
                let coef = k_factor.mul(&f_prod(def, &v2, &v1)?).mul(&u_coef).mul(&common);
                if coef.is_zero() {
                    continue;
                }
                let vec = apply(cache, (2, 3), &v2, base.clone())?;
                let vec = apply(cache, (1, 3), &v1, vec)?;
                out.add_scaled(&coef, &vec);
            }
        }
    }
    Ok(out)
}

/// B^{a,b}(ū;v̄) as a vector; the zero vector when b > a or a > N.
pub fn build_bethe<F: Scalar>(label: &BetheLabel<F>, cache: &mut MonodromyCache<F>) -> Result<StateVector<F>> {
    build(Side::Right, label, cache)
}

/// C^{a,b}(ū;v̄) as a row vector; the zero vector when b > a or a > N.
pub fn build_dual_bethe<F: Scalar>(label: &BetheLabel<F>, cache: &mut MonodromyCache<F>) -> Result<StateVector<F>> {
    build(Side::Left, label, cache)
}

/// One-shot convenience wrappers with a private cache.
pub fn bethe_vector<F: Scalar>(label: &BetheLabel<F>, chain: &ChainSpec<F>) -> Result<StateVector<F>> {
    build_bethe(label, &mut MonodromyCache::new(chain.clone()))
}

pub fn dual_bethe_vector<F: Scalar>(label: &BetheLabel<F>, chain: &ChainSpec<F>) -> Result<StateVector<F>> {
    build_dual_bethe(label, &mut MonodromyCache::new(chain.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{basis_weight, build_monodromy};
    use crate::scalars::ExactScalar;
    use num_rational::BigRational;

    fn r(n: i64, d: i64) -> ExactScalar {
        BigRational::new(n.into(), d.into())
    }

    fn chain(twist: Option<ExactScalar>) -> ChainSpec<ExactScalar> {
        ChainSpec::new(vec![r(3, 2), r(-2, 5), r(7, 3)], r(5, 3), twist).unwrap()
    }

    #[test]
    fn low_order_specializations() {
        let ch = chain(Some(r(-4, 3)));
        let def = ch.deformation();
        let (u, v) = (r(9, 7), r(-11, 4));
        let (tu, tv) = (build_monodromy(&ch, &u).unwrap(), build_monodromy(&ch, &v).unwrap());
        let vac = vacuum(&ch);
        let dual = dual_vacuum(&ch);

        assert_eq!(bethe_vector(&BetheLabel::vacuum(), &ch).unwrap(), vac);
        assert_eq!(dual_bethe_vector(&BetheLabel::vacuum(), &ch).unwrap(), dual);

        let b10 = bethe_vector(&BetheLabel::new(vec![u.clone()], vec![]).unwrap(), &ch).unwrap();
        assert_eq!(b10, tu.apply(1, 2, &vac));
        let c10 = dual_bethe_vector(&BetheLabel::new(vec![u.clone()], vec![]).unwrap(), &ch).unwrap();
        assert_eq!(c10, tu.apply_left(2, 1, &dual));

        // B^{0,1} is infeasible in the weight sense and vanishes; T₂₃|0⟩ = 0 agrees.
        let b01 = bethe_vector(&BetheLabel::new(vec![], vec![v.clone()]).unwrap(), &ch).unwrap();
        assert!(b01.is_zero());
        assert!(tv.apply(2, 3, &vac).is_zero());

        let label = BetheLabel::new(vec![u.clone()], vec![v.clone()]).unwrap();
        let f_vu = def.f(&v, &u).unwrap();
        let kr = izergin_kr(def, std::slice::from_ref(&v), std::slice::from_ref(&u)).unwrap();
        let kl = izergin_kl(def, std::slice::from_ref(&v), std::slice::from_ref(&u)).unwrap();
        let expected = tv.apply(2, 3, &tu.apply(1, 2, &vac)).add(&tv.apply(1, 3, &vac).scale(&kr)).scale(&f_vu.recip());
        assert_eq!(bethe_vector(&label, &ch).unwrap(), expected);
        let expected_dual = tv
            .apply_left(3, 2, &tu.apply_left(2, 1, &dual))
            .add(&tv.apply_left(3, 1, &dual).scale(&kl))
            .scale(&f_vu.recip());
        assert_eq!(dual_bethe_vector(&label, &ch).unwrap(), expected_dual);
    }

    #[test]
    fn weight_and_infeasible_shapes() {
        let ch = chain(None);
        let us = [r(9, 7), r(-1, 6), r(5, 11)];
        let vs = [r(-11, 4), r(2, 9)];
        for (a, b) in [(1, 0), (1, 1), (2, 1), (2, 2), (3, 1)] {
            let label = BetheLabel::new(us[..a].to_vec(), vs[..b].to_vec()).unwrap();
            let vec = bethe_vector(&label, &ch).unwrap();
            assert!(!vec.is_zero(), "({a},{b})");
            for i in vec.support() {
                assert_eq!(basis_weight(i, 3), [3 - a, a - b, b]);
            }
        }
        let too_many = BetheLabel::new(vec![r(1, 2)], vs.to_vec()).unwrap();
        assert!(bethe_vector(&too_many, &ch).unwrap().is_zero());
    }

    #[test]
    fn permutation_invariance() {
        let ch = chain(Some(r(2, 5)));
        let label = BetheLabel::new(vec![r(9, 7), r(-1, 6)], vec![r(-11, 4), r(2, 9)]).unwrap();
        let swapped = BetheLabel::new(vec![r(-1, 6), r(9, 7)], vec![r(2, 9), r(-11, 4)]).unwrap();
        assert_eq!(bethe_vector(&label, &ch).unwrap(), bethe_vector(&swapped, &ch).unwrap());
        assert_eq!(dual_bethe_vector(&label, &ch).unwrap(), dual_bethe_vector(&swapped, &ch).unwrap());
    }
}
