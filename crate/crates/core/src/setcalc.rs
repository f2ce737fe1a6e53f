//! Spectral-parameter sets, the double-product shorthand and partition enumeration.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::rmatrix::Deformation;
use crate::scalars::Scalar;

/// An ordered list of pairwise distinct spectral parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSet<F> {
    elements: Vec<F>,
}

impl<F> Deref for SpectralSet<F> {
    type Target = [F];
    fn deref(&self) -> &[F] {
        &self.elements
    }
}

impl<F> Default for SpectralSet<F> {
    fn default() -> Self {
        SpectralSet { elements: Vec::new() }
    }
}

impl<F: Scalar> SpectralSet<F> {
    pub fn new(elements: Vec<F>) -> Result<Self> {
        for (i, x) in elements.iter().enumerate() {
            if elements[i + 1..].iter().any(|y| x.coincides(y)) {
                return Err(Error::NotDistinct);
            }
        }
        Ok(SpectralSet { elements })
    }

    pub fn empty() -> Self {
        SpectralSet { elements: Vec::new() }
    }

    pub fn into_vec(self) -> Vec<F> {
        self.elements
    }

    /// The set with its `i`-th element removed.
    pub fn without(&self, i: usize) -> Self {
        let mut elements = self.elements.clone();
        elements.remove(i);
        SpectralSet { elements }
    }

    /// Elements before position `j`.
    pub fn prefix(&self, j: usize) -> Self {
        SpectralSet { elements: self.elements[..j].to_vec() }
    }

    /// Elements after position `j`.
    pub fn suffix(&self, j: usize) -> Self {
        SpectralSet { elements: self.elements[(j + 1).min(self.len())..].to_vec() }
    }

    /// Disjoint union, `self` first.
    pub fn union(&self, other: &Self) -> Result<Self> {
        let mut elements = self.elements.clone();
        elements.extend(other.elements.iter().cloned());
        Self::new(elements)
    }

    /// Every element multiplied by `alpha`.
    pub fn scaled(&self, alpha: &F) -> Self {
        SpectralSet { elements: self.elements.iter().map(|x| x.mul(alpha)).collect() }
    }

    /// Selects the elements at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        SpectralSet { elements: indices.iter().map(|&i| self.elements[i].clone()).collect() }
    }
}

/// ∏_{x∈x̄} ∏_{y∈ȳ} f(x,y); 1 if either side is empty.
pub fn f_prod<F: Scalar>(def: &Deformation<F>, xs: &[F], ys: &[F]) -> Result<F> {
    let mut acc = F::one();
    for x in xs {
        for y in ys {
            acc = acc.mul(&def.f(x, y)?);
        }
    }
    Ok(acc)
}

/// ∏_{x∈x̄} ∏_{y∈ȳ} g(x,y); 1 if either side is empty.
pub fn g_prod<F: Scalar>(def: &Deformation<F>, xs: &[F], ys: &[F]) -> Result<F> {
    let mut acc = F::one();
    for x in xs {
        for y in ys {
            acc = acc.mul(&def.g(x, y)?);
        }
    }
    Ok(acc)
}

/// One way of splitting a set into labeled parts.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionAssignment<F> {
    pub parts: Vec<SpectralSet<F>>,
}

/// Every split of `0..n` into parts of the given sizes, as index lists.
///
/// Parts keep source order; the outer order is lexicographic in the choice
/// of the first part, then the second, and so on.
pub fn partition_indices(n: usize, sizes: &[usize]) -> Result<Vec<Vec<Vec<usize>>>> {
    let total: usize = sizes.iter().sum();
    if total != n {
        return Err(Error::SizeMismatch { expected: n, got: total });
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(sizes.len());
    split(&(0..n).collect::<Vec<_>>(), sizes, &mut current, &mut out);
    Ok(out)
}

fn split(pool: &[usize], sizes: &[usize], current: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
    let Some((&k, rest_sizes)) = sizes.split_first() else {
        out.push(current.clone());
        return;
    };
    for chosen in combinations(pool.len(), k) {
        let part: Vec<usize> = chosen.iter().map(|&i| pool[i]).collect();
        let rest: Vec<usize> = (0..pool.len()).filter(|i| !chosen.contains(i)).map(|i| pool[i]).collect();
        current.push(part);
        split(&rest, rest_sizes, current, out);
        current.pop();
    }
}

/// k-subsets of 0..n in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn enumerate_partitions<F: Scalar>(s: &SpectralSet<F>, sizes: &[usize]) -> Result<Vec<PartitionAssignment<F>>> {
    Ok(partition_indices(s.len(), sizes)?
        .into_iter()
        .map(|parts| PartitionAssignment { parts: parts.iter().map(|p| s.select(p)).collect() })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::ExactScalar;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn r(n: i64) -> ExactScalar {
        BigRational::from_integer(n.into())
    }

    fn set(xs: &[i64]) -> SpectralSet<ExactScalar> {
        SpectralSet::new(xs.iter().map(|&x| r(x)).collect()).unwrap()
    }

    fn multinomial(sizes: &[usize]) -> usize {
        let fact = |n: usize| (1..=n).product::<usize>();
        fact(sizes.iter().sum()) / sizes.iter().map(|&k| fact(k)).product::<usize>()
    }

    #[test]
    fn partition_examples() {
        let ab = set(&[1, 2]);
        let parts = enumerate_partitions(&ab, &[1, 1]).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].parts, vec![set(&[1]), set(&[2])]);
        assert_eq!(parts[1].parts, vec![set(&[2]), set(&[1])]);
        assert_eq!(enumerate_partitions(&set(&[1, 2, 3]), &[1, 2]).unwrap().len(), 3);
        assert_eq!(enumerate_partitions(&set(&[1, 2, 3, 4]), &[1, 1, 2]).unwrap().len(), 12);
        assert_eq!(enumerate_partitions(&ab, &[1, 2]).unwrap_err(), Error::SizeMismatch { expected: 2, got: 3 });
    }

    #[test]
    fn set_operations() {
        let s = set(&[4, 5, 6, 7]);
        assert_eq!(s.without(1), set(&[4, 6, 7]));
        assert_eq!(s.prefix(2), set(&[4, 5]));
        assert_eq!(s.suffix(1), set(&[6, 7]));
        assert_eq!(set(&[1]).union(&set(&[2])).unwrap(), set(&[1, 2]));
        assert_eq!(set(&[1]).union(&set(&[1])).unwrap_err(), Error::NotDistinct);
        assert!(SpectralSet::new(vec![r(3), r(3)]).is_err());
    }

    #[test]
    fn f_prod_examples() {
        let def = Deformation::new(r(2)).unwrap();
        assert_eq!(f_prod(&def, &[], &set(&[1, 2])).unwrap(), r(1));
        assert_eq!(f_prod(&def, &[r(3)], &[r(1)]).unwrap(), BigRational::new(11.into(), 4.into()));
        assert!(f_prod(&def, &[r(3)], &[r(3)]).is_err());
    }

    proptest! {
        #[test]
        fn partition_count_is_multinomial(sizes in prop::collection::vec(0usize..3, 1..4)) {
            let n: usize = sizes.iter().sum();
            let parts = partition_indices(n, &sizes).unwrap();
            prop_assert_eq!(parts.len(), multinomial(&sizes));
            for p in &parts {
                let mut all: Vec<usize> = p.concat();
                all.sort();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                for (part, &k) in p.iter().zip(&sizes) {
                    prop_assert_eq!(part.len(), k);
                    prop_assert!(part.windows(2).all(|w| w[0] < w[1]));
                }
            }
            prop_assert_eq!(parts, partition_indices(n, &sizes).unwrap());
        }

        #[test]
        fn f_prod_splits_over_unions(xs in prop::collection::vec(1i64..40, 1..3), ys in prop::collection::vec(41i64..80, 0..3), zs in prop::collection::vec(81i64..120, 0..3)) {
            let def = Deformation::new(BigRational::new(3.into(), 7.into())).unwrap();
            let (xs, ys, zs): (Vec<_>, Vec<_>, Vec<_>) =
                (xs.into_iter().map(r).collect(), ys.into_iter().map(r).collect(), zs.into_iter().map(r).collect());
            let joint: Vec<_> = ys.iter().chain(&zs).cloned().collect();
            prop_assert_eq!(
                f_prod(&def, &xs, &joint).unwrap(),
                f_prod(&def, &xs, &ys).unwrap() * f_prod(&def, &xs, &zs).unwrap()
            );
        }
    }
}
