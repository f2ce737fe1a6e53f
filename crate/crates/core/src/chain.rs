//! Inhomogeneous chain of fundamental sites and its monodromy matrix.
//!
//! T(u) = R₀N(u,z_N)···R₀₁(u,z₁): site 1 acts first. Basis states of the
//! quantum space are strings of site states in {1,2,3}; site 1 is the most
//! significant base-3 digit, so the vacuum (all sites in state 1) is index 0.

use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rmatrix::Deformation;
use crate::scalars::{product, Scalar};
use crate::setcalc::SpectralSet;

/// Sparse square matrix stored by columns, rows sorted, no explicit zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<F> {
    dim: usize,
    cols: Vec<Vec<(usize, F)>>,
}

fn merge_column<F: Scalar>(mut entries: Vec<(usize, F)>) -> Vec<(usize, F)> {
    entries.sort_by_key(|(r, _)| *r);
    let mut out: Vec<(usize, F)> = Vec::with_capacity(entries.len());
    for (r, x) in entries {
        match out.last_mut() {
            Some((lr, lx)) if *lr == r => *lx = lx.add(&x),
            _ => out.push((r, x)),
        }
    }
    out.retain(|(_, x)| !x.is_zero());
    out
}

impl<F: Scalar> SparseMatrix<F> {
    pub fn zero(dim: usize) -> Self {
        SparseMatrix { dim, cols: vec![Vec::new(); dim] }
    }

    pub fn identity(dim: usize) -> Self {
        SparseMatrix { dim, cols: (0..dim).map(|c| vec![(c, F::one())]).collect() }
    }

    fn from_columns(dim: usize, cols: Vec<Vec<(usize, F)>>) -> Self {
        SparseMatrix { dim, cols: cols.into_iter().map(merge_column).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> F {
        self.cols[col].iter().find(|(r, _)| *r == row).map(|(_, x)| x.clone()).unwrap_or_else(F::zero)
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    /// M·x
    pub fn apply(&self, x: &StateVector<F>) -> StateVector<F> {
        let mut y = vec![F::zero(); self.dim];
        for (c, xc) in x.iter().enumerate() {
            if xc.is_zero() {
                continue;
            }
            for (r, m) in &self.cols[c] {
                y[*r] = y[*r].add(&m.mul(xc));
            }
        }
        StateVector(y)
    }

    /// x·M for a row vector x.
    pub fn apply_left(&self, x: &StateVector<F>) -> StateVector<F> {
        StateVector(
            self.cols
                .iter()
                .map(|col| {
                    col.iter().filter(|(r, _)| !x[*r].is_zero()).fold(F::zero(), |acc, (r, m)| acc.add(&x[*r].mul(m)))
                })
                .collect(),
        )
    }

    /// self · rhs
    pub fn mul(&self, rhs: &Self) -> Self {
        let cols = rhs
            .cols
            .iter()
            .map(|col| {
                let mut acc: Vec<(usize, F)> = Vec::new();
                for (k, b) in col {
                    for (r, a) in &self.cols[*k] {
                        acc.push((*r, a.mul(b)));
                    }
                }
                acc
            })
            .collect();
        Self::from_columns(self.dim, cols)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let cols = self.cols.iter().zip(&rhs.cols).map(|(a, b)| a.iter().chain(b).cloned().collect()).collect();
        Self::from_columns(self.dim, cols)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&F::one().neg()))
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        SparseMatrix {
            dim: self.dim,
            cols: self.cols.iter().map(|col| col.iter().map(|(r, x)| (*r, x.mul(c))).collect()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }
}

/// A vector of the quantum space (or a covector, when used as a row).
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<F>(pub Vec<F>);

impl<F> Deref for StateVector<F> {
    type Target = Vec<F>;
    fn deref(&self) -> &Vec<F> {
        &self.0
    }
}

impl<F> DerefMut for StateVector<F> {
    fn deref_mut(&mut self) -> &mut Vec<F> {
        &mut self.0
    }
}

impl<F: Scalar> StateVector<F> {
    pub fn zero(dim: usize) -> Self {
        StateVector(vec![F::zero(); dim])
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[i] = F::one();
        v
    }

    pub fn add(&self, rhs: &Self) -> Self {
        StateVector(self.iter().zip(rhs.iter()).map(|(a, b)| a.add(b)).collect())
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        StateVector(self.iter().zip(rhs.iter()).map(|(a, b)| a.sub(b)).collect())
    }

    /// self += c·rhs
    pub fn add_scaled(&mut self, c: &F, rhs: &Self) {
        if c.is_zero() {
            return;
        }
        for (a, b) in self.0.iter_mut().zip(rhs.iter()) {
            if !b.is_zero() {
                *a = a.add(&c.mul(b));
            }
        }
    }

    pub fn scale(&self, c: &F) -> Self {
        StateVector(self.iter().map(|a| a.mul(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.iter().all(Scalar::is_zero)
    }

    /// Σ self_i · rhs_i (bilinear, no conjugation).
    pub fn dot(&self, rhs: &Self) -> F {
        self.iter().zip(rhs.iter()).fold(F::zero(), |acc, (a, b)| acc.add(&a.mul(b)))
    }

    /// Indices of nonzero coordinates.
    pub fn support(&self) -> Vec<usize> {
        self.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, _)| i).collect()
    }

    pub fn map<G>(&self, f: impl Fn(&F) -> G) -> StateVector<G> {
        StateVector(self.iter().map(f).collect())
    }
}

/// The concrete model: inhomogeneities, deformation and an optional twist
/// diag(1, 1, c) multiplying every site operator.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec<F> {
    z: SpectralSet<F>,
    deformation: Deformation<F>,
    twist: Option<F>,
}

impl<F: Scalar> ChainSpec<F> {
    pub fn new(z: Vec<F>, q: F, twist: Option<F>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::Precondition("a chain needs at least one site".into()));
        }
        if z.iter().any(Scalar::is_zero) {
            return Err(Error::Precondition("inhomogeneities must be nonzero".into()));
        }
        if twist.as_ref().is_some_and(Scalar::is_zero) {
            return Err(Error::Precondition("twist constant must be nonzero".into()));
        }
        Ok(ChainSpec { z: SpectralSet::new(z)?, deformation: Deformation::new(q)?, twist })
    }

    pub fn sites(&self) -> usize {
        self.z.len()
    }

    pub fn dim(&self) -> usize {
        3usize.pow(self.sites() as u32)
    }

    pub fn inhomogeneities(&self) -> &SpectralSet<F> {
        &self.z
    }

    pub fn deformation(&self) -> &Deformation<F> {
        &self.deformation
    }

    pub fn twist(&self) -> Option<&F> {
        self.twist.as_ref()
    }

    /// The same chain over another field.
    pub fn lift<G: Scalar>(&self, conv: impl Fn(&F) -> G) -> ChainSpec<G> {
        ChainSpec {
            z: SpectralSet::new(self.z.iter().map(&conv).collect()).expect("lifting preserves distinctness"),
            deformation: self.deformation.lift(&conv),
            twist: self.twist.as_ref().map(&conv),
        }
    }

    pub fn lambda1(&self, u: &F) -> Result<F> {
        let mut acc = F::one();
        for z in self.z.iter() {
            acc = acc.mul(&self.deformation.f(u, z)?);
        }
        Ok(acc)
    }

    pub fn lambda2(&self, _u: &F) -> F {
        F::one()
    }

    pub fn lambda3(&self, _u: &F) -> F {
        match &self.twist {
            Some(c) => product(std::iter::repeat_n(c, self.sites())),
            None => F::one(),
        }
    }

    /// r₁(u) = λ₁(u)/λ₂(u)
    pub fn r1(&self, u: &F) -> Result<F> {
        self.lambda1(u)?.try_div(&self.lambda2(u))
    }

    /// r₃(u) = λ₃(u)/λ₂(u)
    pub fn r3(&self, u: &F) -> Result<F> {
        self.lambda3(u).try_div(&self.lambda2(u))
    }

    /// Products of r₁, r₃, λ₂ over a set (empty set gives 1).
    pub fn r1_set(&self, xs: &[F]) -> Result<F> {
        xs.iter().try_fold(F::one(), |acc, x| Ok(acc.mul(&self.r1(x)?)))
    }

    pub fn r3_set(&self, xs: &[F]) -> Result<F> {
        xs.iter().try_fold(F::one(), |acc, x| Ok(acc.mul(&self.r3(x)?)))
    }

    pub fn lambda2_set(&self, xs: &[F]) -> F {
        xs.iter().fold(F::one(), |acc, x| acc.mul(&self.lambda2(x)))
    }
}

/// All nine blocks T_ij(u) as D×D matrices.
#[derive(Clone, Debug)]
pub struct Monodromy<F> {
    u: F,
    dim: usize,
    blocks: Vec<SparseMatrix<F>>,
}

impl<F: Scalar> Monodromy<F> {
    pub fn argument(&self) -> &F {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// T_ij(u), 1-based indices.
    pub fn block(&self, i: usize, j: usize) -> &SparseMatrix<F> {
        assert!((1..=3).contains(&i) && (1..=3).contains(&j), "monodromy index out of range");
        &self.blocks[3 * (i - 1) + (j - 1)]
    }

    pub(crate) fn block0(&self, i: usize, j: usize) -> &SparseMatrix<F> {
        &self.blocks[3 * i + j]
    }

    /// T_ij(u)·x
    pub fn apply(&self, i: usize, j: usize, x: &StateVector<F>) -> StateVector<F> {
        self.block(i, j).apply(x)
    }

    /// x·T_ij(u) for a covector x.
    pub fn apply_left(&self, i: usize, j: usize, x: &StateVector<F>) -> StateVector<F> {
        self.block(i, j).apply_left(x)
    }

    /// The transfer matrix t(u) = T₁₁ + T₂₂ + T₃₃.
    pub fn transfer(&self) -> SparseMatrix<F> {
        self.block(1, 1).add(self.block(2, 2)).add(self.block(3, 3))
    }
}

/// Builds T(u) by pushing every basis column through the sites.
pub fn build_monodromy<F: Scalar>(chain: &ChainSpec<F>, u: &F) -> Result<Monodromy<F>> {
    let def = chain.deformation();
    let n = chain.sites();
    let dim = chain.dim();
    // Per-site coefficients: f(u,z) on the diagonal, u·g / z·g on exchanges.
    let sites: Vec<(F, F, F)> = chain
        .inhomogeneities()
        .iter()
        .map(|z| {
            let g = def.g(u, z)?;
            Ok((def.f(u, z)?, u.mul(&g), z.mul(&g)))
        })
        .collect::<Result<_>>()?;
    let twist = chain.twist();
    let mut cols: Vec<Vec<Vec<(usize, F)>>> = vec![vec![Vec::new(); dim]; 9];
    for col in 0..dim {
        for j in 0..3 {
            let mut states: Vec<(usize, usize, F)> = vec![(j, col, F::one())];
            for (s, (fz, ug, zg)) in sites.iter().enumerate() {
                let place = 3usize.pow((n - 1 - s) as u32);
                let mut next: Vec<(usize, usize, F)> = Vec::with_capacity(states.len() * 2);
                for (a, idx, coef) in states {
                    let coef = match twist {
                        Some(c) if a == 2 => coef.mul(c),
                        _ => coef,
                    };
                    let d = (idx / place) % 3;
                    if a == d {
                        next.push((a, idx, coef.mul(fz)));
                    } else {
                        let swapped = idx - d * place + a * place;
                        let w = if d < a { ug } else { zg };
                        next.push((d, swapped, coef.mul(w)));
                        next.push((a, idx, coef));
                    }
                }
                next.sort_by_key(|(a, idx, _)| (*a, *idx));
                states = Vec::with_capacity(next.len());
                for (a, idx, c) in next {
                    match states.last_mut() {
                        Some((la, li, lc)) if *la == a && *li == idx => *lc = lc.add(&c),
                        _ => states.push((a, idx, c)),
                    }
                }
            }
            for (i, row, coef) in states {
                cols[3 * i + j][col].push((row, coef));
            }
        }
    }
    let blocks = cols.into_iter().map(|c| SparseMatrix::from_columns(dim, c)).collect();
    Ok(Monodromy { u: u.clone(), dim, blocks })
}

/// |0⟩: every site in state 1.
pub fn vacuum<F: Scalar>(chain: &ChainSpec<F>) -> StateVector<F> {
    StateVector::basis(chain.dim(), 0)
}

/// ⟨0| as a row vector.
pub fn dual_vacuum<F: Scalar>(chain: &ChainSpec<F>) -> StateVector<F> {
    StateVector::basis(chain.dim(), 0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VacuumEigenvalues<F> {
    pub lambda1: F,
    pub lambda2: F,
    pub lambda3: F,
    pub r1: F,
    pub r3: F,
}

pub fn vacuum_eigenvalues<F: Scalar>(chain: &ChainSpec<F>, u: &F) -> Result<VacuumEigenvalues<F>> {
    Ok(VacuumEigenvalues {
        lambda1: chain.lambda1(u)?,
        lambda2: chain.lambda2(u),
        lambda3: chain.lambda3(u),
        r1: chain.r1(u)?,
        r3: chain.r3(u)?,
    })
}

/// Site-state weight of a basis index: counts of sites in states 1, 2, 3.
pub fn basis_weight(index: usize, sites: usize) -> [usize; 3] {
    let mut counts = [0; 3];
    let mut x = index;
    for _ in 0..sites {
        counts[x % 3] += 1;
        x /= 3;
    }
    counts
}

/// Monodromies keyed by spectral parameter, built on first use.
#[derive(Debug)]
pub struct MonodromyCache<F> {
    chain: ChainSpec<F>,
    entries: Vec<(F, Arc<Monodromy<F>>)>,
}

impl<F: Scalar> MonodromyCache<F> {
    pub fn new(chain: ChainSpec<F>) -> Self {
        MonodromyCache { chain, entries: Vec::new() }
    }

    pub fn chain(&self) -> &ChainSpec<F> {
        &self.chain
    }

    pub fn get(&mut self, u: &F) -> Result<Arc<Monodromy<F>>> {
        if let Some((_, m)) = self.entries.iter().find(|(x, _)| x == u) {
            return Ok(m.clone());
        }
        let m = Arc::new(build_monodromy(&self.chain, u)?);
        self.entries.push((u.clone(), m.clone()));
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmatrix::{build_r_matrix, check_rtt};
    use crate::scalars::ExactScalar;
    use num_rational::BigRational;

    fn r(n: i64, d: i64) -> ExactScalar {
        BigRational::new(n.into(), d.into())
    }

    fn chain(n: usize, twist: Option<ExactScalar>) -> ChainSpec<ExactScalar> {
        let z = [r(3, 2), r(-2, 5), r(7, 3)];
        ChainSpec::new(z[..n].to_vec(), r(5, 3), twist).unwrap()
    }

    #[test]
    fn single_site_reads_off_the_r_matrix() {
        let ch = chain(1, None);
        let u = r(4, 7);
        let t = build_monodromy(&ch, &u).unwrap();
        let rm = build_r_matrix(&u, &ch.inhomogeneities()[0], ch.deformation().q()).unwrap();
        for i in 1..=3 {
            for j in 1..=3 {
                for k in 1..=3 {
                    for l in 1..=3 {
                        assert_eq!(&t.block(i, j).get(k - 1, l - 1), rm.entry(i, j, k, l));
                    }
                }
            }
        }
        let one = vacuum(&ch);
        assert_eq!(t.apply(1, 1, &one), one.scale(&ch.lambda1(&u).unwrap()));
        assert!(t.apply(2, 1, &one).is_zero());
    }

    #[test]
    fn vacuum_triangularity_and_eigenvalues() {
        for twist in [None, Some(r(-3, 4))] {
            for n in 1..=3 {
                let ch = chain(n, twist.clone());
                let u = r(9, 11);
                let t = build_monodromy(&ch, &u).unwrap();
                let (vac, dual) = (vacuum(&ch), dual_vacuum(&ch));
                let ev = vacuum_eigenvalues(&ch, &u).unwrap();
                let lambdas = [&ev.lambda1, &ev.lambda2, &ev.lambda3];
                for i in 1..=3 {
                    assert_eq!(t.apply(i, i, &vac), vac.scale(lambdas[i - 1]));
                    assert_eq!(t.apply_left(i, i, &dual), dual.scale(lambdas[i - 1]));
                    for j in 1..i {
                        assert!(t.apply(i, j, &vac).is_zero());
                        assert!(t.apply_left(j, i, &dual).is_zero());
                    }
                }
                assert!(!t.apply(1, 2, &vac).is_zero());
                assert!(!t.apply(1, 3, &vac).is_zero());
                assert!(t.apply(2, 3, &vac).is_zero());
                assert_eq!(dual.dot(&vac), r(1, 1));
                if twist.is_some() {
                    assert_eq!(ev.r3, r(-3, 4).pow(n as i32));
                } else {
                    assert_eq!(ev.r3, r(1, 1));
                }
            }
        }
    }

    #[test]
    fn rtt_and_commuting_transfer_matrices() {
        for twist in [None, Some(r(2, 7))] {
            for n in 1..=3 {
                let ch = chain(n, twist.clone());
                let (u, v) = (r(-5, 6), r(8, 3));
                let tu = build_monodromy(&ch, &u).unwrap();
                let tv = build_monodromy(&ch, &v).unwrap();
                let rm = build_r_matrix(&u, &v, ch.deformation().q()).unwrap();
                assert!(check_rtt(&tu, &tv, &rm).unwrap().holds());
                let (a, b) = (tu.transfer(), tv.transfer());
                assert_eq!(a.mul(&b), b.mul(&a));
            }
        }
    }

    #[test]
    fn rtt_detects_a_wrong_r_matrix_and_mismatched_chains() {
        let ch = chain(2, None);
        let (u, v) = (r(-5, 6), r(8, 3));
        let tu = build_monodromy(&ch, &u).unwrap();
        let tv = build_monodromy(&ch, &v).unwrap();
        let wrong = build_r_matrix(&u, &v, &r(7, 3)).unwrap();
        assert!(!check_rtt(&tu, &tv, &wrong).unwrap().holds());
        let other = build_monodromy(&chain(3, None), &v).unwrap();
        let rm = build_r_matrix(&u, &v, ch.deformation().q()).unwrap();
        assert!(matches!(check_rtt(&tu, &other, &rm), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn pole_at_an_inhomogeneity() {
        let ch = chain(2, None);
        let z = ch.inhomogeneities()[1].clone();
        assert!(matches!(build_monodromy(&ch, &z), Err(Error::PoleEncountered(_))));
    }
}
