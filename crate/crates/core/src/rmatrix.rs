//! The trigonometric R-matrix, the functions f and g, and an exhaustive RTT check.

use crate::chain::{Monodromy, SparseMatrix};
use crate::error::{Error, Result};
use crate::scalars::Scalar;

/// The deformation parameter q together with its inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct Deformation<F> {
    q: F,
    q_inv: F,
}

impl<F: Scalar> Deformation<F> {
    /// Rejects q ∈ {0, 1, −1}.
    pub fn new(q: F) -> Result<Self> {
        if q.is_zero() || q.mul(&q).sub(&F::one()).is_zero() {
            return Err(Error::DegenerateQ);
        }
        let q_inv = q.try_inv()?;
        Ok(Deformation { q, q_inv })
    }

    pub fn q(&self) -> &F {
        &self.q
    }

    pub fn q_inv(&self) -> &F {
        &self.q_inv
    }

    /// q² · x
    pub fn shift_up(&self, x: &F) -> F {
        x.mul(&self.q).mul(&self.q)
    }

    /// q⁻² · x
    pub fn shift_down(&self, x: &F) -> F {
        x.mul(&self.q_inv).mul(&self.q_inv)
    }

    /// `q·u − q⁻¹·v`, the numerator of f.
    pub fn f_numerator(&self, u: &F, v: &F) -> F {
        self.q.mul(u).sub(&self.q_inv.mul(v))
    }

    /// f(u,v) = (qu − q⁻¹v)/(u − v)
    pub fn f(&self, u: &F, v: &F) -> Result<F> {
        let den = u.sub(v);
        if den.is_zero() {
            return Err(Error::PoleEncountered("f(u,v) at u = v".into()));
        }
        self.f_numerator(u, v).try_div(&den)
    }

    /// g(u,v) = (q − q⁻¹)/(u − v)
    pub fn g(&self, u: &F, v: &F) -> Result<F> {
        let den = u.sub(v);
        if den.is_zero() {
            return Err(Error::PoleEncountered("g(u,v) at u = v".into()));
        }
        self.q.sub(&self.q_inv).try_div(&den)
    }

    /// Maps q into another field.
    pub fn lift<G: Scalar>(&self, conv: impl Fn(&F) -> G) -> Deformation<G> {
        Deformation { q: conv(&self.q), q_inv: conv(&self.q_inv) }
    }
}

pub fn f_fun<F: Scalar>(u: &F, v: &F, q: &F) -> Result<F> {
    Deformation::new(q.clone())?.f(u, v)
}

pub fn g_fun<F: Scalar>(u: &F, v: &F, q: &F) -> Result<F> {
    Deformation::new(q.clone())?.g(u, v)
}

/// Flattened index of the basis vector e_i ⊗ e_k (0-based i, k).
#[inline]
pub fn pair_index(i: usize, k: usize) -> usize {
    3 * i + k
}

/// Dense 9×9 R(u,v), rows and columns indexed by [`pair_index`].
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix<F> {
    pub u: F,
    pub v: F,
    entries: Vec<F>,
}

impl<F: Scalar> RMatrix<F> {
    /// Entry ((i,k),(j,l)) for 1-based indices, i.e. the coefficient of
    /// E_ij ⊗ E_kl.
    pub fn entry(&self, i: usize, j: usize, k: usize, l: usize) -> &F {
        self.at(pair_index(i - 1, k - 1), pair_index(j - 1, l - 1))
    }

    /// Entry by flattened 0-based row and column.
    pub fn at(&self, row: usize, col: usize) -> &F {
        &self.entries[9 * row + col]
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.iter().filter(|x| !x.is_zero()).count()
    }
}

/// R(u,v) = f Σ E_ii⊗E_ii + Σ_{i≠j} E_ii⊗E_jj + Σ_{i<j} (u g E_ij⊗E_ji + v g E_ji⊗E_ij).
pub fn build_r_matrix<F: Scalar>(u: &F, v: &F, q: &F) -> Result<RMatrix<F>> {
    let def = Deformation::new(q.clone())?;
    r_matrix_with(&def, u, v)
}

pub(crate) fn r_matrix_with<F: Scalar>(def: &Deformation<F>, u: &F, v: &F) -> Result<RMatrix<F>> {
    let f = def.f(u, v)?;
    let g = def.g(u, v)?;
    let ug = u.mul(&g);
    let vg = v.mul(&g);
    let mut entries = vec![F::zero(); 81];
    let mut set = |row: usize, col: usize, x: &F| entries[9 * row + col] = x.clone();
    for i in 0..3 {
        set(pair_index(i, i), pair_index(i, i), &f);
        for j in i + 1..3 {
            set(pair_index(i, j), pair_index(i, j), &F::one());
            set(pair_index(j, i), pair_index(j, i), &F::one());
            set(pair_index(i, j), pair_index(j, i), &ug);
            set(pair_index(j, i), pair_index(i, j), &vg);
        }
    }
    Ok(RMatrix { u: u.clone(), v: v.clone(), entries })
}

/// Outcome of an exhaustive RTT comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RttReport {
    /// Number of operator blocks compared (always 81).
    pub blocks: usize,
    /// Blocks whose two sides differ.
    pub mismatched_blocks: usize,
}

impl RttReport {
    pub fn holds(&self) -> bool {
        self.mismatched_blocks == 0
    }
}

/// Compares R(u,v)(T(u)⊗1)(1⊗T(v)) with (1⊗T(v))(T(u)⊗1)R(u,v), block by block.
///
/// Block ((i,k),(j,l)) of the left side is Σ_{m,n} R_{(i,k),(m,n)} T_mj(u) T_nl(v);
/// of the right side, Σ_{m,n} T_kn(v) T_im(u) R_{(m,n),(j,l)}.
pub fn check_rtt<F: Scalar>(tu: &Monodromy<F>, tv: &Monodromy<F>, r: &RMatrix<F>) -> Result<RttReport> {
    if tu.dim() != tv.dim() {
        return Err(Error::DimensionMismatch(format!(
            "monodromies act on spaces of dimension {} and {}",
            tu.dim(),
            tv.dim()
        )));
    }
    if tu.argument() != &r.u || tv.argument() != &r.v {
        return Err(Error::DimensionMismatch("R-matrix arguments differ from the monodromy arguments".into()));
    }
    // Products T_ab(u)T_cd(v) and T_cd(v)T_ab(u) are reused across blocks.
    let mut uv: Vec<Option<SparseMatrix<F>>> = vec![None; 81];
    let mut vu: Vec<Option<SparseMatrix<F>>> = vec![None; 81];
    let key = |a: usize, b: usize, c: usize, d: usize| 27 * a + 9 * b + 3 * c + d;
    let mut mismatched = 0;
    for i in 0..3 {
        for k in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    let mut lhs = SparseMatrix::zero(tu.dim());
                    let mut rhs = SparseMatrix::zero(tu.dim());
                    for m in 0..3 {
                        for n in 0..3 {
                            let cl = r.at(pair_index(i, k), pair_index(m, n));
                            if !cl.is_zero() {
                                let p = uv[key(m, j, n, l)].get_or_insert_with(|| tu.block0(m, j).mul(tv.block0(n, l)));
                                lhs = lhs.add(&p.scale(cl));
                            }
                            let cr = r.at(pair_index(m, n), pair_index(j, l));
                            if !cr.is_zero() {
                                let p = vu[key(k, n, i, m)].get_or_insert_with(|| tv.block0(k, n).mul(tu.block0(i, m)));
                                rhs = rhs.add(&p.scale(cr));
                            }
                        }
                    }
                    if lhs != rhs {
                        mismatched += 1;
                    }
                }
            }
        }
    }
    Ok(RttReport { blocks: 81, mismatched_blocks: mismatched })
}
