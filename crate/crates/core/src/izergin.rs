//! The Izergin determinant K_k(x̄|ȳ) and its modifications
//! K^(l) = ∏x·K and K^(r) = ∏y·K.

use crate::error::{Error, Result};
use crate::rmatrix::Deformation;
use crate::scalars::{product, Scalar};

/// Determinant by fraction-free (Bareiss) elimination with row pivoting.
pub fn determinant<F: Scalar>(mut m: Vec<Vec<F>>) -> Result<F> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
    }
    let mut sign_flip = false;
    let mut prev = F::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return Ok(F::zero());
        };
        if p != k {
            m.swap(p, k);
            sign_flip = !sign_flip;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = t.try_div(&prev)?;
            }
            m[i][k] = F::zero();
        }
        prev = m[k][k].clone();
    }
    let det = if n == 0 { F::one() } else { m[n - 1][n - 1].clone() };
    Ok(if sign_flip { det.neg() } else { det })
}

/// K_k(x̄|ȳ) = ∏(qx_i − q⁻¹y_j) / ∏_{i<j}(x_i − x_j)(y_j − y_i)
///            · det[(q − q⁻¹)/((x_i − y_j)(qx_i − q⁻¹y_j))], with K₀ = 1.
///
/// Row i of the determinant is multiplied through by ∏_j (qx_i − q⁻¹y_j),
/// which cancels the prefactor and leaves poles only at x_i = y_j; the
/// reduction points x = q⁻²y are then ordinary evaluations.
pub fn izergin_k<F: Scalar>(def: &Deformation<F>, xs: &[F], ys: &[F]) -> Result<F> {
    let k = xs.len();
    if ys.len() != k {
        return Err(Error::SizeMismatch { expected: k, got: ys.len() });
    }
    if k == 0 {
        return Ok(F::one());
    }
    let gap = def.q().sub(def.q_inv());
    let mut entries = Vec::with_capacity(k);
    for x in xs {
        let h: Vec<F> = ys.iter().map(|y| def.f_numerator(x, y)).collect();
        let mut row = Vec::with_capacity(k);
        for (j, y) in ys.iter().enumerate() {
            let diff = x.sub(y);
            if diff.is_zero() {
                return Err(Error::PoleEncountered("Izergin determinant at x = y".into()));
            }
            let others = h.iter().enumerate().filter(|&(l, _)| l != j).fold(gap.clone(), |acc, (_, hl)| acc.mul(hl));
            row.push(others.try_div(&diff)?);
        }
        entries.push(row);
    }
    let mut vander = F::one();
    for i in 0..k {
        for j in i + 1..k {
            vander = vander.mul(&xs[i].sub(&xs[j])).mul(&ys[j].sub(&ys[i]));
        }
    }
    if vander.is_zero() {
        return Err(Error::PoleEncountered("Izergin determinant with repeated arguments".into()));
    }
    determinant(entries)?.try_div(&vander)
}

/// K^(l)_k(x̄|ȳ) = ∏x_i · K_k(x̄|ȳ)
pub fn izergin_kl<F: Scalar>(def: &Deformation<F>, xs: &[F], ys: &[F]) -> Result<F> {
    Ok(product(xs).mul(&izergin_k(def, xs, ys)?))
}

/// K^(r)_k(x̄|ȳ) = ∏y_i · K_k(x̄|ȳ)
pub fn izergin_kr<F: Scalar>(def: &Deformation<F>, xs: &[F], ys: &[F]) -> Result<F> {
    Ok(product(ys).mul(&izergin_k(def, xs, ys)?))
}

pub mod identities;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::ExactScalar;
    use num_rational::BigRational;

    fn r(n: i64, d: i64) -> ExactScalar {
        BigRational::new(n.into(), d.into())
    }

    fn def() -> Deformation<ExactScalar> {
        Deformation::new(r(3, 2)).unwrap()
    }

    #[test]
    fn small_cases() {
        let d = def();
        assert_eq!(izergin_k::<ExactScalar>(&d, &[], &[]).unwrap(), r(1, 1));
        let (x, y) = (r(2, 1), r(-5, 3));
        assert_eq!(izergin_k(&d, std::slice::from_ref(&x), std::slice::from_ref(&y)).unwrap(), d.g(&x, &y).unwrap());
        assert_eq!(
            izergin_kr(&d, std::slice::from_ref(&x), std::slice::from_ref(&y)).unwrap(),
            &y * d.g(&x, &y).unwrap()
        );
        assert_eq!(
            izergin_kl(&d, std::slice::from_ref(&x), std::slice::from_ref(&y)).unwrap(),
            &x * d.g(&x, &y).unwrap()
        );
        let z = r(7, 4);
        let q = d.q().clone();
        assert_eq!(izergin_k(&d, &[d.shift_down(&z)], std::slice::from_ref(&z)).unwrap(), -(&q / &z));
    }

    #[test]
    fn size_mismatch_and_poles() {
        let d = def();
        assert!(matches!(izergin_k(&d, &[r(1, 1)], &[]), Err(Error::SizeMismatch { .. })));
        assert!(izergin_k(&d, &[r(1, 1)], &[r(1, 1)]).is_err());
        assert!(izergin_k(&d, &[r(1, 1), r(1, 1)], &[r(2, 1), r(3, 1)]).is_err());
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let m: Vec<Vec<ExactScalar>> =
            vec![vec![r(0, 1), r(2, 3), r(-1, 1)], vec![r(4, 1), r(1, 5), r(2, 1)], vec![r(-3, 2), r(7, 1), r(1, 9)]];
        let cof = &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
            - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0]);
        assert_eq!(determinant(m).unwrap(), cof);
    }

    #[test]
    fn k_l_over_k_r_is_a_product_ratio() {
        let d = def();
        let xs = [r(2, 1), r(-1, 3), r(5, 7)];
        let ys = [r(4, 1), r(9, 2), r(-6, 5)];
        let ratio = izergin_kl(&d, &xs, &ys).unwrap() / izergin_kr(&d, &xs, &ys).unwrap();
        assert_eq!(ratio, product(&xs) / product(&ys));
    }
}
