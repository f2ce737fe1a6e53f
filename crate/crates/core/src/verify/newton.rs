//! Numerical Bethe roots: damped Newton iteration on the Bethe equations with
//! every denominator cleared, in the high-precision complex field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::bethe_residuals;
use crate::bethe::{bethe_vector, BetheLabel};
use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::scalars::{product, ExactScalar, FloatScalar, Scalar};

/// Smallest precision the solver accepts.
pub const MIN_SOLVER_DIGITS: u32 = 50;

const STARTS: usize = 40;
const ITERATIONS: usize = 120;

/// a + bδ with δ² = 0: forward-mode derivative in any field.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<F> {
    pub re: F,
    pub du: F,
}

impl<F: Scalar> Dual<F> {
    pub fn constant(re: F) -> Self {
        Dual { re, du: F::zero() }
    }

    pub fn variable(re: F) -> Self {
        Dual { re, du: F::one() }
    }
}

impl<F: Scalar> Scalar for Dual<F> {
    fn zero() -> Self {
        Self::constant(F::zero())
    }
    fn one() -> Self {
        Self::constant(F::one())
    }
    fn from_i64(n: i64) -> Self {
        Self::constant(F::from_i64(n))
    }
    fn from_exact(x: &ExactScalar) -> Self {
        Self::constant(F::from_exact(x))
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.du.is_zero()
    }
    fn add(&self, rhs: &Self) -> Self {
        Dual { re: self.re.add(&rhs.re), du: self.du.add(&rhs.du) }
    }
    fn sub(&self, rhs: &Self) -> Self {
        Dual { re: self.re.sub(&rhs.re), du: self.du.sub(&rhs.du) }
    }
    fn mul(&self, rhs: &Self) -> Self {
        Dual { re: self.re.mul(&rhs.re), du: self.re.mul(&rhs.du).add(&self.du.mul(&rhs.re)) }
    }
    fn neg(&self) -> Self {
        Dual { re: self.re.neg(), du: self.du.neg() }
    }
    fn try_inv(&self) -> Result<Self> {
        let inv = self.re.try_inv()?;
        Ok(Dual { du: self.du.mul(&inv).mul(&inv).neg(), re: inv })
    }
    fn coincides(&self, other: &Self) -> bool {
        self.re.coincides(&other.re)
    }
}

/// The Bethe equations multiplied through by their denominators, ū first then v̄:
///
/// ∏h(u_j,z̄)·∏_{k≠j}h(u_k,u_j)·∏d(v̄,u_j) − ∏d(u_j,z̄)·∏_{k≠j}(−h(u_j,u_k))·∏h(v̄,u_j),
/// r₃·∏_{k≠i}h(v_i,v_k)·∏d(v_i,ū) − ∏_{k≠i}(−h(v_k,v_i))·∏h(v_i,ū),
///
/// with h(x,y) = qx − q⁻¹y and d(x,y) = x − y. Uses λ₁(u) = ∏f(u,z_i), λ₂ = 1.
pub fn bethe_polynomials<F: Scalar>(us: &[F], vs: &[F], chain: &ChainSpec<F>) -> Result<Vec<F>> {
    let def = chain.deformation();
    let h = |x: &F, y: &F| def.f_numerator(x, y);
    let d = |x: &F, y: &F| x.sub(y);
    let z = chain.inhomogeneities();
    let mut out = Vec::with_capacity(us.len() + vs.len());
    for (j, uj) in us.iter().enumerate() {
        let others = || us.iter().enumerate().filter(move |&(k, _)| k != j).map(|(_, x)| x);
        let lhs = product(&z.iter().map(|zi| h(uj, zi)).collect::<Vec<_>>())
            .mul(&product(&others().map(|uk| h(uk, uj)).collect::<Vec<_>>()))
            .mul(&product(&vs.iter().map(|vi| d(vi, uj)).collect::<Vec<_>>()));
        let rhs = product(&z.iter().map(|zi| d(uj, zi)).collect::<Vec<_>>())
            .mul(&product(&others().map(|uk| h(uj, uk).neg()).collect::<Vec<_>>()))
            .mul(&product(&vs.iter().map(|vi| h(vi, uj)).collect::<Vec<_>>()));
        out.push(lhs.sub(&rhs));
    }
    for (i, vi) in vs.iter().enumerate() {
        let others = || vs.iter().enumerate().filter(move |&(k, _)| k != i).map(|(_, x)| x);
        let lhs = chain
            .r3(vi)?
            .mul(&product(&others().map(|vk| h(vi, vk)).collect::<Vec<_>>()))
            .mul(&product(&us.iter().map(|uj| d(vi, uj)).collect::<Vec<_>>()));
        let rhs = product(&others().map(|vk| h(vk, vi).neg()).collect::<Vec<_>>())
            .mul(&product(&us.iter().map(|uj| h(vi, uj)).collect::<Vec<_>>()));
        out.push(lhs.sub(&rhs));
    }
    Ok(out)
}

/// Solves `m·x = rhs` by Gaussian elimination with partial pivoting on |·|.
pub fn solve_linear(mut m: Vec<Vec<FloatScalar>>, mut rhs: Vec<FloatScalar>) -> Result<Vec<FloatScalar>> {
    let n = rhs.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs_f64().total_cmp(&m[j][k].abs_f64())).expect("non-empty pivot range");
        if m[p][k].is_zero() {
            return Err(Error::NoConvergence("singular Jacobian".into()));
        }
        m.swap(p, k);
        rhs.swap(p, k);
        let pivot = m[k][k].try_inv()?;
        for i in k + 1..n {
            let factor = m[i][k].mul(&pivot);
            for j in k..n {
                m[i][j] = m[i][j].sub(&factor.mul(&m[k][j]));
            }
            rhs[i] = rhs[i].sub(&factor.mul(&rhs[k]));
        }
    }
    let mut x = vec![FloatScalar::zero(); n];
    for k in (0..n).rev() {
        let mut acc = rhs[k].clone();
        for j in k + 1..n {
            acc = acc.sub(&m[k][j].mul(&x[j]));
        }
        x[k] = acc.try_div(&m[k][k])?;
    }
    Ok(x)
}

/// Maximum coordinate magnitude.
pub fn max_abs(xs: &[FloatScalar]) -> f64 {
    xs.iter().map(FloatScalar::abs_f64).fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct BetheRoots {
    pub u: Vec<FloatScalar>,
    pub v: Vec<FloatScalar>,
    /// Largest |residual| of the rational Bethe equations at the root.
    pub residual: f64,
    /// Which seeded start converged (0-based).
    pub start: usize,
    pub iterations: usize,
}

fn split(x: &[FloatScalar], a: usize) -> (&[FloatScalar], &[FloatScalar]) {
    x.split_at(a)
}

fn residual_norm(x: &[FloatScalar], a: usize, chain: &ChainSpec<FloatScalar>) -> Option<f64> {
    let (us, vs) = split(x, a);
    bethe_residuals(us, vs, chain).ok().map(|r| max_abs(&r))
}

fn jacobian(x: &[FloatScalar], a: usize, chain: &ChainSpec<Dual<FloatScalar>>) -> Result<Vec<Vec<FloatScalar>>> {
    let n = x.len();
    let mut jac = vec![vec![FloatScalar::zero(); n]; n];
    for col in 0..n {
        let lifted: Vec<Dual<FloatScalar>> = x
            .iter()
            .enumerate()
            .map(|(k, xk)| if k == col { Dual::variable(xk.clone()) } else { Dual::constant(xk.clone()) })
            .collect();
        let (us, vs) = lifted.split_at(a);
        for (row, p) in bethe_polynomials(us, vs, chain)?.into_iter().enumerate() {
            jac[row][col] = p.du;
        }
    }
    Ok(jac)
}

/// Whether a converged point is a usable root: distinct, away from the poles
/// of f and λ₁, and with a nonzero Bethe vector.
fn admissible(x: &[FloatScalar], a: usize, chain: &ChainSpec<FloatScalar>, scale: f64) -> bool {
    let (us, vs) = split(x, a);
    let far = |p: &FloatScalar, q: &FloatScalar| p.sub(q).abs_f64() > 1e-8 * scale;
    let pairwise = |s: &[FloatScalar]| s.iter().enumerate().all(|(i, p)| s[i + 1..].iter().all(|q| far(p, q)));
    let z = chain.inhomogeneities();
    let ok = pairwise(us)
        && pairwise(vs)
        && x.iter().all(|p| p.abs_f64() > 1e-8 * scale)
        && us.iter().all(|u| z.iter().all(|zi| far(u, zi)))
        && vs.iter().all(|v| us.iter().all(|u| far(u, v)));
    if !ok {
        return false;
    }
    BetheLabel::new(us.to_vec(), vs.to_vec())
        .and_then(|label| bethe_vector(&label, chain))
        .is_ok_and(|b| max_abs(&b) > 1e-12)
}

/// One admissible solution of the Bethe equations for B^{a,b} on `chain`.
///
/// Starts are drawn reproducibly from `seed`; each start runs damped Newton on
/// [`bethe_polynomials`] until the rational residuals drop below
/// 10^(10 − digits).
pub fn solve_bethe_roots(
    chain: &ChainSpec<ExactScalar>,
    a: usize,
    b: usize,
    seed: u64,
    digits: u32,
) -> Result<BetheRoots> {
    if b > a || a > chain.sites() {
        return Err(Error::Precondition(format!("no nonzero B^{{{a},{b}}} on {} sites", chain.sites())));
    }
    if digits < MIN_SOLVER_DIGITS {
        return Err(Error::Precondition(format!("solver needs at least {MIN_SOLVER_DIGITS} digits, got {digits}")));
    }
    let fl = chain.lift(|x| FloatScalar::from_exact_digits(x, digits));
    let dual = fl.lift(|x| Dual::constant(x.clone()));
    let tol = 10f64.powi(10 - digits as i32);
    let n = a + b;
    if n == 0 {
        return Ok(BetheRoots { u: vec![], v: vec![], residual: 0.0, start: 0, iterations: 0 });
    }
    let scale = chain.inhomogeneities().iter().map(|z| FloatScalar::from_exact(z).abs_f64()).sum::<f64>()
        / chain.sites() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    for start in 0..STARTS {
        // Cycle the start radius so roots far outside the inhomogeneities are reached too.
        let radius = 2.0 * scale * f64::from(1 << (start % 4));
        let mut x: Vec<FloatScalar> = (0..n)
            .map(|_| {
                let re = rng.gen_range(-radius..radius);
                let im = rng.gen_range(-radius..radius);
                FloatScalar::from_f64_digits(re, im, digits)
            })
            .collect();
        let merit = |x: &[FloatScalar]| {
            let (us, vs) = split(x, a);
            bethe_polynomials(us, vs, &fl).ok().map(|p| (max_abs(&p), p))
        };
        let Some((mut size, mut p)) = merit(&x) else { continue };
        for iteration in 0..ITERATIONS {
            if let Some(norm) = residual_norm(&x, a, &fl).filter(|&r| r < tol) {
                if admissible(&x, a, &fl, scale) {
                    return Ok(BetheRoots {
                        u: x[..a].to_vec(),
                        v: x[a..].to_vec(),
                        residual: norm,
                        start,
                        iterations: iteration,
                    });
                }
                break;
            }
            let Ok(jac) = jacobian(&x, a, &dual) else { break };
            let Ok(step) = solve_linear(jac, p.iter().map(Scalar::neg).collect()) else { break };
            // Damped step: halve until the polynomial residual decreases.
            let mut t = FloatScalar::one();
            let half = FloatScalar::from_exact(&ExactScalar::new(1.into(), 2.into()));
            let mut accepted = None;
            for _ in 0..40 {
                let trial: Vec<FloatScalar> = x.iter().zip(&step).map(|(xi, si)| xi.add(&t.mul(si))).collect();
                if let Some((trial_size, trial_p)) = merit(&trial).filter(|(m, _)| *m < size) {
                    accepted = Some((trial, trial_size, trial_p));
                    break;
                }
                t = t.mul(&half);
            }
            // No decrease: either stuck or already at the precision floor.
            let Some((next, next_size, next_p)) = accepted else { break };
            x = next;
            size = next_size;
            p = next_p;
        }
    }
    Err(Error::NoConvergence(format!("no admissible root for B^{{{a},{b}}} from {STARTS} starts (seed {seed})")))
}
