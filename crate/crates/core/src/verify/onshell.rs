//! Numerical eigenvector checks at solutions of the Bethe equations.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::transfer_eigenvalue;
use crate::bethe::{build_bethe, build_dual_bethe, BetheLabel};
use crate::chain::{basis_weight, ChainSpec, MonodromyCache, StateVector};
use crate::error::Result;
use crate::scalars::{ExactScalar, FloatScalar, Scalar};

use super::newton::{max_abs, solve_bethe_roots, BetheRoots};

/// Relative size of the root perturbation used by the negative control.
const PERTURBATION: f64 = 1e-6;
/// The perturbed residual must exceed this for the control to count.
pub const CONTROL_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct OnShellOutcome {
    pub roots: BetheRoots,
    pub samples: Vec<ExactScalar>,
    /// max|t(w)B − τ(w)B| / max|B| per sample.
    pub eigen_residuals: Vec<f64>,
    pub tolerance: f64,
    /// Same residual after nudging one root off-shell; `None` for the vacuum.
    pub control_residual: Option<f64>,
    /// C at the roots is nonzero and carries weight (N−a, a−b, b).
    pub dual_weight_ok: bool,
    /// max|C t(w) − τ(w)C| / max|C|; informational only.
    pub dual_residuals: Vec<f64>,
}

impl OnShellOutcome {
    pub fn max_residual(&self) -> f64 {
        self.eigen_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_residual() < self.tolerance
            && self.control_residual.is_none_or(|c| c > CONTROL_FLOOR)
            && self.dual_weight_ok
    }
}

/// 10^(−digits/2 + 5).
pub fn eigen_tolerance(digits: u32) -> f64 {
    10f64.powf(5.0 - digits as f64 / 2.0)
}

/// Distinct exact spectral samples w drawn on their own stream, skipping the
/// poles of λ₁ listed in `avoid`.
pub fn sample_points(seed: u64, count: usize, avoid: &[ExactScalar]) -> Vec<ExactScalar> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(3);
    let mut out: Vec<ExactScalar> = Vec::with_capacity(count);
    while out.len() < count {
        let p: i64 = rng.gen_range(1..=40) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let w = BigRational::new(p.into(), rng.gen_range(7..=19).into());
        if !avoid.contains(&w) && !out.contains(&w) {
            out.push(w);
        }
    }
    out
}

fn eigen_residual(
    cache: &mut MonodromyCache<FloatScalar>,
    vec: &StateVector<FloatScalar>,
    label: &BetheLabel<FloatScalar>,
    w: &FloatScalar,
    left: bool,
) -> Result<f64> {
    let chain = cache.chain().clone();
    let t = cache.get(w)?.transfer();
    let tv = if left { t.apply_left(vec) } else { t.apply(vec) };
    let tau = transfer_eigenvalue(w, &label.u, &label.v, &chain)?;
    Ok(max_abs(&tv.sub(&vec.scale(&tau))) / max_abs(vec))
}

/// Solves for B^{a,b} roots and checks t(w)B = τ(w)B at `count` sample points.
pub fn verify_on_shell(
    chain: &ChainSpec<ExactScalar>,
    a: usize,
    b: usize,
    seed: u64,
    digits: u32,
    count: usize,
) -> Result<OnShellOutcome> {
    let roots = solve_bethe_roots(chain, a, b, seed, digits)?;
    let fl = chain.lift(|x| FloatScalar::from_exact_digits(x, digits));
    let mut cache = MonodromyCache::new(fl.clone());
    let label = BetheLabel::new(roots.u.clone(), roots.v.clone())?;
    let bvec = build_bethe(&label, &mut cache)?;
    let cvec = build_dual_bethe(&label, &mut cache)?;

    let samples = sample_points(seed, count, chain.inhomogeneities());
    let mut eigen_residuals = Vec::with_capacity(count);
    let mut dual_residuals = Vec::with_capacity(count);
    for w in &samples {
        let wf = FloatScalar::from_exact_digits(w, digits);
        eigen_residuals.push(eigen_residual(&mut cache, &bvec, &label, &wf, false)?);
        dual_residuals.push(eigen_residual(&mut cache, &cvec, &label, &wf, true)?);
    }

    let control_residual = match roots.u.first() {
        None => None,
        Some(u0) => {
            let bump = FloatScalar::from_f64_digits(1.0 + PERTURBATION, 0.0, digits);
            let mut us = roots.u.clone();
            us[0] = u0.mul(&bump);
            let off = BetheLabel::new(us, roots.v.clone())?;
            let off_vec = build_bethe(&off, &mut cache)?;
            let wf = FloatScalar::from_exact_digits(&samples[0], digits);
            Some(eigen_residual(&mut cache, &off_vec, &off, &wf, false)?)
        }
    };

    let sites = chain.sites();
    let scale = max_abs(&cvec);
    let dual_weight_ok = scale > 0.0
        && cvec
            .iter()
            .enumerate()
            .filter(|(_, x)| x.abs_f64() > scale * 1e-30)
            .all(|(i, _)| basis_weight(i, sites) == [sites - a, a - b, b]);

    Ok(OnShellOutcome {
        roots,
        samples,
        eigen_residuals,
        tolerance: eigen_tolerance(digits),
        control_residual,
        dual_weight_ok,
        dual_residuals,
    })
}
