//! Reproducible sampling of generic rational points.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ExactScalar;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub seed: u64,
    /// Largest absolute numerator / denominator drawn.
    pub bound: i64,
    /// Total rejection budget across all draws of one configuration.
    pub max_attempts: u32,
}

impl SampleConfig {
    pub fn new(seed: u64) -> Self {
        SampleConfig { seed, bound: 10, max_attempts: 10_000 }
    }
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self::new(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub sites: usize,
    pub a: usize,
    pub b: usize,
    pub n: usize,
}

/// A generic point: deformation parameter plus every spectral parameter of a
/// test case, pairwise distinct and free of q²-resonances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericConfig {
    pub q: ExactScalar,
    pub z: Vec<ExactScalar>,
    pub u: Vec<ExactScalar>,
    pub v: Vec<ExactScalar>,
    pub w: Vec<ExactScalar>,
}

/// Whether two spectral parameters sit on a pole/zero locus of f, g or K.
pub(crate) fn resonant(x: &ExactScalar, y: &ExactScalar, q2: &ExactScalar) -> bool {
    x == y || *x == q2 * y || *y == q2 * x
}

pub(crate) fn degenerate_q(q: &ExactScalar) -> bool {
    q.is_zero() || q.abs().is_one()
}

struct Drawer {
    rng: ChaCha8Rng,
    bound: i64,
    budget: u32,
    used: u32,
}

impl Drawer {
    fn new(cfg: &SampleConfig, stream: u64) -> Result<Self> {
        if cfg.bound < 10 {
            return Err(Error::Config(format!("sample bound {} is below 10", cfg.bound)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(stream);
        Ok(Drawer { rng, bound: cfg.bound, budget: cfg.max_attempts, used: 0 })
    }

    fn raw(&mut self) -> ExactScalar {
        let mut p = 0;
        while p == 0 {
            p = self.rng.gen_range(-self.bound..=self.bound);
        }
        let r = self.rng.gen_range(1..=self.bound);
        BigRational::new(p.into(), r.into())
    }

    fn draw(&mut self, accept: impl Fn(&ExactScalar) -> bool) -> Result<ExactScalar> {
        loop {
            if self.used >= self.budget {
                return Err(Error::ExhaustedSampling(self.used));
            }
            self.used += 1;
            let x = self.raw();
            if accept(&x) {
                return Ok(x);
            }
        }
    }
}

/// Draws q and all spectral parameters for `counts`, deterministically in the seed.
pub fn sample_generic_config(cfg: &SampleConfig, counts: SampleCounts) -> Result<GenericConfig> {
    sample_generic_config_with_q(cfg, counts, None)
}

/// As [`sample_generic_config`], but with q pinned when `fixed_q` is given.
/// A pinned q on the blacklist is a configuration error.
pub fn sample_generic_config_with_q(
    cfg: &SampleConfig,
    counts: SampleCounts,
    fixed_q: Option<&ExactScalar>,
) -> Result<GenericConfig> {
    let mut d = Drawer::new(cfg, 0)?;
    let q = match fixed_q {
        Some(q) if degenerate_q(q) => return Err(Error::Config(format!("q = {q} is blacklisted (0 or ±1)"))),
        Some(q) => q.clone(),
        None => d.draw(|q| !degenerate_q(q))?,
    };
    let q2 = &q * &q;
    let mut union: Vec<ExactScalar> = Vec::new();
    let group = |d: &mut Drawer, k: usize, union: &mut Vec<ExactScalar>| -> Result<Vec<ExactScalar>> {
        let mut out = Vec::with_capacity(k);
        for _ in 0..k {
            let x = d.draw(|x| union.iter().all(|y| !resonant(x, y, &q2)))?;
            union.push(x.clone());
            out.push(x);
        }
        Ok(out)
    };
    let z = group(&mut d, counts.sites, &mut union)?;
    let u = group(&mut d, counts.a, &mut union)?;
    let v = group(&mut d, counts.b, &mut union)?;
    let w = group(&mut d, counts.n, &mut union)?;
    Ok(GenericConfig { q, z, u, v, w })
}

/// Draws a twist constant c ∉ {0, ±1} on its own stream.
pub fn sample_twist(cfg: &SampleConfig) -> Result<ExactScalar> {
    Drawer::new(cfg, 1)?.draw(|c| !degenerate_q(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    const COUNTS: SampleCounts = SampleCounts { sites: 2, a: 1, b: 1, n: 1 };

    #[test]
    fn deterministic_in_seed() {
        let a = sample_generic_config(&SampleConfig::new(1), COUNTS).unwrap();
        let b = sample_generic_config(&SampleConfig::new(1), COUNTS).unwrap();
        let c = sample_generic_config(&SampleConfig::new(2), COUNTS).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let pinned =
            sample_generic_config_with_q(&SampleConfig::new(1), COUNTS, Some(&BigRational::new(3.into(), 2.into())));
        assert_eq!(pinned.unwrap().q, BigRational::new(3.into(), 2.into()));
        let bad = sample_generic_config_with_q(&SampleConfig::new(1), COUNTS, Some(&BigRational::one()));
        assert!(matches!(bad, Err(Error::Config(_))));
        assert_eq!(a.z.len() + a.u.len() + a.v.len() + a.w.len(), 5);
    }

    #[test]
    fn blacklist_is_enforced() {
        for seed in 0..50 {
            let g =
                sample_generic_config(&SampleConfig::new(seed), SampleCounts { sites: 3, a: 2, b: 2, n: 2 }).unwrap();
            assert!(!degenerate_q(&g.q));
            let q2 = &g.q * &g.q;
            let all: Vec<_> = g.z.iter().chain(&g.u).chain(&g.v).chain(&g.w).collect();
            for (i, x) in all.iter().enumerate() {
                assert!(!x.is_zero());
                for y in &all[i + 1..] {
                    assert!(!resonant(x, y, &q2), "seed {seed}: {x} ~ {y}");
                }
            }
        }
    }

    #[test]
    fn small_bound_is_rejected_and_budget_is_finite() {
        let bad = SampleConfig { bound: 5, ..SampleConfig::new(1) };
        assert!(matches!(sample_generic_config(&bad, COUNTS), Err(Error::Config(_))));
        let tight = SampleConfig { max_attempts: 3, ..SampleConfig::new(1) };
        let many = SampleCounts { sites: 3, a: 3, b: 3, n: 3 };
        assert!(matches!(sample_generic_config(&tight, many), Err(Error::ExhaustedSampling(3))));
    }

    #[test]
    fn twist_avoids_degenerate_values() {
        for seed in 0..20 {
            assert!(!degenerate_q(&sample_twist(&SampleConfig::new(seed)).unwrap()));
        }
    }
}
