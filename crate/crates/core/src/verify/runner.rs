//! Case grids, parallel execution and the aggregated report.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_case, validate_q, CaseSpec, Suite, VerificationCase};
use crate::action::Entry;
use crate::error::{Error, Result};
use crate::scalars::{parse_exact, ExactScalar};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "BETHE_GL3_THREADS";

/// Which chains a suite runs on. A fixed twist constant is not sampled.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TwistMode {
    Off,
    On,
    #[default]
    Both,
    Fixed(String),
}

impl FromStr for TwistMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "off" => TwistMode::Off,
            "on" => TwistMode::On,
            "both" => TwistMode::Both,
            other => {
                let c = parse_exact(other).map_err(|_| Error::Config(format!("bad twist {other:?}")))?;
                validate_twist(&c)?;
                TwistMode::Fixed(other.to_string())
            }
        })
    }
}

fn validate_twist(c: &ExactScalar) -> Result<()> {
    validate_q(c).map_err(|_| Error::Config(format!("twist constant {c} must avoid 0 and ±1")))
}

impl TryFrom<String> for TwistMode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TwistMode> for String {
    fn from(t: TwistMode) -> String {
        t.to_string()
    }
}

impl fmt::Display for TwistMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwistMode::Off => f.write_str("off"),
            TwistMode::On => f.write_str("on"),
            TwistMode::Both => f.write_str("both"),
            TwistMode::Fixed(c) => f.write_str(c),
        }
    }
}

impl TwistMode {
    fn variants(&self) -> Vec<bool> {
        match self {
            TwistMode::Off => vec![false],
            TwistMode::On | TwistMode::Fixed(_) => vec![true],
            TwistMode::Both => vec![false, true],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
}

/// A complete, re-runnable description of a verification run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Suites to run; empty means all of them.
    pub suites: Vec<Suite>,
    pub sites: Option<usize>,
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub n: Option<usize>,
    /// "ij" or "all".
    pub entry: String,
    /// "random" or an exact rational "p/r".
    pub q: String,
    /// First seed.
    pub seed: u64,
    /// Number of consecutive seeds; each suite has its own default.
    pub seeds: Option<u64>,
    pub digits: u32,
    pub twist: TwistMode,
    pub format: OutputFormat,
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            suites: Vec::new(),
            sites: None,
            a: None,
            b: None,
            n: None,
            entry: "all".into(),
            q: "random".into(),
            seed: 1,
            seeds: None,
            digits: 50,
            twist: TwistMode::Both,
            format: OutputFormat::Json,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn for_suite(suite: Suite) -> Self {
        RunConfig { suites: vec![suite], ..Self::default() }
    }

    fn pinned_q(&self) -> Result<Option<ExactScalar>> {
        if self.q == "random" {
            return Ok(None);
        }
        let q = parse_exact(&self.q).map_err(|_| Error::Config(format!("bad q {:?}", self.q)))?;
        validate_q(&q)?;
        Ok(Some(q))
    }

    fn entries(&self, defaults: &[Entry]) -> Result<Vec<Entry>> {
        if self.entry == "all" {
            return Ok(defaults.to_vec());
        }
        Ok(vec![self.entry.parse()?])
    }

    fn labels(&self, defaults: &[(usize, usize)]) -> Vec<(usize, usize)> {
        match (self.a, self.b) {
            (None, None) => defaults.to_vec(),
            (a, b) => {
                let keep = |&&(x, y): &&(usize, usize)| a.is_none_or(|a| a == x) && b.is_none_or(|b| b == y);
                let hits: Vec<_> = defaults.iter().filter(keep).copied().collect();
                if hits.is_empty() {
                    vec![(a.unwrap_or(0), b.unwrap_or(0))]
                } else {
                    hits
                }
            }
        }
    }

    fn seed_range(&self, default: u64) -> impl Iterator<Item = u64> {
        let count = self.seeds.unwrap_or(default);
        self.seed..self.seed + count
    }

    fn sites(&self, defaults: &[usize]) -> Vec<usize> {
        self.sites.map_or_else(|| defaults.to_vec(), |n| vec![n])
    }

    fn ns(&self, defaults: &[usize]) -> Vec<usize> {
        self.n.map_or_else(|| defaults.to_vec(), |n| vec![n])
    }

    /// The full list of cases, in canonical order.
    pub fn cases(&self) -> Result<Vec<CaseSpec>> {
        let q = self.pinned_q()?;
        let twist = match &self.twist {
            TwistMode::Fixed(c) => Some(parse_exact(c)?),
            _ => None,
        };
        if self.digits < super::newton::MIN_SOLVER_DIGITS {
            return Err(Error::Config(format!("digits must be at least {}", super::newton::MIN_SOLVER_DIGITS)));
        }
        let suites = if self.suites.is_empty() { Suite::ALL.to_vec() } else { self.suites.clone() };
        let mut out = Vec::new();
        for suite in suites {
            self.suite_cases(suite, &mut out)?;
        }
        for c in &mut out {
            c.q = q.clone();
            c.digits = self.digits;
        }
        if twist.is_some() {
            for c in out.iter_mut().filter(|c| c.twisted) {
                c.fixed_twist = twist.clone();
            }
        }
        out.sort_by_key(CaseSpec::id);
        out.dedup_by_key(|c| c.id());
        Ok(out)
    }

    fn suite_cases(&self, suite: Suite, out: &mut Vec<CaseSpec>) -> Result<()> {
        let twists = self.twist.variants();
        let mut push = |check: &str, sites: usize, (a, b): (usize, usize), n: usize, seeds: u64, twisted: &[bool]| {
            for seed in self.seed_range(seeds) {
                for &t in twisted {
                    out.push(CaseSpec::new(suite, check, sites, a, b, n, seed).twisted(t));
                }
            }
        };
        match suite {
            Suite::Rtt | Suite::Vacuum => {
                let seeds = if suite == Suite::Rtt { 20 } else { 3 };
                for n in self.sites(&[1, 2, 3]) {
                    push(suite.name(), n, (0, 0), 0, seeds, &twists);
                }
            }
            Suite::Izergin => {
                let sizes = self.ns(&[1, 2, 3]);
                push("initial", 0, (0, 0), 1, 10, &[false]);
                for &k in &sizes {
                    for check in ["rescaling", "inverse-order", "inverse-order-lr", "residue"] {
                        push(check, 0, (0, 0), k, 10, &[false]);
                    }
                    if k > 0 {
                        // base size of the reduced determinant
                        push("reduction", 0, (0, 0), k - 1, 10, &[false]);
                    }
                }
                let all: Vec<(usize, usize)> = (0..=4).flat_map(|m1| (0..=4 - m1).map(move |m2| (m1, m2))).collect();
                for (m1, m2) in self.labels(&all) {
                    push("summation", 0, (m1, m2), 0, 10, &[false]);
                }
            }
            Suite::ThreeTerm => push("k1", 0, (0, 0), 0, 100, &[false]),
            Suite::Bethe => {
                for n in self.sites(&[3]) {
                    push("closed-forms", n, (2, 2), 0, 3, &twists);
                }
            }
            Suite::Action => {
                let sites = self.sites(&[3]);
                let single = self.labels(&[(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)]);
                let double = self.labels(&[(0, 0), (1, 1)]);
                let n2 = [Entry(1, 3), Entry(1, 2), Entry(2, 3), Entry(2, 2)];
                for n in self.ns(&[1, 2]) {
                    let (labels, entries) =
                        if n == 1 { (&single, self.entries(&Entry::ALL)?) } else { (&double, self.entries(&n2)?) };
                    for &sites in &sites {
                        for &label in labels.iter().filter(|&&(a, b)| b <= a && a <= sites) {
                            for e in &entries {
                                push(&e.to_string(), sites, label, n, 3, &twists);
                            }
                        }
                    }
                }
            }
            Suite::Induction => {
                let entries = self.entries(&[Entry(1, 3), Entry(1, 2), Entry(2, 3), Entry(2, 2)])?;
                for sites in self.sites(&[3]) {
                    for label in self.labels(&[(0, 0), (1, 1)]) {
                        for e in &entries {
                            push(&e.to_string(), sites, label, 2, 3, &twists);
                        }
                    }
                }
            }
            Suite::Act31 => {
                for sites in self.sites(&[3]) {
                    for label in self.labels(&[(2, 1)]) {
                        push("31", sites, label, 1, 3, &twists);
                    }
                }
            }
            Suite::OnShell => {
                for sites in self.sites(&[2]) {
                    for label in self.labels(&[(0, 0), (1, 0), (1, 1)]) {
                        push("eigen", sites, label, 0, 1, &twists);
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub config: RunConfig,
    pub cases: Vec<VerificationCase>,
    pub totals: Totals,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.totals.failed == 0
    }

    /// The report with every timing field zeroed.
    pub fn without_timing(&self) -> Report {
        let mut r = self.clone();
        r.elapsed_ms = 0;
        for c in &mut r.cases {
            c.elapsed_ms = 0;
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.cases {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let residual = c.residual.map(|r| format!(" residual={r:.3e}")).unwrap_or_default();
            let _ = writeln!(s, "{status} {}{residual} ({} ms) {}", c.id, c.elapsed_ms, c.detail);
        }
        let t = &self.totals;
        let _ = writeln!(s, "{} cases, {} passed, {} failed in {} ms", t.cases, t.passed, t.failed, self.elapsed_ms);
        s
    }

    pub fn render(&self) -> String {
        match self.config.format {
            OutputFormat::Json => self.to_json() + "\n",
            OutputFormat::Text => self.to_text(),
        }
    }
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.parse().ok().filter(|&n| n > 0)
}

/// Runs every case of `config` and aggregates the report. Configuration
/// problems are returned as errors; verification failures are not.
pub fn run(config: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let specs = config.cases()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let cases: Vec<VerificationCase> = pool.install(|| specs.par_iter().map(run_case).collect());
    let passed = cases.iter().filter(|c| c.passed).count();
    Ok(Report {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        totals: Totals { cases: cases.len(), passed, failed: cases.len() - passed },
        cases,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}
