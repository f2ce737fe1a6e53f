//! Verification suites. Every case is a pure function of its [`CaseSpec`]:
//! the seed fixes the sampled chain, label and action points.

pub mod newton;
pub mod onshell;
mod runner;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::action::{
    act_multiple, direct_action, evaluate_multiple, evaluate_resolved, evaluate_sequential, ActionPoints, Entry,
    RegulatorConfig,
};
use crate::bethe::{bethe_vector, dual_bethe_vector, BetheLabel};
use crate::chain::{build_monodromy, dual_vacuum, vacuum, ChainSpec, MonodromyCache, StateVector};
use crate::error::{Error, Result};
use crate::izergin::identities::{
    initial_condition, inverse_order, inverse_order_modified, reduction, rescaling, residue_regularity,
    summation_lemma, three_term,
};
use crate::izergin::{izergin_kl, izergin_kr};
use crate::rmatrix::{build_r_matrix, check_rtt, Deformation};
use crate::scalars::{
    degenerate_q, format_exact, sample_generic_config_with_q, sample_twist, ExactScalar, GenericConfig,
    RegulatedScalar, SampleConfig, SampleCounts, Scalar, SeriesScalar,
};

pub use runner::{run, OutputFormat, Report, RunConfig, Totals, TwistMode, THREADS_ENV};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Rtt,
    Vacuum,
    Izergin,
    ThreeTerm,
    Bethe,
    Action,
    Induction,
    Act31,
    OnShell,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Rtt,
        Suite::Vacuum,
        Suite::Izergin,
        Suite::ThreeTerm,
        Suite::Bethe,
        Suite::Action,
        Suite::Induction,
        Suite::Act31,
        Suite::OnShell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Rtt => "rtt",
            Suite::Vacuum => "vacuum",
            Suite::Izergin => "izergin",
            Suite::ThreeTerm => "three-term",
            Suite::Bethe => "bethe",
            Suite::Action => "action",
            Suite::Induction => "induction",
            Suite::Act31 => "act31",
            Suite::OnShell => "on-shell",
        }
    }

    /// Float suites report residuals; all others compare exactly.
    pub fn is_exact(self) -> bool {
        self != Suite::OnShell
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

/// Everything needed to reproduce one case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub suite: Suite,
    /// Entry "ij" for action suites, identity name otherwise.
    pub check: String,
    pub sites: usize,
    pub a: usize,
    pub b: usize,
    pub n: usize,
    pub seed: u64,
    pub twisted: bool,
    /// Pinned deformation parameter; sampled from the seed when absent.
    #[serde(with = "opt_exact")]
    pub q: Option<ExactScalar>,
    /// Twist constant for twisted cases; sampled from the seed when absent.
    #[serde(default, with = "opt_exact", skip_serializing_if = "Option::is_none")]
    pub fixed_twist: Option<ExactScalar>,
    /// Working precision of float suites.
    pub digits: u32,
}

impl CaseSpec {
    pub fn new(suite: Suite, check: impl Into<String>, sites: usize, a: usize, b: usize, n: usize, seed: u64) -> Self {
        CaseSpec {
            suite,
            check: check.into(),
            sites,
            a,
            b,
            n,
            seed,
            twisted: false,
            q: None,
            fixed_twist: None,
            digits: 50,
        }
    }

    pub fn twisted(mut self, twisted: bool) -> Self {
        self.twisted = twisted;
        self
    }

    /// "suite/check/N/a/b/n/seed"; twisted cases carry a `-twisted` suite suffix.
    pub fn id(&self) -> String {
        let tw = if self.twisted { "-twisted" } else { "" };
        format!("{}{tw}/{}/{}/{}/{}/{}/{}", self.suite, self.check, self.sites, self.a, self.b, self.n, self.seed)
    }
}

mod opt_exact {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::scalars::{format_exact, parse_exact, ExactScalar};

    pub fn serialize<S: Serializer>(x: &Option<ExactScalar>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_some(&format_exact(x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ExactScalar>, D::Error> {
        Option::<String>::deserialize(d)?.map(|t| parse_exact(&t).map_err(serde::de::Error::custom)).transpose()
    }
}

/// Sampled parameters, echoed as exact strings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseParams {
    pub q: String,
    pub twist: Option<String>,
    pub z: Vec<String>,
    pub u: Vec<String>,
    pub v: Vec<String>,
    pub w: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationCase {
    pub id: String,
    pub spec: CaseSpec,
    pub params: CaseParams,
    pub passed: bool,
    /// Exact suites: whether the two sides differed (errors count as mismatches).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_mismatch: Option<bool>,
    /// Float suites: the largest relative residual.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub detail: String,
    pub elapsed_ms: u64,
}

/// A sampled chain plus the remaining points of the case.
struct Sample {
    point: GenericConfig,
    def: Deformation<ExactScalar>,
    chain: Option<ChainSpec<ExactScalar>>,
    params: CaseParams,
}

impl Sample {
    fn chain(&self) -> Result<&ChainSpec<ExactScalar>> {
        self.chain.as_ref().ok_or_else(|| Error::Config("this check needs at least one site".into()))
    }
}

fn sample(spec: &CaseSpec, counts: SampleCounts) -> Result<Sample> {
    let cfg = SampleConfig::new(spec.seed);
    let point = sample_generic_config_with_q(&cfg, counts, spec.q.as_ref())?;
    let twist = match (&spec.fixed_twist, spec.twisted) {
        (_, false) => None,
        (Some(c), true) => Some(c.clone()),
        (None, true) => Some(sample_twist(&cfg)?),
    };
    let strs = |xs: &[ExactScalar]| xs.iter().map(format_exact).collect();
    let params = CaseParams {
        q: format_exact(&point.q),
        twist: twist.as_ref().map(format_exact),
        z: strs(&point.z),
        u: strs(&point.u),
        v: strs(&point.v),
        w: strs(&point.w),
    };
    let def = Deformation::new(point.q.clone())?;
    let chain = if point.z.is_empty() { None } else { Some(ChainSpec::new(point.z.clone(), point.q.clone(), twist)?) };
    Ok(Sample { point, def, chain, params })
}

/// Result of one suite body before timing is attached.
struct Outcome {
    passed: bool,
    residual: Option<f64>,
    detail: String,
}

impl Outcome {
    fn exact(failures: Vec<String>) -> Self {
        let passed = failures.is_empty();
        Outcome { passed, residual: None, detail: if passed { "exact".into() } else { failures.join("; ") } }
    }
}

/// Collects the names of failed sub-checks.
#[derive(Default)]
struct Checks(Vec<String>);

impl Checks {
    fn expect(&mut self, name: impl Into<String>, ok: bool) {
        if !ok {
            self.0.push(name.into());
        }
    }

    /// Records a failed or erroring comparison under `name`.
    fn compare<T: PartialEq>(&mut self, name: &str, lhs: Result<T>, rhs: Result<T>) {
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => self.expect(name, l == r),
            (Err(e), _) | (_, Err(e)) => self.0.push(format!("{name}: {e}")),
        }
    }

    fn outcome(self) -> Outcome {
        Outcome::exact(self.0)
    }
}

/// Runs one case; errors become failed cases carrying the diagnostic.
pub fn run_case(spec: &CaseSpec) -> VerificationCase {
    let start = Instant::now();
    let counts = counts_for(spec);
    let failed = |e: Error| Outcome { passed: false, residual: None, detail: format!("error: {e}") };
    let (params, outcome) = match sample(spec, counts) {
        Ok(s) => {
            let outcome = dispatch(spec, &s).unwrap_or_else(failed);
            (s.params, outcome)
        }
        Err(e) => (CaseParams::default(), failed(e)),
    };
    let exact = spec.suite.is_exact();
    VerificationCase {
        id: spec.id(),
        spec: spec.clone(),
        params,
        passed: outcome.passed,
        exact_mismatch: exact.then_some(!outcome.passed),
        residual: if exact { None } else { outcome.residual },
        detail: outcome.detail,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

/// How many points of each kind a case samples.
fn counts_for(spec: &CaseSpec) -> SampleCounts {
    let (sites, a, b) = (spec.sites, spec.a, spec.b);
    match spec.suite {
        Suite::Rtt | Suite::Vacuum => SampleCounts { sites, a: 0, b: 0, n: 2 },
        Suite::Izergin if spec.check == "summation" => SampleCounts { sites: 0, a, b, n: a + b },
        // xs, ys and two spare points (rescaling factor, reduction point)
        Suite::Izergin => SampleCounts { sites: 0, a: spec.n, b: spec.n, n: 2 },
        Suite::ThreeTerm => SampleCounts { sites: 0, a: 0, b: 0, n: 3 },
        Suite::Bethe => SampleCounts { sites, a: 2, b: 2, n: 0 },
        Suite::OnShell => SampleCounts { sites, a: 0, b: 0, n: 0 },
        Suite::Action | Suite::Induction | Suite::Act31 => SampleCounts { sites, a, b, n: spec.n },
    }
}

fn dispatch(spec: &CaseSpec, s: &Sample) -> Result<Outcome> {
    match spec.suite {
        Suite::Rtt => verify_rtt(s),
        Suite::Vacuum => verify_vacuum(s),
        Suite::Izergin => verify_izergin(spec, s),
        Suite::ThreeTerm => verify_three_term(s),
        Suite::Bethe => verify_bethe(s),
        Suite::Action => verify_action(spec.check.parse()?, s),
        Suite::Induction => verify_induction(spec.check.parse()?, s),
        Suite::Act31 => verify_act31(s),
        Suite::OnShell => verify_on_shell(spec, s),
    }
}

fn verify_rtt(s: &Sample) -> Result<Outcome> {
    let (u, v) = (&s.point.w[0], &s.point.w[1]);
    let r = build_r_matrix(u, v, &s.point.q)?;
    let report = check_rtt(&build_monodromy(s.chain()?, u)?, &build_monodromy(s.chain()?, v)?, &r)?;
    let mut checks = Checks::default();
    checks.expect(format!("{} of {} blocks differ", report.mismatched_blocks, report.blocks), report.holds());
    Ok(checks.outcome())
}

/// Triangularity on |0⟩ and ⟨0| and the diagonal eigenvalues, against
/// independently computed λ₁ = ∏f(u,z_i), λ₂ = 1, λ₃ = c^N.
fn verify_vacuum(s: &Sample) -> Result<Outcome> {
    let ch = s.chain()?;
    let (vac, dual) = (vacuum(ch), dual_vacuum(ch));
    let def = ch.deformation();
    let mut checks = Checks::default();
    for u in &s.point.w {
        let t = build_monodromy(ch, u)?;
        let mut lambda1 = ExactScalar::one();
        for z in ch.inhomogeneities().iter() {
            lambda1 = lambda1.mul(&def.f(u, z)?);
        }
        let lambda3 = match ch.twist() {
            Some(c) => c.powi(ch.sites() as i32)?,
            None => ExactScalar::one(),
        };
        let lambdas = [lambda1, ExactScalar::one(), lambda3];
        for i in 1..=3 {
            for j in 1..=3 {
                let right = t.apply(i, j, &vac);
                let left = t.apply_left(i, j, &dual);
                if i > j {
                    checks.expect(format!("T{i}{j}|0> != 0"), right.is_zero());
                }
                if i < j {
                    checks.expect(format!("<0|T{i}{j} != 0"), left.is_zero());
                }
                if i == j {
                    let lam = &lambdas[i - 1];
                    checks.expect(format!("T{i}{i}|0> eigenvalue"), right == vac.scale(lam));
                    checks.expect(format!("<0|T{i}{i} eigenvalue"), left == dual.scale(lam));
                }
            }
        }
    }
    Ok(checks.outcome())
}

fn verify_izergin(spec: &CaseSpec, s: &Sample) -> Result<Outcome> {
    let p = &s.point;
    let def = &s.def;
    let mut checks = Checks::default();
    match spec.check.as_str() {
        "initial" => checks.expect("K1 = g", initial_condition(def, &p.u[0], &p.v[0])?),
        "rescaling" => checks.expect("rescaling", rescaling(def, &p.u, &p.v, &p.w[0])?),
        "reduction" => checks.expect("reduction", reduction(def, &p.u, &p.v, &p.w[0])?),
        "inverse-order" => checks.expect("inverse order", inverse_order(def, &p.u, &p.v)?),
        "inverse-order-lr" => checks.expect("modified inverse order", inverse_order_modified(def, &p.u, &p.v)?),
        "residue" => {
            checks.expect("series field", residue_regularity::<SeriesScalar>(&p.q, &p.u, &p.v)?.holds());
            checks.expect("rational-function field", residue_regularity::<RegulatedScalar>(&p.q, &p.u, &p.v)?.holds());
        }
        "summation" => {
            let (alpha, beta, gamma) = (&p.u, &p.v, &p.w);
            let res = summation_lemma(def, alpha, beta, gamma)?;
            checks.expect("first form", res.first_form);
            checks.expect("second form", res.second_form);
            checks.expect("modified form", res.modified_form);
        }
        other => return Err(Error::Config(format!("unknown Izergin check {other:?}"))),
    }
    Ok(checks.outcome())
}

fn verify_three_term(s: &Sample) -> Result<Outcome> {
    let w = &s.point.w;
    let mut checks = Checks::default();
    checks.expect("three-term sum nonzero", three_term(&s.def, &w[0], &w[1], &w[2])?);
    Ok(checks.outcome())
}

/// Low-order Bethe vectors against their closed forms, plus symmetry.
fn verify_bethe(s: &Sample) -> Result<Outcome> {
    let ch = s.chain()?;
    let def = ch.deformation();
    let (u, v) = (&s.point.u[0], &s.point.v[0]);
    let (tu, tv) = (build_monodromy(ch, u)?, build_monodromy(ch, v)?);
    let (vac, dual) = (vacuum(ch), dual_vacuum(ch));
    let label = |us: &[ExactScalar], vs: &[ExactScalar]| BetheLabel::new(us.to_vec(), vs.to_vec());
    let mut checks = Checks::default();

    checks.compare("B00", bethe_vector(&BetheLabel::vacuum(), ch), Ok(vac.clone()));
    checks.compare("C00", dual_bethe_vector(&BetheLabel::vacuum(), ch), Ok(dual.clone()));
    checks.compare("B10", bethe_vector(&label(std::slice::from_ref(u), &[])?, ch), Ok(tu.apply(1, 2, &vac)));
    checks.compare("C10", dual_bethe_vector(&label(std::slice::from_ref(u), &[])?, ch), Ok(tu.apply_left(2, 1, &dual)));
    let zero = StateVector::zero(ch.dim());
    checks.compare("B01", bethe_vector(&label(&[], std::slice::from_ref(v))?, ch), Ok(zero.clone()));
    checks.compare("C01", dual_bethe_vector(&label(&[], std::slice::from_ref(v))?, ch), Ok(zero));

    let inv_f = def.f(v, u)?.try_inv()?;
    let (us, vs) = ([u.clone()], [v.clone()]);
    let b11 = tv.apply(2, 3, &tu.apply(1, 2, &vac)).add(&tv.apply(1, 3, &vac).scale(&izergin_kr(def, &vs, &us)?));
    checks.compare("B11", bethe_vector(&label(&us, &vs)?, ch), Ok(b11.scale(&inv_f)));
    let c11 = tv
        .apply_left(3, 2, &tu.apply_left(2, 1, &dual))
        .add(&tv.apply_left(3, 1, &dual).scale(&izergin_kl(def, &vs, &us)?));
    checks.compare("C11", dual_bethe_vector(&label(&us, &vs)?, ch), Ok(c11.scale(&inv_f)));

    let (pu, pv) = (&s.point.u, &s.point.v);
    let (ru, rv): (Vec<_>, Vec<_>) = (pu.iter().rev().cloned().collect(), pv.iter().rev().cloned().collect());
    for (name, us2, vs2) in [("swap u", &ru, pv), ("swap v", pu, &rv)] {
        let mut cache = MonodromyCache::new(ch.clone());
        let base = label(pu, pv)?;
        let swapped = label(us2, vs2)?;
        checks.compare(
            &format!("B22 {name}"),
            crate::bethe::build_bethe(&base, &mut cache),
            crate::bethe::build_bethe(&swapped, &mut cache),
        );
        checks.compare(
            &format!("C22 {name}"),
            crate::bethe::build_dual_bethe(&base, &mut cache),
            crate::bethe::build_dual_bethe(&swapped, &mut cache),
        );
    }
    Ok(checks.outcome())
}

fn case_label(s: &Sample) -> Result<BetheLabel<ExactScalar>> {
    BetheLabel::new(s.point.u.clone(), s.point.v.clone())
}

/// Partition-sum formula (two regulator directions) and, for one point, the
/// resolved form, each against the direct product.
fn verify_action(entry: Entry, s: &Sample) -> Result<Outcome> {
    let label = case_label(s)?;
    let w = &s.point.w;
    let direct = direct_action(entry, w, &label, &mut MonodromyCache::new(s.chain()?.clone()));
    let mut checks = Checks::default();
    let primary = RegulatorConfig::primary();
    let secondary = RegulatorConfig::secondary();
    checks.compare(
        "primary regulator",
        evaluate_multiple::<SeriesScalar>(entry, w, &label, s.chain()?, &primary),
        direct.clone(),
    );
    checks.compare(
        "secondary regulator",
        evaluate_multiple::<SeriesScalar>(entry, w, &label, s.chain()?, &secondary),
        direct.clone(),
    );
    if w.len() == 1 {
        checks.compare(
            "resolved form",
            evaluate_resolved::<SeriesScalar>(entry, &w[0], &label, s.chain()?, &primary),
            direct,
        );
    }
    Ok(checks.outcome())
}

fn verify_induction(entry: Entry, s: &Sample) -> Result<Outcome> {
    let label = case_label(s)?;
    let w = &s.point.w;
    let cfg = RegulatorConfig::primary();
    let mut checks = Checks::default();
    checks.compare(
        "sequential vs multiple",
        evaluate_sequential::<SeriesScalar>(entry, w, &label, s.chain()?, &cfg),
        evaluate_multiple::<SeriesScalar>(entry, w, &label, s.chain()?, &cfg),
    );
    Ok(checks.outcome())
}

/// Both denominator forms of the T₃₁ coefficients, compared as rational
/// functions of the regulator.
fn verify_act31(s: &Sample) -> Result<Outcome> {
    let lifted = s.chain()?.lift(RegulatedScalar::from_exact);
    let label = BetheLabel::new(
        s.point.u.iter().map(RegulatedScalar::from_exact).collect(),
        s.point.v.iter().map(RegulatedScalar::from_exact).collect(),
    )?;
    let points = ActionPoints::<RegulatedScalar>::regulated(&s.point.w, &RegulatorConfig::primary())?;
    let res = act_multiple(Entry(3, 1), &points, &label, &lifted, true)?;
    let mut checks = Checks::default();
    checks.expect("no terms", !res.terms.is_empty());
    for (k, t) in res.terms.iter().enumerate() {
        checks.expect(format!("term {k}"), Some(&t.coefficient) == t.alt_coefficient.as_ref());
    }
    Ok(checks.outcome())
}

fn verify_on_shell(spec: &CaseSpec, s: &Sample) -> Result<Outcome> {
    let out = onshell::verify_on_shell(s.chain()?, spec.a, spec.b, spec.seed, spec.digits, 5)?;
    let dual = out.dual_residuals.iter().copied().fold(0.0, f64::max);
    let control = out.control_residual.map_or("n/a".to_string(), |c| format!("{c:.3e}"));
    Ok(Outcome {
        passed: out.passed(),
        residual: Some(out.max_residual()),
        detail: format!(
            "newton residual {:.3e} (start {}, {} steps); eigen tol {:.1e}; control {control}; dual weight {}; dual residual {dual:.3e} (exploratory)",
            out.roots.residual,
            out.roots.start,
            out.roots.iterations,
            out.tolerance,
            if out.dual_weight_ok { "ok" } else { "wrong" },
        ),
    })
}

/// Rejects blacklisted deformation parameters before any case runs.
pub fn validate_q(q: &ExactScalar) -> Result<()> {
    if degenerate_q(q) {
        return Err(Error::Config(format!("q = {} is blacklisted (0 or ±1)", format_exact(q))));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_and_round_trip() {
        let spec = CaseSpec::new(Suite::Action, "31", 3, 2, 1, 1, 3).twisted(true);
        assert_eq!(spec.id(), "action-twisted/31/3/2/1/1/3");
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<CaseSpec>(&json).unwrap(), spec);
        assert_eq!("three-term".parse::<Suite>().unwrap(), Suite::ThreeTerm);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn representative_cases_pass() {
        let specs = [
            CaseSpec::new(Suite::Rtt, "rtt", 2, 0, 0, 0, 1),
            CaseSpec::new(Suite::Vacuum, "vacuum", 3, 0, 0, 0, 2).twisted(true),
            CaseSpec::new(Suite::Izergin, "summation", 0, 2, 1, 0, 3),
            CaseSpec::new(Suite::Izergin, "residue", 0, 0, 0, 2, 3),
            CaseSpec::new(Suite::Izergin, "reduction", 0, 0, 0, 2, 4),
            CaseSpec::new(Suite::ThreeTerm, "k1", 0, 0, 0, 0, 5),
            CaseSpec::new(Suite::Bethe, "closed-forms", 3, 2, 2, 0, 6).twisted(true),
            CaseSpec::new(Suite::Action, "31", 3, 2, 1, 1, 3),
            CaseSpec::new(Suite::Induction, "23", 3, 1, 1, 2, 7),
            CaseSpec::new(Suite::Act31, "31", 3, 2, 1, 1, 8).twisted(true),
        ];
        for spec in &specs {
            let case = run_case(spec);
            assert!(case.passed, "{}: {}", case.id, case.detail);
            assert_eq!(case.exact_mismatch, Some(false));
        }
    }

    #[test]
    fn errors_become_failed_cases() {
        let mut spec = CaseSpec::new(Suite::Action, "44", 3, 1, 0, 1, 1);
        assert!(!run_case(&spec).passed);
        spec.check = "13".into();
        spec.q = Some(ExactScalar::one());
        let case = run_case(&spec);
        assert!(!case.passed && case.detail.contains("blacklisted"), "{}", case.detail);
    }
}
