//! Seed-driven invariants: any sampled point must satisfy the exact identities.

use bethe_gl3::action::{direct_action, transfer_eigenvalue, Entry};
use bethe_gl3::bethe::BetheLabel;
use bethe_gl3::chain::{build_monodromy, vacuum, ChainSpec, MonodromyCache};
use bethe_gl3::scalars::{sample_generic_config, sample_twist, SampleConfig, SampleCounts};
use bethe_gl3::verify::{run_case, CaseSpec, Suite};
use proptest::prelude::*;

fn entry() -> impl Strategy<Value = Entry> {
    prop::sample::select(Entry::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sampled_single_actions_match_the_oracle(seed in 0u64..10_000, e in entry(), label in 0usize..3, twisted: bool) {
        let (a, b) = [(0, 0), (1, 0), (1, 1)][label];
        let spec = CaseSpec::new(Suite::Action, e.to_string(), 2, a, b, 1, seed).twisted(twisted);
        let case = run_case(&spec);
        prop_assert!(case.passed, "{}: {}", case.id, case.detail);
    }

    #[test]
    fn cases_are_reproducible(seed in 0u64..10_000) {
        let spec = CaseSpec::new(Suite::Izergin, "summation", 0, 1, 2, 0, seed);
        let (x, y) = (run_case(&spec), run_case(&spec));
        prop_assert_eq!(x.params, y.params);
        prop_assert_eq!(x.passed, y.passed);
        prop_assert_eq!(x.detail, y.detail);
    }

    #[test]
    fn creation_operators_commute(seed in 0u64..10_000, twisted: bool, e in prop::sample::select(vec![Entry(1, 2), Entry(2, 3), Entry(1, 3)])) {
        let cfg = SampleConfig::new(seed);
        let p = sample_generic_config(&cfg, SampleCounts { sites: 2, a: 1, b: 1, n: 2 }).unwrap();
        let twist = twisted.then(|| sample_twist(&cfg).unwrap());
        let chain = ChainSpec::new(p.z, p.q, twist).unwrap();
        let label = BetheLabel::new(p.u, p.v).unwrap();
        let mut cache = MonodromyCache::new(chain);
        let reversed: Vec<_> = p.w.iter().rev().cloned().collect();
        let forward = direct_action(e, &p.w, &label, &mut cache).unwrap();
        prop_assert_eq!(forward, direct_action(e, &reversed, &label, &mut cache).unwrap());
    }

    #[test]
    fn vacuum_eigenvalue_of_the_transfer_matrix(seed in 0u64..10_000, sites in 1usize..4) {
        let cfg = SampleConfig::new(seed);
        let p = sample_generic_config(&cfg, SampleCounts { sites, a: 0, b: 0, n: 1 }).unwrap();
        let chain = ChainSpec::new(p.z, p.q, Some(sample_twist(&cfg).unwrap())).unwrap();
        let t = build_monodromy(&chain, &p.w[0]).unwrap().transfer();
        let tau = transfer_eigenvalue(&p.w[0], &[], &[], &chain).unwrap();
        prop_assert_eq!(t.apply(&vacuum(&chain)), vacuum(&chain).scale(&tau));
    }
}
