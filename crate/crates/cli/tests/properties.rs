mod common;

use botlint::corpus::{aggregate, analyze_files, CorpusOptions, TOTAL_ID};
use botlint::stats::{mann_whitney_u, pair_wins, vargha_delaney_a12};
use botlint_core::patterns::Category;
use botlint_core::Registry;
use proptest::prelude::*;

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec((0u8..6).prop_map(f64::from), 1..25),
        prop::collection::vec(-1e3f64..1e3, 1..25),
    ]
}

proptest! {
    #[test]
    fn u_and_a12_agree_with_pair_counting(a in sample(), b in sample()) {
        let r = mann_whitney_u(&a, &b).unwrap();
        let pairs = (a.len() * b.len()) as f64;
        prop_assert!((r.u - pair_wins(&a, &b)).abs() < 1e-9);
        prop_assert!((vargha_delaney_a12(&a, &b).unwrap() - r.u / pairs).abs() < 1e-12);
        prop_assert!((0.0..=pairs).contains(&r.u));
        prop_assert!((0.0..=1.0).contains(&r.p_value));
    }

    #[test]
    fn swapping_samples_mirrors_the_effect(a in sample(), b in sample()) {
        let ab = vargha_delaney_a12(&a, &b).unwrap();
        let ba = vargha_delaney_a12(&b, &a).unwrap();
        prop_assert!((ab + ba - 1.0).abs() < 1e-12);
        let p_ab = mann_whitney_u(&a, &b).unwrap().p_value;
        let p_ba = mann_whitney_u(&b, &a).unwrap().p_value;
        prop_assert!((p_ab - p_ba).abs() < 1e-12);
    }

    #[test]
    fn a_sample_against_itself_is_neutral(a in sample()) {
        prop_assert_eq!(vargha_delaney_a12(&a, &a).unwrap(), 0.5);
        prop_assert_eq!(mann_whitney_u(&a, &a).unwrap().p_value, 1.0);
    }

    #[test]
    fn shifting_both_samples_changes_nothing(
        a in prop::collection::vec(-50i32..50, 1..25),
        b in prop::collection::vec(-50i32..50, 1..25),
        shift in -100i32..100,
    ) {
        // integers keep ties exact under the shift
        let f = |v: &[i32], d: i32| v.iter().map(|x| f64::from(x + d)).collect::<Vec<_>>();
        let before = mann_whitney_u(&f(&a, 0), &f(&b, 0)).unwrap();
        let after = mann_whitney_u(&f(&a, shift), &f(&b, shift)).unwrap();
        prop_assert_eq!(before.u, after.u);
        prop_assert!((before.p_value - after.p_value).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Aggregating any subset in any order equals summing its members.
    #[test]
    fn aggregation_is_order_free_and_additive(mask in prop::collection::vec(any::<bool>(), 36), seed in any::<u64>()) {
        let manifest = common::manifest();
        let chosen: Vec<_> = manifest.fixtures.iter().zip(&mask).filter(|(_, m)| **m).map(|(f, _)| f).collect();
        let mut paths: Vec<_> = chosen.iter().map(|f| f.path()).collect();
        // cheap deterministic permutation
        paths.sort_by_key(|p| seed ^ (p.to_string_lossy().len() as u64).wrapping_mul(0x9e37_79b9));
        let opts = CorpusOptions { jobs: 1 + (seed % 4) as usize, ..CorpusOptions::new(Registry::builtin()) };
        let table = aggregate(&analyze_files(&paths, &opts), &Category::ALL);
        prop_assert_eq!(table.projects_analyzed, chosen.len());
        for row in table.rows.iter().filter(|r| r.pattern_id != TOTAL_ID) {
            let instances: usize = chosen.iter().map(|f| f.expected_count(&row.pattern_id)).sum();
            let projects = chosen.iter().filter(|f| f.expected_count(&row.pattern_id) > 0).count();
            prop_assert_eq!(row.instance_count, instances, "{}", row.pattern_id);
            prop_assert_eq!(row.project_count, projects, "{}", row.pattern_id);
            prop_assert!(row.project_count <= row.instance_count);
        }
    }
}
