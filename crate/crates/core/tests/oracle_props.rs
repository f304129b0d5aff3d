mod common;

use common::symmetric_in;
use growthlab_core::approx::greedy_cover_certificate;
use growthlab_core::oracle::{derive_sanders_cover, find_coset_progression, OracleOptions};
use growthlab_core::{Budget, GSet};
use proptest::prelude::*;

fn two_a_minus_two_a(a: &GSet, budget: &Budget) -> GSet {
    let d = a.product(&a.inverse_set(), budget).unwrap();
    d.product(&d, budget).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coset_progression_lies_in_two_a_minus_two_a(a in symmetric_in("ab:211", 8, 0)) {
        let budget = Budget::default();
        let res = find_coset_progression(&a, &OracleOptions::default(), &budget).unwrap();
        prop_assert!(res.best.realized.is_subset(&two_a_minus_two_a(&a, &budget)));
        prop_assert!(res.best.realized.is_symmetric());
        prop_assert!(res.best.h.elements().is_subset(&res.best.realized));
        prop_assert_eq!(res.a_size, a.len());
    }

    #[test]
    fn sanders_cover_contains_a(a in symmetric_in("ab:6,35", 6, 0)) {
        let budget = Budget::default();
        let res = find_coset_progression(&a, &OracleOptions::default(), &budget).unwrap();
        let cert = greedy_cover_certificate(&a, &budget).unwrap();
        let cover = derive_sanders_cover(&a, &res, Some(cert.k_upper()), &budget).unwrap();
        prop_assert!(cover.contained && cover.pass);
        prop_assert!(cover.x_size <= cover.x_bound);
        let h2p = res.best.doubled(&budget).unwrap();
        prop_assert!(a.is_subset(&cover.x.product(&h2p.realized, &budget).unwrap()));
    }

    #[test]
    fn density_grows_with_rank(a in symmetric_in("ab:97", 6, 0)) {
        let budget = Budget::default();
        let mut last = 0.0;
        for rank in 0..=2 {
            let d = find_coset_progression(&a, &OracleOptions::with_rank(rank), &budget).unwrap().density();
            prop_assert!(d >= last);
            last = d;
        }
    }
}
