mod common;

use common::symmetric_in;
use growthlab_core::approx::greedy_cover_certificate;
use growthlab_core::pipeline::{decompose, step_reduction};
use growthlab_core::Budget;
use num_rational::Ratio;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn decompositions_verify(a in symmetric_in("ut:3:3", 3, 0)) {
        let budget = Budget::default();
        let cert = greedy_cover_certificate(&a, &budget).unwrap();
        let d = decompose(&cert, &budget).unwrap();
        prop_assert!(d.h_normal);
        prop_assert_eq!(d.witnesses_verified, a.len());
        prop_assert_eq!(d.expansion_verified, Some(true));
        prop_assert!(d.delta.unwrap() > Ratio::from_integer(0));
        prop_assert_eq!(decompose(&cert, &budget).unwrap().report(), d.report());
    }

    #[test]
    fn reduction_lowers_the_step(a in symmetric_in("ut:3:5", 3, 0)) {
        let budget = Budget::default();
        let cert = greedy_cover_certificate(&a, &budget).unwrap();
        let red = step_reduction(&cert, &cert, 1, &budget).unwrap();
        prop_assert!(red.step_drop_verified);
        if red.input_step > 1 {
            prop_assert!(red.factor_steps.iter().all(|&s| s < red.input_step));
        }
        prop_assert_eq!(red.r, red.factors.len());
    }
}
