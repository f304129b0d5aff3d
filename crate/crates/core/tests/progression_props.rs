use growthlab_core::progressions::{
    containment_exponent, enumerate_nilpotent_progression, enumerate_nilprogression, enumerate_ordered, exponent_bound,
    hall_basis, ProgressionKind, ProgressionSpec,
};
use growthlab_core::{Budget, Element, Group};
use proptest::prelude::*;

fn heisenberg_gens(max: usize) -> impl Strategy<Value = Vec<Element>> {
    let g = Group::parse("ut:3:0").unwrap();
    prop::collection::vec(prop::array::uniform3(-2i64..=2), 1..=max)
        .prop_map(move |v| v.iter().map(|c| g.element(c).unwrap()).collect())
}

fn spec_from(gens: Vec<Element>, bounds: Vec<u64>) -> ProgressionSpec {
    let g = Group::parse("ut:3:0").unwrap();
    let bounds = bounds[..gens.len()].to_vec();
    ProgressionSpec::with_measured_step(&g, ProgressionKind::Ordered, gens, bounds).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nil_is_symmetric_and_holds_ord(gens in heisenberg_gens(3), bounds in prop::collection::vec(0u64..=2, 3)) {
        let budget = Budget::default();
        let spec = spec_from(gens, bounds);
        let ord = enumerate_ordered(&spec, &budget).unwrap();
        let nil = enumerate_nilprogression(&spec, &budget).unwrap();
        prop_assert!(nil.is_symmetric() && nil.contains_identity());
        prop_assert!(ord.contains_identity());
        prop_assert!(ord.is_subset(&nil));
        let cap: u64 = spec.bounds.iter().map(|l| 2 * l + 1).product();
        prop_assert!(ord.len() as u64 <= cap);
    }

    #[test]
    fn containment_exponent_within_bound(gens in heisenberg_gens(2), bounds in prop::collection::vec(1u64..=2, 2)) {
        let budget = Budget::default();
        let spec = spec_from(gens, bounds);
        let basis = hall_basis(spec.group(), &spec.generators, spec.step).unwrap();
        let r = containment_exponent(&spec, &basis, &budget).unwrap();
        prop_assert!(r.ord_in_nil && r.nil_in_bar);
        let k = r.k_star.unwrap();
        prop_assert!(k as f64 <= exponent_bound(spec.step, spec.rank()));
        prop_assert!(r.pass);
    }

    #[test]
    fn free_abelian_progressions_are_boxes(l1 in 0u64..6, l2 in 0u64..6) {
        let budget = Budget::default();
        let g = Group::parse("ab:0,0").unwrap();
        let gens = vec![g.element(&[1, 0]).unwrap(), g.element(&[0, 1]).unwrap()];
        let spec = ProgressionSpec::new(&g, ProgressionKind::Ordered, gens.clone(), vec![l1, l2], 1).unwrap();
        let ord = enumerate_ordered(&spec, &budget).unwrap();
        prop_assert_eq!(ord.len() as u64, (2 * l1 + 1) * (2 * l2 + 1));
        prop_assert_eq!(&enumerate_nilprogression(&spec, &budget).unwrap(), &ord);
        let basis = hall_basis(&g, &gens, 1).unwrap();
        prop_assert_eq!(&enumerate_nilpotent_progression(&spec, &basis, &budget).unwrap(), &ord);
    }

    #[test]
    fn abelian_enumerators_agree(x in 1i64..40, y in 1i64..40, l1 in 0u64..4, l2 in 0u64..4) {
        let budget = Budget::default();
        let g = Group::parse("ab:97").unwrap();
        let gens = vec![g.element(&[x]).unwrap(), g.element(&[y]).unwrap()];
        let spec = ProgressionSpec::new(&g, ProgressionKind::Ordered, gens.clone(), vec![l1, l2], 1).unwrap();
        let ord = enumerate_ordered(&spec, &budget).unwrap();
        let brute: Vec<Element> = (-(l1 as i64)..=l1 as i64)
            .flat_map(|i| (-(l2 as i64)..=l2 as i64).map(move |j| (i * x + j * y).rem_euclid(97)))
            .map(|v| g.element(&[v]).unwrap())
            .collect();
        prop_assert_eq!(&ord, &growthlab_core::GSet::new(&g, brute).unwrap());
        prop_assert_eq!(&enumerate_nilprogression(&spec, &budget).unwrap(), &ord);
        let basis = hall_basis(&g, &gens, 1).unwrap();
        prop_assert_eq!(&enumerate_nilpotent_progression(&spec, &basis, &budget).unwrap(), &ord);
    }

    #[test]
    fn text_form_round_trips(gens in heisenberg_gens(3), bounds in prop::collection::vec(0u64..=9, 3)) {
        let spec = spec_from(gens, bounds);
        prop_assert_eq!(ProgressionSpec::parse(&spec.to_text()).unwrap(), spec);
    }
}
