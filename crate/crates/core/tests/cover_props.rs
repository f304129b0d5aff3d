mod common;

use common::{set_in, symmetric_in};
use growthlab_core::approx::{
    freiman_image_certificate, greedy_cover_certificate, plunnecke_check, slicing_cover, FreimanMap,
};
use growthlab_core::covering::{check_chang_containment, chang_cover, ruzsa_cover, Arrangement, CHANG_C0};
use growthlab_core::{Budget, Element, GSet, Group};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn certificates_cover_the_square(a in symmetric_in("ut:3:5", 6, 0)) {
        let budget = Budget::default();
        let cert = greedy_cover_certificate(&a, &budget).unwrap();
        let a2 = a.product(&a, &budget).unwrap();
        prop_assert!(a2.is_subset(&cert.x().product(&a, &budget).unwrap()));
        prop_assert!(cert.x().is_subset(&a2));
    }

    #[test]
    fn slicing_count_within_bound(a in symmetric_in("ut:3:5", 4, 0), b in symmetric_in("ut:3:5", 4, 0)) {
        let budget = Budget::default();
        let ca = greedy_cover_certificate(&a, &budget).unwrap();
        let cb = greedy_cover_certificate(&b, &budget).unwrap();
        for (m, n) in [(2, 2), (3, 2), (2, 3)] {
            let c = slicing_cover(&ca, &cb, m, n, &budget).unwrap();
            prop_assert!(c.verified);
            prop_assert!(c.count as f64 <= c.bound);
        }
    }

    #[test]
    fn plunnecke_holds(a in set_in("ab:61", 10, 0)) {
        let budget = Budget::default();
        for total in 1..=5 {
            for m in 0..=total {
                prop_assert!(plunnecke_check(&a, m, total - m, &budget).unwrap().pass);
            }
        }
    }

    #[test]
    fn freiman_images_do_not_grow(l in 1i64..8, k in 0i64..50, extra in 0i64..20) {
        let budget = Budget::default();
        let src = Group::parse(&format!("ab:{}", 6 * l + 1 + extra)).unwrap();
        let dst = Group::parse("ab:50").unwrap();
        let a = GSet::new(&src, (-l..=l).map(|x| src.element(&[x]).unwrap())).unwrap();
        let n = 6 * l + 1 + extra;
        let f = FreimanMap::new(a.clone(), &dst, 3, |e: &Element| {
            let x = if e.0[0] > n / 2 { e.0[0] - n } else { e.0[0] };
            dst.element(&[x * k]).unwrap()
        })
        .unwrap();
        for x in a.iter() {
            prop_assert_eq!(f.apply(&src.inv(x)).unwrap(), &dst.inv(f.apply(x).unwrap()));
        }
        let cert = greedy_cover_certificate(&a, &budget).unwrap();
        let image = freiman_image_certificate(&f, &cert, &budget).unwrap();
        prop_assert!(image.k_upper() <= cert.k_upper());
    }

    #[test]
    fn ruzsa_translates_are_disjoint(a in set_in("ut:3:0", 10, 3), b in set_in("ut:3:0", 6, 3)) {
        let budget = Budget::default();
        let cover = ruzsa_cover(&a, &b, &budget).unwrap();
        let xb = cover.x.product(&b, &budget).unwrap();
        prop_assert_eq!(xb.len(), cover.x.len() * b.len());
        prop_assert!(cover.x.len() * b.len() <= cover.ab_size);
        let bbinv = b.product(&b.inverse_set(), &budget).unwrap();
        prop_assert!(a.is_subset(&cover.x.product(&bbinv, &budget).unwrap()));
        prop_assert_eq!(ruzsa_cover(&a, &b, &budget).unwrap(), cover);
    }

    #[test]
    fn chang_hulls_grow_by_two_k(a in symmetric_in("ab:401", 8, 0)) {
        let budget = Budget::default();
        let cert = greedy_cover_certificate(&a, &budget).unwrap();
        let b = GSet::identity(a.group());
        for arrangement in [Arrangement::InversesLeft, Arrangement::InversesRight] {
            let cover = chang_cover(&cert, &b, 1, arrangement, CHANG_C0, &budget).unwrap();
            let two_k = 2 * cover.k_upper;
            for w in cover.hulls.windows(2) {
                prop_assert!(w[1] >= two_k * w[0]);
            }
            prop_assert!(cover.s.iter().all(|s| s.len() <= two_k));
            prop_assert!(check_chang_containment(&cover, &a, &b, &budget).unwrap());
            let again = chang_cover(&cert, &b, 1, arrangement, CHANG_C0, &budget).unwrap();
            prop_assert_eq!(again.s, cover.s);
        }
    }
}
