use super::*;
use crate::approx::greedy_cover_certificate;
use crate::group::heis;
use crate::progressions::enumerate_ordered;

fn b() -> Budget {
    Budget::default()
}

fn ball(spec: &str) -> GSet {
    let g = Group::parse(spec).unwrap();
    let mut e = vec![g.identity()];
    for x in g.standard_generators() {
        e.push(g.inv(&x));
        e.push(x);
    }
    GSet::new(&g, e).unwrap()
}

fn whole(spec: &str) -> GSet {
    let g = Group::parse(spec).unwrap();
    GSet::whole(&g, &b()).unwrap()
}

fn centre_quotient(g: &Group) -> QuotientView {
    let z = span(&GSet::new(g, [heis(0, 0, 1)]).unwrap(), &b()).unwrap();
    QuotientView::new(&z).unwrap()
}

/// Product of explicit finite sets, by brute force over all tuples.
fn brute_product(g: &Group, sets: &[Vec<Element>]) -> Vec<Element> {
    let mut acc = vec![g.identity()];
    for s in sets {
        let mut next: Vec<Element> = acc.iter().flat_map(|a| s.iter().map(|x| g.mul(a, x))).collect();
        next.sort();
        next.dedup();
        acc = next;
    }
    acc
}

#[test]
fn section_trivial_kernel_is_identity() {
    let a = ball("ut:3:3");
    let q = QuotientView::trivial(a.group());
    let s = build_section(&q, &a, &b()).unwrap();
    assert_eq!(s.len(), a.len());
    for (x, px) in s.entries() {
        assert_eq!(x, px);
    }
}

#[test]
fn section_heisenberg_centre_full_group() {
    let a = whole("ut:3:3");
    let g = a.group();
    let q = centre_quotient(g);
    let s = build_section(&q, &a, &b()).unwrap();
    assert_eq!(s.len(), 9);
    assert_eq!(s.checks_inverse, 27);
    assert_eq!(s.checks_product, 81);
    // φ picks the least preimage, which has zero corner entry.
    for (x, px) in s.entries() {
        assert_eq!(&q.rep(px), x);
        assert_eq!(px.coords()[1], 0);
    }
}

#[test]
fn section_of_kernel_has_one_entry() {
    let g = Group::parse("ut:3:3").unwrap();
    let q = centre_quotient(&g);
    let z = GSet::new(&g, [heis(0, 0, 0), heis(0, 0, 1), heis(0, 0, 2)]).unwrap();
    let s = build_section(&q, &z, &b()).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(s.phi(&g.identity()), Some(&g.identity()));
}

#[test]
fn section_rejects_asymmetric() {
    let g = Group::parse("ut:3:3").unwrap();
    let q = centre_quotient(&g);
    let a = GSet::new(&g, [heis(0, 0, 0), heis(1, 0, 0)]).unwrap();
    assert!(build_section(&q, &a, &b()).is_err());
}

#[test]
fn pullback_full_image() {
    let a = ball("ut:3:3");
    let q = centre_quotient(a.group());
    let p = q.project(&a).unwrap();
    let r = pullback_check(&q, &a, &p, 1, Ratio::from_integer(1), &b()).unwrap();
    assert!(r.pass);
    assert!(r.lhs >= a.len());
}

#[test]
fn pullback_half_of_image_of_a4() {
    let a = ball("ut:3:3");
    let g = a.group();
    let q = centre_quotient(g);
    let a4 = a.power(4, &b()).unwrap();
    let img = q.project(&a4).unwrap();
    let half = GSet::new(q.quotient(), img.members()[..img.len() / 2].to_vec()).unwrap();
    let c = Ratio::new(half.len() as u64, q.project(&a).unwrap().len() as u64).min(Ratio::from_integer(1));
    let r = pullback_check(&q, &a, &half, 4, c, &b()).unwrap();
    let a6 = a.power(6, &b()).unwrap();
    let brute = a6.iter().filter(|e| half.contains(&q.rep(e))).count();
    assert_eq!(r.lhs, brute);
    assert!(r.pass);
}

#[test]
fn pullback_trivial_kernel() {
    let a = ball("ut:3:5");
    let q = QuotientView::trivial(a.group());
    let r = pullback_check(&q, &a, &a, 1, Ratio::from_integer(1), &b()).unwrap();
    let a3 = a.power(3, &b()).unwrap();
    assert_eq!(r.lhs, a.iter().filter(|e| a3.contains(e)).count());
    assert!(r.pass);
}

#[test]
fn pullback_rejects_large_c() {
    let a = ball("ut:3:3");
    let q = centre_quotient(a.group());
    let p = GSet::identity(q.quotient());
    assert!(pullback_check(&q, &a, &p, 1, Ratio::from_integer(1), &b()).is_err());
}

#[test]
fn factorization_full_heisenberg_mod3() {
    let a = whole("ut:3:3");
    let cert = greedy_cover_certificate(&a, &b()).unwrap();
    let f = abelian_factorization(&cert, &b()).unwrap();
    assert_eq!(f.density(), Some(Ratio::from_integer(1)));
    assert_eq!(f.product_size, Some(27));
    assert_eq!(f.core_misses, 0);
}

#[test]
fn factorization_rejects_abelian() {
    let g = Group::parse("ab:12").unwrap();
    let a = GSet::whole(&g, &b()).unwrap();
    let cert = greedy_cover_certificate(&a, &b()).unwrap();
    assert!(matches!(abelian_factorization(&cert, &b()), Err(Error::StepTooLow(1))));
}

#[test]
fn factorization_ball_mod5() {
    let a = ball("ut:3:5");
    let g = a.group().clone();
    let cert = greedy_cover_certificate(&a, &b()).unwrap();
    let f = abelian_factorization(&cert, &b()).unwrap();
    let a18 = a.power(18, &b()).unwrap();
    let a24 = a.power(24, &b()).unwrap();
    assert!(f.h_part.is_subset(&a18));
    for c in &f.cyclic_parts {
        assert!(c.is_subset(&a24));
    }
    let sets: Vec<Vec<Element>> = f.parts().iter().map(|s| s.members().to_vec()).collect();
    let brute = brute_product(&g, &sets);
    assert_eq!(f.product_size, Some(brute.len()));
    let image = f.quotient.project(&a).unwrap();
    let d = f.density().unwrap();
    assert!(d >= Ratio::new(1, image.len() as u64));
}

#[test]
fn step_reduction_heisenberg_mod3() {
    let a = whole("ut:3:3");
    let cert = greedy_cover_certificate(&a, &b()).unwrap();
    let r = step_reduction(&cert, &cert, 1, &b()).unwrap();
    assert_eq!(r.input_step, 2);
    assert!(r.step_drop_verified);
    assert!(r.factor_steps.iter().all(|&s| s <= 1));
    for f in &r.factors {
        let img = r.quotient.project(f.a()).unwrap();
        let gens: Vec<Element> = img.iter().cloned().collect();
        let qg = r.quotient.quotient();
        for x in &gens {
            for y in &gens {
                assert_eq!(qg.mul(x, y), qg.mul(y, x));
            }
        }
    }
}

#[test]
fn step_reduction_abelian_base() {
    let g = Group::parse("ab:0").unwrap();
    let a = crate::oracle::interval(&g, -5, 5).unwrap();
    let cert = greedy_cover_certificate(&a, &b()).unwrap();
    let r = step_reduction(&cert, &cert, 1, &b()).unwrap();
    assert_eq!(r.r, 1);
    assert!(r.n.is_trivial());
    assert_eq!(r.factors[0].a(), &a);
}

#[test]
fn step_reduction_ut4_mod2() {
    let a = whole("ut:4:2");
    let cert = greedy_cover_certificate(&a, &b()).unwrap();
    let r = step_reduction(&cert, &cert, 1, &b()).unwrap();
    assert_eq!(r.input_step, 3);
    assert!(r.step_drop_verified);
    assert!(r.factor_steps.iter().all(|&s| s <= 2));
}

#[test]
fn step_reduction_requires_containment() {
    let a = ball("ut:3:5");
    let big = a.power(3, &b()).unwrap();
    let small = greedy_cover_certificate(&a, &b()).unwrap();
    let cert = greedy_cover_certificate(&big, &b()).unwrap();
    assert!(step_reduction(&cert, &small, 2, &b()).is_err());
}

#[test]
fn normal_closure_radius_of_x() {
    let a = ball("ut:3:3");
    let g = a.group();
    let cert = greedy_cover_certificate(&a, &b()).unwrap();
    let h = span(&GSet::new(g, [heis(1, 0, 0)]).unwrap(), &b()).unwrap();
    let (n, k) = normal_closure_radius(&h, &cert, &b()).unwrap();
    let xz = span(&GSet::new(g, [heis(1, 0, 0), heis(0, 0, 1)]).unwrap(), &b()).unwrap();
    assert_eq!(n.elements(), xz.elements());
    assert!(k <= 4);
    let powers = a.powers(k, &b()).unwrap();
    assert!(n.elements().is_subset(&powers[k - 1]));
    assert!(!n.elements().is_subset(&powers[k - 2]));
}

#[test]
fn normal_closure_radius_trivial_and_normal() {
    let a = ball("ut:3:3");
    let g = a.group();
    let cert = greedy_cover_certificate(&a, &b()).unwrap();
    let (n, k) = normal_closure_radius(&SubgroupHandle::trivial(g), &cert, &b()).unwrap();
    assert!(n.is_trivial());
    assert_eq!(k, 0);
    let z = span(&GSet::new(g, [heis(0, 0, 1)]).unwrap(), &b()).unwrap();
    let (n, k) = normal_closure_radius(&z, &cert, &b()).unwrap();
    assert_eq!(n.elements(), z.elements());
    assert_eq!(k, a.covering_power(z.elements(), 64, &b()).unwrap().unwrap());
}

#[test]
fn decompose_subgroup() {
    let a = whole("ut:3:3");
    let cert = greedy_cover_certificate(&a, &b()).unwrap();
    let d = decompose(&cert, &b()).unwrap();
    assert_eq!(d.h.elements(), &a);
    assert_eq!(d.p_ord.rank(), 0);
    assert_eq!(d.delta, Some(Ratio::from_integer(1)));
    let c = corollary_covers(&d, &cert, Corollary::Ruzsa, &b()).unwrap();
    assert_eq!(c.x.unwrap().len(), 1);
}

fn check_decomposition(d: &Decomposition) {
    let g = d.group();
    let a = &d.a;
    // Normality by brute force over all of H and A.
    for x in a.iter() {
        for e in d.h.elements().iter() {
            assert!(d.h.contains(&g.conjugate(x, e)));
        }
    }
    assert!(d.delta.unwrap() > Ratio::from_integer(0));
    let mut sets: Vec<Vec<Element>> = vec![d.h.elements().members().to_vec()];
    for p in &d.pieces {
        sets.push(match p {
            Piece::Sparse(s) => s.members().to_vec(),
            Piece::Progression(spec) => enumerate_ordered(spec, &b()).unwrap().members().to_vec(),
        });
    }
    let prod = brute_product(g, &sets);
    for x in a.iter() {
        assert!(prod.binary_search(x).is_ok());
    }
    let p = enumerate_ordered(&d.p_ord, &b()).unwrap();
    let k = d.radius_p.unwrap();
    let powers = a.powers(k.max(1), &b()).unwrap();
    assert!(k == 0 || p.is_subset(&powers[k - 1]));
}

#[test]
fn decompose_heisenberg_mod3_ball() {
    let a = ball("ut:3:3");
    let cert = greedy_cover_certificate(&a, &b()).unwrap();
    let d = decompose(&cert, &b()).unwrap();
    assert!(d.h_normal);
    assert_eq!(d.expansion_verified, Some(true));
    check_decomposition(&d);
    let mut xi = d.xi.clone();
    xi.sort();
    assert_eq!(xi, (0..d.pieces.len()).collect::<Vec<_>>());
    for which in [Corollary::Ruzsa, Corollary::Chang] {
        let c = corollary_covers(&d, &cert, which, &b()).unwrap();
        assert!(c.contained);
    }
    let c = corollary_covers(&d, &cert, Corollary::Ruzsa, &b()).unwrap();
    assert_eq!(c.progression.rank(), 2 * d.p_ord.rank());
}

#[test]
fn decompose_heisenberg_mod5_ball() {
    let a = ball("ut:3:5");
    let cert = greedy_cover_certificate(&a, &b()).unwrap();
    let d = decompose(&cert, &b()).unwrap();
    check_decomposition(&d);
}

#[test]
fn decompose_is_deterministic() {
    let a = ball("ut:3:3");
    let cert = greedy_cover_certificate(&a, &b()).unwrap();
    let d1 = decompose(&cert, &b()).unwrap().report();
    let d2 = decompose(&cert, &b()).unwrap().report();
    assert_eq!(serde_json::to_string(&d1).unwrap(), serde_json::to_string(&d2).unwrap());
}

#[test]
fn decompose_torsion_free_h_trivial() {
    let a = ball("ut:3:0");
    let cert = greedy_cover_certificate(&a, &b()).unwrap();
    let d = decompose(&cert, &b()).unwrap();
    assert_eq!(d.h.len(), 1);
    assert!(d.witnesses_verified == a.len());
}
