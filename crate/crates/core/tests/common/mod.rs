#![allow(dead_code)]

use growthlab_core::{Element, GSet, Group};
use proptest::prelude::*;

fn element(g: &Group, range: i64) -> impl Strategy<Value = Element> {
    let g = g.clone();
    let ranges: Vec<std::ops::RangeInclusive<i64>> = g
        .descriptor()
        .coordinate_moduli()
        .iter()
        .map(|&m| if m == 0 { -range..=range } else { 0..=m as i64 - 1 })
        .collect();
    ranges.prop_map(move |c| g.element(&c).unwrap())
}

/// Non-empty set of at most `max` random elements.
pub fn set_in(spec: &str, max: usize, range: i64) -> impl Strategy<Value = GSet> {
    let g = Group::parse(spec).unwrap();
    prop::collection::vec(element(&g, range), 1..=max).prop_map(move |e| GSet::new(&g, e).unwrap())
}

/// Symmetric set containing the identity, from at most `max` random elements.
pub fn symmetric_in(spec: &str, max: usize, range: i64) -> impl Strategy<Value = GSet> {
    let g = Group::parse(spec).unwrap();
    prop::collection::vec(element(&g, range), 0..=max).prop_map(move |e| {
        let mut all = vec![g.identity()];
        for x in e {
            all.push(g.inv(&x));
            all.push(x);
        }
        GSet::new(&g, all).unwrap()
    })
}
