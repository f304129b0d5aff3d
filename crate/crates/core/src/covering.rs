//! Constructive Ruzsa and Chang covering with witness-checked containments.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::approx::ApproxCertificate;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::setcalc::GSet;

/// Default constant in the bound on the number of Chang stages.
pub const CHANG_C0: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuzsaCover {
    pub x: GSet,
    pub ab_size: usize,
    /// `⌈|AB|/|B|⌉`.
    pub ratio_bound: usize,
    pub verified: bool,
    /// One entry per element of `A`.
    pub witnesses: Vec<RuzsaWitness>,
}

/// `a·u = x·v` with `x ∈ X` and `u, v ∈ B`, so `a = x·v·u⁻¹`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuzsaWitness {
    pub a: Element,
    pub x: Element,
    pub u: Element,
    pub v: Element,
}

/// Pick `s ∈ A` greedily (canonical order) so that the translates of `t`
/// by the picked elements are pairwise disjoint; translates are `s·T` when
/// `left`, else `T·s`. Every other `a ∈ A` gets a witness pair
/// `(s, t, t')` with `a·t = s·t'` (left) or `t·a = t'·s` (right).
struct Packing {
    picked: Vec<Element>,
    witnesses: Vec<(Element, Element, Element, Element)>,
}

fn pack(a: &GSet, t: &GSet, left: bool) -> Packing {
    let g = a.group();
    let mut owner: FxHashMap<Element, (usize, Element)> = FxHashMap::default();
    let mut picked: Vec<Element> = Vec::new();
    let mut witnesses = Vec::new();
    for s in a.iter() {
        let image = |u: &Element| if left { g.mul(s, u) } else { g.mul(u, s) };
        let clash = t.iter().find_map(|u| owner.get(&image(u)).map(|(i, v)| (u.clone(), *i, v.clone())));
        match clash {
            Some((u, i, v)) => witnesses.push((s.clone(), picked[i].clone(), u, v)),
            None => {
                let idx = picked.len();
                picked.push(s.clone());
                for u in t.iter() {
                    owner.insert(image(u), (idx, u.clone()));
                }
            }
        }
    }
    Packing { picked, witnesses }
}

/// `X ⊆ A` maximal with `xB` pairwise disjoint; then `A ⊆ XBB⁻¹` and
/// `|X| ≤ ⌈|AB|/|B|⌉`.
pub fn ruzsa_cover(a: &GSet, b: &GSet, budget: &Budget) -> Result<RuzsaCover> {
    a.group().ensure_same(b.group())?;
    if b.is_empty() {
        return Err(Error::precondition("B must be non-empty"));
    }
    let g = a.group();
    let ab_size = a.product(b, budget)?.len();
    let ratio_bound = ab_size.div_ceil(b.len());
    let packing = pack(a, b, true);
    // a·u = x·v  ⇒  a = x·v·u⁻¹
    for (e, x, u, v) in &packing.witnesses {
        if g.mul(&g.mul(x, v), &g.inv(u)) != *e {
            return Err(Error::verification(format!("bad Ruzsa witness for {e:?}")));
        }
    }
    let b0 = b.first().expect("non-empty").clone();
    let mut witnesses: Vec<RuzsaWitness> = packing
        .picked
        .iter()
        .map(|p| RuzsaWitness {
            a: p.clone(),
            x: p.clone(),
            u: b0.clone(),
            v: b0.clone(),
        })
        .collect();
    witnesses.extend(packing.witnesses.into_iter().map(|(a, x, u, v)| RuzsaWitness { a, x, u, v }));
    witnesses.sort_by(|p, q| p.a.cmp(&q.a));
    let x = GSet::from_reps(g, packing.picked);
    if x.len() > ratio_bound {
        return Err(Error::verification(format!(
            "|X| = {} exceeds ⌈|AB|/|B|⌉ = {ratio_bound}",
            x.len()
        )));
    }
    Ok(RuzsaCover {
        x,
        ab_size,
        ratio_bound,
        verified: true,
        witnesses,
    })
}

/// `A ⊆ X·(B B⁻¹)` by direct expansion, for independent re-checks.
pub fn check_ruzsa_containment(a: &GSet, x: &GSet, b: &GSet, budget: &Budget) -> Result<bool> {
    let bb = b.product(&b.inverse_set(), budget)?;
    Ok(a.is_subset(&x.product(&bb, budget)?))
}

/// Which side the final containment of a Chang cover is written on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arrangement {
    /// `A ⊆ S_{t−1}⁻¹⋯S_1⁻¹ B⁻¹B S_1⋯S_t`, hulls `T_{i+1} = T_i S_i`.
    InversesLeft,
    /// `A ⊆ S_t S_{t−1}⋯S_1 B B⁻¹ S_1⁻¹⋯S_{t−1}⁻¹`, hulls `T_{i+1} = S_i T_i`.
    InversesRight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChangCover {
    pub s: Vec<GSet>,
    pub t: usize,
    /// `|T_1|, …, |T_t|`.
    pub hulls: Vec<usize>,
    pub arrangement: Arrangement,
    pub k_upper: usize,
    pub c: f64,
    pub t_bound: usize,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangReport {
    pub t: usize,
    pub s_sizes: Vec<usize>,
    pub hulls: Vec<usize>,
    pub arrangement: Arrangement,
    pub k_upper: usize,
    pub t_bound: usize,
    pub verified: bool,
}

impl ChangCover {
    pub fn report(&self) -> ChangReport {
        ChangReport {
            t: self.t,
            s_sizes: self.s.iter().map(GSet::len).collect(),
            hulls: self.hulls.clone(),
            arrangement: self.arrangement,
            k_upper: self.k_upper,
            t_bound: self.t_bound,
            verified: self.verified,
        }
    }
}

/// Iterated packing against growing hulls `T_1 = B`, stopping once a maximal
/// disjoint family has at most `2K` members.
pub fn chang_cover(
    cert: &ApproxCertificate,
    b: &GSet,
    m: usize,
    arrangement: Arrangement,
    c0: f64,
    budget: &Budget,
) -> Result<ChangCover> {
    let a = cert.a();
    a.group().ensure_same(b.group())?;
    if b.is_empty() || m == 0 {
        return Err(Error::precondition("Chang covering needs non-empty B and m >= 1"));
    }
    let am = a.power(m, budget)?;
    if !b.is_subset(&am) {
        return Err(Error::precondition(format!("B is not contained in A^{m}")));
    }
    let g = a.group();
    let k = cert.k_upper();
    let two_k = 2 * k;
    let c = a.len() as f64 / b.len() as f64;
    let t_bound = (c0 * (c.ln() + m as f64 * (k as f64).ln() + 1.0)).ceil().max(1.0) as usize;
    let left = arrangement == Arrangement::InversesRight;
    let mut hull = b.clone();
    let mut s_list: Vec<GSet> = Vec::new();
    let mut hulls: Vec<usize> = Vec::new();
    loop {
        hulls.push(hull.len());
        if s_list.len() + 1 > t_bound {
            return Err(Error::verification(format!(
                "Chang covering exceeded {t_bound} stages"
            )));
        }
        let packing = pack(a, &hull, left);
        if packing.picked.len() <= two_k {
            verify_witnesses(g, &packing, left)?;
            s_list.push(GSet::from_reps(g, packing.picked));
            break;
        }
        let picked: Vec<Element> = packing.picked.into_iter().take(two_k).collect();
        let s = GSet::from_reps(g, picked);
        let next = if left {
            s.product(&hull, budget)?
        } else {
            hull.product(&s, budget)?
        };
        if next.len() != hull.len() * s.len() {
            return Err(Error::verification("Chang translates overlap"));
        }
        s_list.push(s);
        hull = next;
    }
    Ok(ChangCover {
        t: s_list.len(),
        s: s_list,
        hulls,
        arrangement,
        k_upper: k,
        c,
        t_bound,
        verified: true,
    })
}

fn verify_witnesses(g: &Group, packing: &Packing, left: bool) -> Result<()> {
    for (e, s, u, v) in &packing.witnesses {
        // left: e·u = s·v ⇒ e = s v u⁻¹; right: u·e = v·s ⇒ e = u⁻¹ v s
        let back = if left {
            g.mul(&g.mul(s, v), &g.inv(u))
        } else {
            g.mul(&g.mul(&g.inv(u), v), s)
        };
        if back != *e {
            return Err(Error::verification(format!("bad Chang witness for {e:?}")));
        }
    }
    Ok(())
}

/// Re-check the final containment by explicit expansion of the hull.
pub fn check_chang_containment(cover: &ChangCover, a: &GSet, b: &GSet, budget: &Budget) -> Result<bool> {
    let (last, rest) = cover.s.split_last().expect("t >= 1");
    let mut hull = b.clone();
    for s in rest {
        hull = match cover.arrangement {
            Arrangement::InversesLeft => hull.product(s, budget)?,
            Arrangement::InversesRight => s.product(&hull, budget)?,
        };
    }
    let rhs = match cover.arrangement {
        Arrangement::InversesLeft => hull.inverse_set().product(&hull, budget)?.product(last, budget)?,
        Arrangement::InversesRight => last.product(&hull, budget)?.product(&hull.inverse_set(), budget)?,
    };
    Ok(a.is_subset(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::greedy_cover_certificate;
    use crate::group::span;

    fn b() -> Budget {
        Budget::default()
    }

    fn interval(g: &Group, lo: i64, hi: i64) -> GSet {
        GSet::from_reps(g, (lo..=hi).map(|i| g.element(&[i]).unwrap()).collect())
    }

    #[test]
    fn ruzsa_interval() {
        let g = Group::parse("ab:0").unwrap();
        let a = interval(&g, -10, 10);
        let r = ruzsa_cover(&a, &a, &b()).unwrap();
        assert_eq!(r.x, GSet::singleton(&g, Element::new(&[-10])));
        assert_eq!(r.ratio_bound, 2);
        assert!(check_ruzsa_containment(&a, &r.x, &a, &b()).unwrap());
    }

    #[test]
    fn ruzsa_subgroup() {
        let g = Group::parse("ut:3:3").unwrap();
        let h = span(&GSet::from_coords(&g, [[1i64, 0, 0].as_slice()]).unwrap(), &b()).unwrap();
        let r = ruzsa_cover(h.elements(), h.elements(), &b()).unwrap();
        assert_eq!(r.x.len(), 1);
    }

    #[test]
    fn chang_trivial_stage() {
        let g = Group::parse("ab:101").unwrap();
        let a = interval(&g, -10, 10);
        let cert = greedy_cover_certificate(&a, &b()).unwrap();
        for arr in [Arrangement::InversesLeft, Arrangement::InversesRight] {
            let c = chang_cover(&cert, &a, 1, arr, CHANG_C0, &b()).unwrap();
            assert_eq!(c.t, 1);
            assert!(c.s[0].len() <= cert.k_upper());
            assert!(check_chang_containment(&c, &a, &a, &b()).unwrap());
        }
    }

    #[test]
    fn chang_small_b() {
        let g = Group::parse("ab:101").unwrap();
        let a = interval(&g, -10, 10);
        let small = interval(&g, -2, 2);
        let cert = greedy_cover_certificate(&a, &b()).unwrap();
        for arr in [Arrangement::InversesLeft, Arrangement::InversesRight] {
            let c = chang_cover(&cert, &small, 1, arr, CHANG_C0, &b()).unwrap();
            assert!(c.t <= 4);
            assert!(c.s.iter().all(|s| s.len() <= 2 * cert.k_upper()));
            assert!(check_chang_containment(&c, &a, &small, &b()).unwrap());
            assert!(c.hulls.windows(2).all(|w| w[1] >= 2 * cert.k_upper() * w[0]));
        }
    }

    #[test]
    fn chang_rejects_b_outside_power() {
        let g = Group::parse("ab:101").unwrap();
        let a = interval(&g, -2, 2);
        let cert = greedy_cover_certificate(&a, &b()).unwrap();
        let far = interval(&g, 40, 41);
        assert!(chang_cover(&cert, &far, 2, Arrangement::InversesLeft, CHANG_C0, &b()).is_err());
    }
}
