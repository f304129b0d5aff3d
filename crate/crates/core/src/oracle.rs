//! Search for large coset progressions `H + P ⊆ 2A − 2A` in abelian groups,
//! and the covering `A ⊆ X + H + 2P` derived from one.

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::approx::sum_difference;
use crate::budget::Budget;
use crate::covering::ruzsa_cover;
use crate::error::{Error, Result};
use crate::group::{Element, Group, SubgroupHandle};
use crate::setcalc::GSet;

/// Finite parents above this order are rejected.
pub const MAX_PARENT_ORDER: u128 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    /// Largest number of progression generators tried.
    pub rank_max: usize,
    /// Number of popular differences kept as generator candidates.
    pub pool: usize,
    /// Upper bound on the subgroups examined.
    pub max_subgroups: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            rank_max: 2,
            pool: 12,
            max_subgroups: 256,
        }
    }
}

impl OracleOptions {
    pub fn with_rank(rank_max: usize) -> Self {
        OracleOptions {
            rank_max,
            ..OracleOptions::default()
        }
    }
}

/// `H + P(x; L)` with its realised element set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetProgression {
    pub h: SubgroupHandle,
    pub generators: Vec<Element>,
    pub bounds: Vec<u64>,
    pub realized: GSet,
}

impl CosetProgression {
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// `H + P(x; L)` for arbitrary bounds.
    pub fn realize(h: &SubgroupHandle, gens: &[Element], bounds: &[u64], budget: &Budget) -> Result<GSet> {
        let g = h.group();
        let mut acc = h.elements().clone();
        for (x, &l) in gens.iter().zip(bounds) {
            let l = l as i64;
            let layer = GSet::from_reps(g, (-l..=l).map(|k| g.pow(x, k)).collect());
            acc = acc.product(&layer, budget)?;
        }
        Ok(acc)
    }

    /// Same generators with doubled bounds.
    pub fn doubled(&self, budget: &Budget) -> Result<CosetProgression> {
        let bounds: Vec<u64> = self.bounds.iter().map(|l| 2 * l).collect();
        let realized = CosetProgression::realize(&self.h, &self.generators, &bounds, budget)?;
        Ok(CosetProgression {
            h: self.h.clone(),
            generators: self.generators.clone(),
            bounds,
            realized,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub best: CosetProgression,
    pub a_size: usize,
    pub d_size: usize,
    pub subgroups_examined: usize,
    pub candidates_examined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub rank: usize,
    pub h_size: usize,
    #[serde(rename = "L")]
    pub bounds: Vec<u64>,
    pub size: usize,
    pub density: f64,
    pub candidates_examined: usize,
    pub subgroups_examined: usize,
    pub contained: bool,
}

impl OracleResult {
    pub fn density(&self) -> f64 {
        self.best.realized.len() as f64 / self.a_size as f64
    }

    pub fn report(&self) -> OracleReport {
        OracleReport {
            rank: self.best.rank(),
            h_size: self.best.h.len(),
            bounds: self.best.bounds.clone(),
            size: self.best.realized.len(),
            density: self.density(),
            candidates_examined: self.candidates_examined,
            subgroups_examined: self.subgroups_examined,
            contained: true,
        }
    }
}

/// Checks that the elements of `a` commute pairwise, so `⟨A⟩` is abelian.
pub fn ensure_commuting(a: &GSet) -> Result<()> {
    let g = a.group();
    if g.is_abelian() {
        return Ok(());
    }
    let m = a.members();
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            if !g.commutator(&m[i], &m[j]).is_zero() {
                return Err(Error::NotAbelian(format!("{:?} and {:?} do not commute", m[i], m[j])));
            }
        }
    }
    Ok(())
}

/// Finite subgroups of `⟨D⟩` contained in `D`: cyclic ones first, then
/// joins, deduplicated, in order of discovery.
fn subgroups_within(d: &GSet, limit: usize) -> Vec<SubgroupHandle> {
    let g = d.group();
    let mut cyclic: Vec<Vec<Element>> = Vec::new();
    for x in d.iter() {
        if x.is_zero() {
            continue;
        }
        let mut elems = vec![g.identity()];
        let mut cur = x.clone();
        let mut ok = true;
        while !cur.is_zero() {
            if !d.contains(&cur) {
                ok = false;
                break;
            }
            elems.push(cur.clone());
            cur = g.mul(&cur, x);
        }
        if ok {
            elems.sort();
            if !cyclic.contains(&elems) {
                cyclic.push(elems);
            }
        }
    }
    let mut found: Vec<Vec<Element>> = vec![vec![g.identity()]];
    let mut i = 0;
    while i < found.len() && found.len() < limit {
        let base = found[i].clone();
        for c in &cyclic {
            if c.iter().all(|e| base.binary_search(e).is_ok()) {
                continue;
            }
            let mut join: Vec<Element> = Vec::with_capacity(base.len() * c.len());
            for p in &base {
                for q in c {
                    join.push(g.mul(p, q));
                }
            }
            join.sort();
            join.dedup();
            if join.iter().all(|e| d.contains(e)) && !found.contains(&join) {
                found.push(join);
                if found.len() >= limit {
                    break;
                }
            }
        }
        i += 1;
    }
    found
        .into_iter()
        .map(|v| {
            SubgroupHandle::from_set(GSet::from_reps(g, v)).expect("joins of commuting cyclic groups")
        })
        .collect()
}

/// Differences ranked by `|A ∩ (A + d)|`, ties by canonical order, keeping
/// one of each pair `±d`.
fn popular_differences(a: &GSet, pool: usize) -> Vec<Element> {
    let g = a.group();
    let mut score: FxHashMap<Element, usize> = FxHashMap::default();
    for p in a.iter() {
        for q in a.iter() {
            let d = g.mul(p, &g.inv(q));
            if !d.is_zero() {
                *score.entry(d).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(usize, Element)> = score.into_iter().map(|(d, s)| (s, d)).collect();
    ranked.sort_by(|x, y| y.0.cmp(&x.0).then_with(|| x.1.cmp(&y.1)));
    let mut out: Vec<Element> = Vec::new();
    for (_, d) in ranked {
        if out.len() >= pool {
            break;
        }
        let neg = g.inv(&d);
        if !out.contains(&neg) {
            out.push(d);
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Grow bounds round-robin while `H + P ⊆ D` and the set still grows.
fn grow(
    h: &SubgroupHandle,
    gens: &[Element],
    d: &GSet,
    budget: &Budget,
) -> Result<(Vec<u64>, GSet)> {
    let g = h.group();
    let mut bounds = vec![0u64; gens.len()];
    let mut current = h.elements().clone();
    let mut active = vec![true; gens.len()];
    let cap = d.len() as u64;
    while active.iter().any(|&a| a) {
        for i in 0..gens.len() {
            if !active[i] {
                continue;
            }
            let l = bounds[i] as i64 + 1;
            let mut others = bounds.clone();
            others[i] = 0;
            let rest = CosetProgression::realize(h, gens, &others, budget)?;
            let ends = GSet::from_reps(g, vec![g.pow(&gens[i], l), g.pow(&gens[i], -l)]);
            let added = rest.product(&ends, budget)?;
            let fresh = added.difference(&current)?;
            if fresh.is_empty() || !fresh.is_subset(d) || bounds[i] + 1 > cap {
                active[i] = false;
                continue;
            }
            bounds[i] += 1;
            current = current.union(&fresh)?;
        }
    }
    Ok((bounds, current))
}

/// Best `H + P ⊆ 2A − 2A` found over all subgroups inside `2A − 2A` and all
/// tuples of popular differences up to `rank_max`.
pub fn find_coset_progression(a: &GSet, opts: &OracleOptions, budget: &Budget) -> Result<OracleResult> {
    if a.is_empty() {
        return Err(Error::precondition("oracle needs a non-empty set"));
    }
    let g = a.group();
    if let Some(order) = g.order() {
        if order > MAX_PARENT_ORDER {
            return Err(Error::ParentTooLarge {
                order,
                limit: MAX_PARENT_ORDER,
            });
        }
    }
    ensure_commuting(a)?;
    let d = sum_difference(a, 2, 2, budget)?;
    let subgroups = subgroups_within(&d, opts.max_subgroups);
    let pool = popular_differences(a, opts.pool);
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    for k in 0..=opts.rank_max.min(pool.len()) {
        tuples.extend(combinations(pool.len(), k));
    }
    let mut best: Option<(usize, usize, CosetProgression)> = None;
    let mut examined = 0usize;
    for h in &subgroups {
        for t in &tuples {
            examined += 1;
            let gens: Vec<Element> = t.iter().map(|&i| pool[i].clone()).collect();
            let (bounds, realized) = grow(h, &gens, &d, budget)?;
            let (gens, bounds): (Vec<Element>, Vec<u64>) = gens
                .into_iter()
                .zip(bounds)
                .filter(|(_, l)| *l > 0)
                .unzip();
            let size = realized.len();
            let rank = gens.len();
            let better = match &best {
                None => true,
                Some((s, r, _)) => size > *s || (size == *s && rank < *r),
            };
            if better {
                best = Some((
                    size,
                    rank,
                    CosetProgression {
                        h: h.clone(),
                        generators: gens,
                        bounds,
                        realized,
                    },
                ));
            }
        }
    }
    let (_, _, best) = best.expect("the trivial progression is always examined");
    if !best.realized.is_subset(&d) {
        return Err(Error::verification("H + P escapes 2A − 2A"));
    }
    Ok(OracleResult {
        best,
        a_size: a.len(),
        d_size: d.len(),
        subgroups_examined: subgroups.len(),
        candidates_examined: examined,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandersCover {
    #[serde(skip)]
    pub x: GSet,
    pub x_size: usize,
    /// `⌈|A + H + P| / |H + P|⌉`.
    pub x_bound: usize,
    pub hp_size: usize,
    pub h2p_size: usize,
    pub doubling: f64,
    pub k_upper: Option<usize>,
    /// `K⁸|A|` with `K = |A + A|/|A|`.
    pub size_bound: f64,
    pub contained: bool,
    pub pass: bool,
}

/// Cover `A ⊆ X + H + 2P` via Ruzsa covering by `H + P` and check
/// `|H + 2P| ≤ K⁸|A|`.
pub fn derive_sanders_cover(
    a: &GSet,
    res: &OracleResult,
    k_upper: Option<usize>,
    budget: &Budget,
) -> Result<SandersCover> {
    let hp = &res.best.realized;
    a.group().ensure_same(hp.group())?;
    let cover = ruzsa_cover(a, hp, budget)?;
    let x_bound = cover.ratio_bound;
    let h2p = res.best.doubled(budget)?;
    let contained = a.is_subset(&cover.x.product(&h2p.realized, budget)?);
    let a2 = a.product(a, budget)?.len() as u128;
    let n = a.len() as u128;
    // |H+2P|·|A|^8 ≤ |A+A|^8·|A|
    let lhs = (h2p.realized.len() as u128).checked_mul(n.pow(8));
    let rhs = a2.checked_pow(8).and_then(|p| p.checked_mul(n));
    let doubling = a2 as f64 / n as f64;
    let size_bound = doubling.powi(8) * n as f64;
    let size_ok = match (lhs, rhs) {
        (Some(l), Some(r)) => l <= r,
        _ => h2p.realized.len() as f64 <= size_bound,
    };
    if !contained {
        return Err(Error::verification("A ⊄ X + H + 2P"));
    }
    Ok(SandersCover {
        x_size: cover.x.len(),
        x: cover.x,
        x_bound,
        hp_size: hp.len(),
        h2p_size: h2p.realized.len(),
        doubling,
        k_upper,
        size_bound,
        contained,
        pass: contained && size_ok && cover.verified,
    })
}

/// Convenience: interval `{lo..=hi}` in a cyclic or infinite cyclic group.
pub fn interval(g: &Group, lo: i64, hi: i64) -> Result<GSet> {
    let mut v = Vec::new();
    for i in lo..=hi {
        v.push(g.element(&[i])?);
    }
    Ok(GSet::from_reps(g, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> Budget {
        Budget::default()
    }

    #[test]
    fn subgroup_is_its_own_progression() {
        let g = Group::parse("ab:12").unwrap();
        let a = GSet::from_coords(&g, [[0i64].as_slice(), &[3], &[6], &[9]]).unwrap();
        let r = find_coset_progression(&a, &OracleOptions::default(), &b()).unwrap();
        assert_eq!(r.best.h.elements(), &a);
        assert_eq!(r.best.rank(), 0);
        assert_eq!(r.density(), 1.0);
        let c = derive_sanders_cover(&a, &r, Some(1), &b()).unwrap();
        assert_eq!(c.x, GSet::identity(&g));
        assert_eq!(c.h2p_size, 4);
        assert!(c.pass);
    }

    #[test]
    fn interval_in_z100() {
        let g = Group::parse("ab:100").unwrap();
        let a = interval(&g, -5, 5).unwrap();
        let r = find_coset_progression(&a, &OracleOptions::default(), &b()).unwrap();
        assert!(r.best.h.is_trivial());
        assert_eq!(r.best.generators, vec![Element::new(&[1])]);
        assert_eq!(r.best.bounds, vec![20]);
        assert_eq!(r.best.realized, interval(&g, -20, 20).unwrap());
        let c = derive_sanders_cover(&a, &r, None, &b()).unwrap();
        assert_eq!(c.h2p_size, 81);
        assert_eq!(c.x_size, 1);
        assert!(c.pass);
    }

    #[test]
    fn coset_union() {
        let g = Group::parse("ab:24").unwrap();
        let a = GSet::from_reps(
            &g,
            (0..24).filter(|i| i % 3 != 2).map(|i| Element::new(&[i])).collect(),
        );
        let r = find_coset_progression(&a, &OracleOptions::default(), &b()).unwrap();
        assert_eq!(r.best.h.len(), 24);
        assert!(r.density() >= 1.0);
        assert_eq!(r.best.rank(), 0);
    }

    #[test]
    fn rank_monotone() {
        let g = Group::parse("ab:60").unwrap();
        let a = GSet::from_coords(&g, [[0i64].as_slice(), &[1], &[59], &[10], &[50], &[11], &[49]]).unwrap();
        let mut last = 0.0;
        for rank in 0..=3 {
            let r = find_coset_progression(&a, &OracleOptions::with_rank(rank), &b()).unwrap();
            assert!(r.density() >= last);
            last = r.density();
        }
    }

    #[test]
    fn rejects_large_and_non_abelian() {
        let big = Group::parse("ab:20000").unwrap();
        let a = GSet::identity(&big);
        assert!(matches!(
            find_coset_progression(&a, &OracleOptions::default(), &b()),
            Err(Error::ParentTooLarge { .. })
        ));
        let h = Group::parse("ut:3:3").unwrap();
        let a = GSet::from_coords(&h, [[1i64, 0, 0].as_slice(), &[0, 1, 0]]).unwrap();
        assert!(ensure_commuting(&a).is_ok());
        let a = GSet::from_coords(&h, [[1i64, 0, 0].as_slice(), &[0, 1, 0], &[0, 0, 1]]).unwrap();
        assert!(matches!(
            find_coset_progression(&a, &OracleOptions::default(), &b()),
            Err(Error::NotAbelian(_))
        ));
    }
}
