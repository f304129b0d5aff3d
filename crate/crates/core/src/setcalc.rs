//! Exact finite-set arithmetic: products, powers, symmetrization and
//! growth statistics.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, Ordering};

use num_rational::Ratio;
use rayon::prelude::*;
use rustc_hash::FxHashSet;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::group::{Element, Group};

/// Products with fewer pair multiplications than this run on one thread.
const PAR_THRESHOLD: u64 = 1 << 16;

/// A finite set of elements of one parent group.
///
/// Members are canonical representatives kept sorted and deduplicated, so
/// iteration follows the canonical scan order.
#[derive(Clone, PartialEq, Eq)]
pub struct GSet {
    group: Group,
    members: Vec<Element>,
}

impl std::fmt::Debug for GSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GSet")
            .field("group", &self.group)
            .field("members", &self.members)
            .finish()
    }
}

impl GSet {
    /// Validate and canonicalise `elements`.
    pub fn new(group: &Group, elements: impl IntoIterator<Item = Element>) -> Result<Self> {
        let mut members = Vec::new();
        for e in elements {
            group.descriptor().validate(&e)?;
            members.push(group.canonical(&e));
        }
        Ok(GSet::from_reps(group, members))
    }

    /// Build from raw coordinate tuples, reducing residues.
    pub fn from_coords<'a>(
        group: &Group,
        coords: impl IntoIterator<Item = &'a [i64]>,
    ) -> Result<Self> {
        let mut members = Vec::new();
        for c in coords {
            members.push(group.element(c)?);
        }
        Ok(GSet::from_reps(group, members))
    }

    /// Build from elements already known to be canonical representatives.
    pub(crate) fn from_reps(group: &Group, mut members: Vec<Element>) -> Self {
        members.sort_unstable();
        members.dedup();
        GSet {
            group: group.clone(),
            members,
        }
    }

    pub fn empty(group: &Group) -> Self {
        GSet {
            group: group.clone(),
            members: Vec::new(),
        }
    }

    pub fn identity(group: &Group) -> Self {
        GSet::singleton(group, group.identity())
    }

    pub fn singleton(group: &Group, e: Element) -> Self {
        GSet {
            group: group.clone(),
            members: vec![group.canonical(&e)],
        }
    }

    /// Every element of a finite group.
    pub fn whole(group: &Group, budget: &Budget) -> Result<Self> {
        Ok(GSet::from_reps(group, group.enumerate(budget.elements)?))
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Element> {
        self.members.iter()
    }

    pub fn members(&self) -> &[Element] {
        &self.members
    }

    pub fn into_members(self) -> Vec<Element> {
        self.members
    }

    pub fn first(&self) -> Option<&Element> {
        self.members.first()
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.members.binary_search(e).is_ok()
    }

    /// Position of `e` in canonical order.
    pub fn index_of(&self, e: &Element) -> Option<usize> {
        self.members.binary_search(e).ok()
    }

    pub fn contains_identity(&self) -> bool {
        self.contains(&self.group.identity())
    }

    pub fn is_subset(&self, other: &GSet) -> bool {
        self.len() <= other.len() && self.members.iter().all(|e| other.contains(e))
    }

    /// Elements of `self` missing from `other`.
    pub fn missing_from(&self, other: &GSet) -> Vec<Element> {
        self.members
            .iter()
            .filter(|e| !other.contains(e))
            .cloned()
            .collect()
    }

    pub fn union(&self, other: &GSet) -> Result<GSet> {
        self.group.ensure_same(&other.group)?;
        let mut v = self.members.clone();
        v.extend(other.members.iter().cloned());
        Ok(GSet::from_reps(&self.group, v))
    }

    pub fn intersection(&self, other: &GSet) -> Result<GSet> {
        self.group.ensure_same(&other.group)?;
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        Ok(small.filter(|e| large.contains(e)))
    }

    pub fn difference(&self, other: &GSet) -> Result<GSet> {
        self.group.ensure_same(&other.group)?;
        Ok(self.filter(|e| !other.contains(e)))
    }

    pub fn filter(&self, mut keep: impl FnMut(&Element) -> bool) -> GSet {
        GSet {
            group: self.group.clone(),
            members: self.members.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }

    /// Image under `f`, which must return canonical representatives of
    /// `target`.
    pub fn map(&self, target: &Group, f: impl Fn(&Element) -> Element) -> GSet {
        GSet::from_reps(target, self.members.iter().map(f).collect())
    }

    /// `A⁻¹`.
    pub fn inverse_set(&self) -> GSet {
        let g = &self.group;
        GSet::from_reps(g, self.members.iter().map(|a| g.inv(a)).collect())
    }

    pub fn is_symmetric(&self) -> bool {
        self.members.iter().all(|a| self.contains(&self.group.inv(a)))
    }

    /// `A ∪ A⁻¹ ∪ {1}`; the empty set becomes `{1}`.
    pub fn symmetrize(&self) -> GSet {
        let g = &self.group;
        let mut v = self.members.clone();
        v.extend(self.members.iter().map(|a| g.inv(a)));
        v.push(g.identity());
        GSet::from_reps(g, v)
    }

    /// `{g}·A`.
    pub fn translate_left(&self, g: &Element) -> GSet {
        let grp = &self.group;
        GSet::from_reps(grp, self.members.iter().map(|a| grp.mul(g, a)).collect())
    }

    /// `A·{g}`.
    pub fn translate_right(&self, g: &Element) -> GSet {
        let grp = &self.group;
        GSet::from_reps(grp, self.members.iter().map(|a| grp.mul(a, g)).collect())
    }

    /// The product set `AB`.
    pub fn product(&self, other: &GSet, budget: &Budget) -> Result<GSet> {
        self.group.ensure_same(&other.group)?;
        let pairs = self.len() as u64 * other.len() as u64;
        budget.check_pairs(pairs, "product")?;
        let g = &self.group;
        if pairs < PAR_THRESHOLD {
            let mut acc: FxHashSet<Element> = FxHashSet::default();
            for a in &self.members {
                for b in &other.members {
                    acc.insert(g.mul(a, b));
                }
                budget.check_size(acc.len(), "product")?;
            }
            let members: Vec<Element> = acc.into_iter().collect();
            return Ok(GSet::from_reps(g, members));
        }
        // Partition whichever operand is smaller; each worker keeps a local set.
        let over = AtomicBool::new(false);
        let left_outer = self.len() <= other.len();
        let (outer, inner) = if left_outer {
            (&self.members, &other.members)
        } else {
            (&other.members, &self.members)
        };
        let merged = outer
            .par_iter()
            .fold(FxHashSet::default, |mut acc: FxHashSet<Element>, o| {
                if over.load(Ordering::Relaxed) {
                    return acc;
                }
                for i in inner {
                    let p = if left_outer { g.mul(o, i) } else { g.mul(i, o) };
                    acc.insert(p);
                }
                if acc.len() > budget.elements {
                    over.store(true, Ordering::Relaxed);
                }
                acc
            })
            .reduce(FxHashSet::default, |mut a, mut b| {
                if a.len() < b.len() {
                    std::mem::swap(&mut a, &mut b);
                }
                a.extend(b);
                if a.len() > budget.elements {
                    over.store(true, Ordering::Relaxed);
                }
                a
            });
        if over.load(Ordering::Relaxed) {
            return Err(Error::budget("product", budget.elements as u64));
        }
        let mut members: Vec<Element> = merged.into_iter().collect();
        members.par_sort_unstable();
        Ok(GSet {
            group: g.clone(),
            members,
        })
    }

    /// `A^n` for `n ≥ 1`.
    pub fn power(&self, n: usize, budget: &Budget) -> Result<GSet> {
        Ok(self.powers(n, budget)?.pop().expect("n >= 1"))
    }

    /// `[A, A², …, A^n]`.
    ///
    /// When `1 ∈ A` only the newly reached layer is multiplied at each step,
    /// since then `A^{k+1} = A^k ∪ (A^k \ A^{k-1})·A`.
    pub fn powers(&self, n: usize, budget: &Budget) -> Result<Vec<GSet>> {
        if n == 0 {
            return Err(Error::precondition("power exponent must be at least 1"));
        }
        let mut out = vec![self.clone()];
        let with_id = self.contains_identity();
        let mut frontier = self.clone();
        for _ in 1..n {
            let last = out.last().expect("non-empty");
            let next = if with_id {
                let grown = frontier.product(self, budget)?;
                let next = last.union(&grown)?;
                frontier = next.difference(last)?;
                next
            } else {
                last.product(self, budget)?
            };
            budget.check_size(next.len(), "power")?;
            out.push(next);
        }
        Ok(out)
    }

    /// `A^k` for the least `k ≥ 1` with `target ⊆ A^k`, searched up to
    /// `max_k`. Returns `None` when not reached. Stops early once powers
    /// stabilise.
    pub fn covering_power(
        &self,
        target: &GSet,
        max_k: usize,
        budget: &Budget,
    ) -> Result<Option<usize>> {
        self.group.ensure_same(&target.group)?;
        let with_id = self.contains_identity();
        let mut cur = self.clone();
        let mut frontier = self.clone();
        for k in 1..=max_k {
            if target.is_subset(&cur) {
                return Ok(Some(k));
            }
            let next = if with_id {
                cur.union(&frontier.product(self, budget)?)?
            } else {
                cur.product(self, budget)?
            };
            budget.check_size(next.len(), "power")?;
            if next == cur {
                return Ok(None);
            }
            if with_id {
                frontier = next.difference(&cur)?;
            }
            cur = next;
        }
        Ok(None)
    }

    pub fn growth_stats(&self, n: usize, budget: &Budget) -> Result<GrowthStats> {
        let sizes: Vec<usize> = self.powers(n, budget)?.iter().map(GSet::len).collect();
        Ok(GrowthStats { sizes })
    }
}

/// Sizes `|A|, |A²|, …, |A^n|`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GrowthStats {
    pub sizes: Vec<usize>,
}

impl GrowthStats {
    /// `|A^m| / |A|`.
    pub fn ratio(&self, m: usize) -> Ratio<u64> {
        Ratio::new(self.sizes[m - 1] as u64, self.sizes[0].max(1) as u64)
    }

    pub fn doubling(&self) -> Option<Ratio<u64>> {
        (self.sizes.len() >= 2).then(|| self.ratio(2))
    }

    pub fn tripling(&self) -> Option<Ratio<u64>> {
        (self.sizes.len() >= 3).then(|| self.ratio(3))
    }

    pub fn is_monotone(&self) -> bool {
        self.sizes.windows(2).all(|w| w[0] <= w[1])
    }

    /// Columns `m,size_m,ratio_m` with a header row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,size_m,ratio_m\n");
        for m in 1..=self.sizes.len() {
            let r = self.ratio(m);
            writeln!(s, "{m},{},{:.6}", self.sizes[m - 1], ratio_f64(r)).unwrap();
        }
        s
    }
}

pub fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
