//! Finite subgroups by closure: spans, normal closures, derived subgroups and
//! lower central series.

use std::collections::VecDeque;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::{Element, Group};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::setcalc::GSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normality {
    Yes,
    No,
    Unknown,
}

/// A fully enumerated finite subgroup together with a generating set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupHandle {
    elements: GSet,
    generators: Vec<Element>,
    normality: Normality,
}

impl SubgroupHandle {
    pub fn trivial(group: &Group) -> Self {
        SubgroupHandle {
            elements: GSet::identity(group),
            generators: Vec::new(),
            normality: Normality::Yes,
        }
    }

    /// The whole of a finite group.
    pub fn whole(group: &Group, budget: &Budget) -> Result<Self> {
        let elements = GSet::whole(group, budget)?;
        Ok(SubgroupHandle {
            elements,
            generators: group.standard_generators(),
            normality: Normality::Yes,
        })
    }

    /// Wrap a set after checking it is a subgroup.
    pub fn from_set(set: GSet) -> Result<Self> {
        let g = set.group().clone();
        if !set.contains_identity() {
            return Err(Error::MissingIdentity);
        }
        for a in set.iter() {
            if !set.contains(&g.inv(a)) {
                return Err(Error::NotSymmetric);
            }
            for b in set.iter() {
                if !set.contains(&g.mul(a, b)) {
                    return Err(Error::precondition(format!(
                        "set is not closed: {a:?}·{b:?} missing"
                    )));
                }
            }
        }
        let generators = greedy_generators(&set);
        Ok(SubgroupHandle {
            elements: set,
            generators,
            normality: Normality::Unknown,
        })
    }

    pub fn group(&self) -> &Group {
        self.elements.group()
    }

    pub fn elements(&self) -> &GSet {
        &self.elements
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn normality(&self) -> Normality {
        self.normality
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.elements.contains(e)
    }

    /// Whether `g H g⁻¹ ⊆ H`, checked on generators.
    pub fn is_normalized_by(&self, g: &Element) -> bool {
        let grp = self.group();
        self.generators
            .iter()
            .all(|h| self.contains(&grp.conjugate(g, h)))
    }

    /// Check normality against `conj_gens` and record the outcome.
    pub fn verify_normal(&mut self, conj_gens: &[Element]) -> bool {
        let ok = conj_gens.iter().all(|c| self.is_normalized_by(c));
        self.normality = if ok { Normality::Yes } else { Normality::No };
        ok
    }
}

/// Generating set picked in canonical order: keep an element when it is not
/// in the span of those already kept.
fn greedy_generators(set: &GSet) -> Vec<Element> {
    let g = set.group();
    let mut gens: Vec<Element> = Vec::new();
    let mut reached: FxHashSet<Element> = FxHashSet::default();
    reached.insert(g.identity());
    for e in set.iter() {
        if reached.contains(e) {
            continue;
        }
        gens.push(e.clone());
        reached = closure(g, reached, &gens, usize::MAX).expect("no limit");
    }
    gens
}

/// Extend a subgroup (given as an element set) to the subgroup generated by
/// it and `gens`.
fn closure(
    g: &Group,
    start: FxHashSet<Element>,
    gens: &[Element],
    limit: usize,
) -> Result<FxHashSet<Element>> {
    let mut seen = start;
    let mut queue: VecDeque<Element> = seen.iter().cloned().collect();
    while let Some(e) = queue.pop_front() {
        for s in gens {
            let p = g.mul(&e, s);
            if seen.insert(p.clone()) {
                if seen.len() > limit {
                    return Err(Error::budget("subgroup closure", limit as u64));
                }
                queue.push_back(p);
            }
        }
    }
    Ok(seen)
}

fn closure_gens(g: &Group, gens: &[Element]) -> Vec<Element> {
    let mut all: Vec<Element> = Vec::new();
    for s in gens {
        if !s.is_zero() {
            all.push(s.clone());
            all.push(g.inv(s));
        }
    }
    all.sort();
    all.dedup();
    all
}

fn span_elements(g: &Group, gens: &[Element], budget: &Budget) -> Result<GSet> {
    let nontrivial: Vec<Element> = gens.iter().filter(|s| !s.is_zero()).cloned().collect();
    if g.is_torsion_free() && !nontrivial.is_empty() {
        return Err(Error::budget(
            "subgroup closure (infinite cyclic generator)",
            budget.elements as u64,
        ));
    }
    let mut start = FxHashSet::default();
    start.insert(g.identity());
    let set = closure(g, start, &closure_gens(g, &nontrivial), budget.elements)?;
    Ok(GSet::from_reps(g, set.into_iter().collect()))
}

/// `⟨gens⟩`.
pub fn span(gens: &GSet, budget: &Budget) -> Result<SubgroupHandle> {
    let g = gens.group();
    let generators: Vec<Element> = gens.iter().filter(|s| !s.is_zero()).cloned().collect();
    let elements = span_elements(g, &generators, budget)?;
    let normality = if elements.len() == 1 {
        Normality::Yes
    } else {
        Normality::Unknown
    };
    Ok(SubgroupHandle {
        elements,
        generators,
        normality,
    })
}

/// Smallest subgroup containing `h` that is normalised by every element of
/// `conj_gens`.
pub fn normal_closure(
    h: &SubgroupHandle,
    conj_gens: &GSet,
    budget: &Budget,
) -> Result<SubgroupHandle> {
    let g = h.group();
    g.ensure_same(conj_gens.group())?;
    normal_closure_of(g, h.generators(), conj_gens.members(), budget)
}

pub(crate) fn normal_closure_of(
    g: &Group,
    gens: &[Element],
    conj: &[Element],
    budget: &Budget,
) -> Result<SubgroupHandle> {
    let conj = closure_gens(g, conj);
    let mut generators: Vec<Element> = gens.iter().filter(|s| !s.is_zero()).cloned().collect();
    let mut elements = span_elements(g, &generators, budget)?;
    let mut pending: Vec<Element> = generators.clone();
    while !pending.is_empty() {
        let mut added = Vec::new();
        for x in &pending {
            for c in &conj {
                let y = g.conjugate(c, x);
                if !elements.contains(&y) && !added.contains(&y) {
                    added.push(y);
                }
            }
        }
        if added.is_empty() {
            break;
        }
        generators.extend(added.iter().cloned());
        let mut start: FxHashSet<Element> = elements.iter().cloned().collect();
        start.reserve(elements.len());
        let grown = closure(g, start, &closure_gens(g, &generators), budget.elements)?;
        elements = GSet::from_reps(g, grown.into_iter().collect());
        pending = added;
    }
    let mut out = SubgroupHandle {
        elements,
        generators,
        normality: Normality::Unknown,
    };
    let ok = out.verify_normal(&conj);
    debug_assert!(ok);
    Ok(out)
}

/// `[⟨gens⟩, ⟨gens⟩]`, verified normal in `⟨gens⟩`.
pub fn derived_subgroup(gens: &GSet, budget: &Budget) -> Result<SubgroupHandle> {
    let g = gens.group();
    let base = span(gens, budget)?;
    let mut comms: Vec<Element> = Vec::new();
    for a in base.generators() {
        for b in base.generators() {
            let c = g.commutator(a, b);
            if !c.is_zero() {
                comms.push(c);
            }
        }
    }
    comms.sort();
    comms.dedup();
    let mut d = normal_closure_of(g, &comms, base.generators(), budget)?;
    if !d.verify_normal(base.generators()) {
        return Err(Error::verification("derived subgroup is not normal"));
    }
    Ok(d)
}

/// `γ_1 = H ⊇ γ_2 ⊇ …` down to the trivial term.
pub fn lower_central_series(h: &SubgroupHandle, budget: &Budget) -> Result<Vec<SubgroupHandle>> {
    let g = h.group();
    let cap = g.structural_step();
    let mut series = vec![h.clone()];
    loop {
        let last = series.last().expect("non-empty");
        if last.is_trivial() {
            return Ok(series);
        }
        if series.len() > cap {
            return Err(Error::NotNilpotent(cap));
        }
        let mut comms: Vec<Element> = Vec::new();
        for a in last.generators() {
            for b in h.generators() {
                let c = g.commutator(a, b);
                if !c.is_zero() {
                    comms.push(c);
                }
            }
        }
        comms.sort();
        comms.dedup();
        let next = normal_closure_of(g, &comms, h.generators(), budget)?;
        series.push(next);
    }
}

/// Nilpotency step: 0 for the trivial group, 1 for abelian groups.
pub fn step_of(h: &SubgroupHandle, budget: &Budget) -> Result<usize> {
    Ok(lower_central_series(h, budget)?.len() - 1)
}

/// Step of `⟨gens⟩` from left-normed commutators in the generators and their
/// inverses; works for infinite groups.
pub fn step_of_generated(g: &Group, gens: &[Element]) -> Result<usize> {
    let letters = closure_gens(g, gens);
    let mut layer: Vec<Element> = letters.clone();
    let mut step = 0;
    while !layer.is_empty() {
        step += 1;
        if step > g.structural_step() {
            return Err(Error::NotNilpotent(g.structural_step()));
        }
        let mut next: Vec<Element> = Vec::new();
        for c in &layer {
            for s in &letters {
                let d = g.commutator(c, s);
                if !d.is_zero() {
                    next.push(d);
                }
            }
        }
        next.sort();
        next.dedup();
        layer = next;
    }
    Ok(step)
}
