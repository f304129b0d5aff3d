//! Ordered progressions, nilprogressions and nilpotent progressions built on
//! a Hall basis, with the containment-exponent check between them.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::group::{step_of_generated, Element, Group};
use crate::setcalc::GSet;

/// Largest step for which Hall bases are generated.
pub const MAX_HALL_STEP: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProgressionKind {
    Ordered,
    Nil,
    Nilpotent,
}

impl fmt::Display for ProgressionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProgressionKind::Ordered => "ordered",
            ProgressionKind::Nil => "nil",
            ProgressionKind::Nilpotent => "nilpotent",
        })
    }
}

impl FromStr for ProgressionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ordered" | "ord" => Ok(ProgressionKind::Ordered),
            "nil" => Ok(ProgressionKind::Nil),
            "nilpotent" | "bar" => Ok(ProgressionKind::Nilpotent),
            other => Err(Error::Parse(format!("unknown progression kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgressionSpec {
    group: Group,
    pub kind: ProgressionKind,
    pub generators: Vec<Element>,
    pub bounds: Vec<u64>,
    /// Step used for the Hall basis and the exponent bound.
    pub step: usize,
}

impl ProgressionSpec {
    pub fn new(
        group: &Group,
        kind: ProgressionKind,
        generators: Vec<Element>,
        bounds: Vec<u64>,
        step: usize,
    ) -> Result<Self> {
        if generators.len() != bounds.len() {
            return Err(Error::precondition(format!(
                "{} generators but {} bounds",
                generators.len(),
                bounds.len()
            )));
        }
        for x in &generators {
            group.validate(x)?;
        }
        Ok(ProgressionSpec {
            group: group.clone(),
            kind,
            generators,
            bounds,
            step: step.max(1),
        })
    }

    /// Same generators and bounds, step taken from the generated group.
    pub fn with_measured_step(
        group: &Group,
        kind: ProgressionKind,
        generators: Vec<Element>,
        bounds: Vec<u64>,
    ) -> Result<Self> {
        let s = step_of_generated(group, &generators)?;
        ProgressionSpec::new(group, kind, generators, bounds, s)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn with_kind(&self, kind: ProgressionKind) -> Self {
        ProgressionSpec {
            kind,
            ..self.clone()
        }
    }

    /// Bounds scaled by `factor`.
    pub fn dilate(&self, factor: u64) -> Self {
        ProgressionSpec {
            bounds: self.bounds.iter().map(|l| l * factor).collect(),
            ..self.clone()
        }
    }

    /// `prog <kind> r=<r> s=<s> L=<l1,...>` preceded by the group header and
    /// followed by one generator per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("group {}\n", self.group.descriptor());
        let ls: Vec<String> = self.bounds.iter().map(u64::to_string).collect();
        out.push_str(&format!(
            "prog {} r={} s={} L={}\n",
            self.kind,
            self.rank(),
            self.step,
            ls.join(",")
        ));
        for x in &self.generators {
            out.push_str(&format!("{x}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty progression".into()))?;
        let spec = header
            .strip_prefix("group ")
            .ok_or_else(|| Error::Parse("expected `group <spec>` header".into()))?;
        let group = Group::parse(spec.trim())?;
        let prog = lines.next().ok_or_else(|| Error::Parse("missing `prog` line".into()))?;
        let mut words = prog.split_whitespace();
        if words.next() != Some("prog") {
            return Err(Error::Parse(format!("expected `prog ...`, got `{prog}`")));
        }
        let kind: ProgressionKind = words
            .next()
            .ok_or_else(|| Error::Parse("missing progression kind".into()))?
            .parse()?;
        let (mut r, mut s, mut bounds) = (None, None, None);
        for w in words {
            let (key, val) = w
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad field `{w}`")))?;
            let num = |v: &str| v.parse::<u64>().map_err(|e| Error::Parse(format!("`{v}`: {e}")));
            match key {
                "r" => r = Some(num(val)? as usize),
                "s" => s = Some(num(val)? as usize),
                "L" => {
                    bounds = Some(if val.is_empty() {
                        Vec::new()
                    } else {
                        val.split(',').map(num).collect::<Result<Vec<u64>>>()?
                    })
                }
                _ => return Err(Error::Parse(format!("unknown field `{key}`"))),
            }
        }
        let bounds = bounds.ok_or_else(|| Error::Parse("missing L=".into()))?;
        let mut gens = Vec::new();
        for line in lines {
            let coords = line
                .split(',')
                .map(|t| t.trim().parse::<i64>().map_err(|e| Error::Parse(format!("`{t}`: {e}"))))
                .collect::<Result<Vec<i64>>>()?;
            gens.push(group.element(&coords)?);
        }
        if let Some(r) = r {
            if r != gens.len() || r != bounds.len() {
                return Err(Error::Parse(format!(
                    "r={r} but {} generators and {} bounds",
                    gens.len(),
                    bounds.len()
                )));
            }
        }
        let s = s.unwrap_or(group.structural_step());
        ProgressionSpec::new(&group, kind, gens, bounds, s)
    }
}

/// `{x_1^{ℓ_1}⋯x_r^{ℓ_r} : |ℓ_i| ≤ L_i}`.
pub fn enumerate_ordered(spec: &ProgressionSpec, budget: &Budget) -> Result<GSet> {
    ordered_product(&spec.group, &spec.generators, &spec.bounds, budget)
}

fn ordered_product(g: &Group, gens: &[Element], bounds: &[u64], budget: &Budget) -> Result<GSet> {
    let mut work: u64 = 1;
    for l in bounds {
        work = work.saturating_mul(2 * l + 1);
    }
    budget.check_pairs(work, "ordered progression")?;
    let mut acc = GSet::identity(g);
    for (x, &l) in gens.iter().zip(bounds) {
        let l = l as i64;
        let powers = GSet::from_reps(g, (-l..=l).map(|e| g.pow(x, e)).collect());
        acc = acc.product(&powers, budget)?;
    }
    Ok(acc)
}

/// Words in the `x_i^{±1}` using `x_i` and its inverse at most `L_i` times
/// between them, by breadth-first search over (element, remaining uses).
pub fn enumerate_nilprogression(spec: &ProgressionSpec, budget: &Budget) -> Result<GSet> {
    let g = &spec.group;
    type State = (Element, SmallVec<[u64; 8]>);
    let steps: Vec<[Element; 2]> = spec
        .generators
        .iter()
        .map(|x| [x.clone(), g.inv(x)])
        .collect();
    let start: State = (g.identity(), spec.bounds.iter().copied().collect());
    let mut seen: FxHashSet<State> = FxHashSet::default();
    let mut out: FxHashSet<Element> = FxHashSet::default();
    let mut queue: VecDeque<State> = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some((e, rem)) = queue.pop_front() {
        out.insert(e.clone());
        for (i, pair) in steps.iter().enumerate() {
            if rem[i] == 0 {
                continue;
            }
            for s in pair {
                let mut r = rem.clone();
                r[i] -= 1;
                let next = (g.mul(&e, s), r);
                if !seen.contains(&next) {
                    seen.insert(next.clone());
                    budget.check_size(seen.len(), "nilprogression search")?;
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(GSet::from_reps(g, out.into_iter().collect()))
}

/// A formal bracket over generators `0..r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Bracket {
    Gen(usize),
    Comm(Box<Bracket>, Box<Bracket>),
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bracket::Gen(i) => write!(f, "x{}", i + 1),
            Bracket::Comm(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HallEntry {
    pub bracket: Bracket,
    /// Multiplicity of each generator in the bracket.
    pub weights: Vec<u32>,
    pub value: Element,
}

impl HallEntry {
    pub fn weight(&self) -> u32 {
        self.weights.iter().sum()
    }
}

/// Basic commutators up to weight `s`, in Hall order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HallBasis {
    pub rank: usize,
    pub step: usize,
    pub entries: Vec<HallEntry>,
}

/// Hall set: generators first; `[u, v]` is basic when `u, v` are basic,
/// `u > v`, and `v ≥ w` whenever `u = [w', w]`. Entries are ordered by
/// weight, then by order of construction.
pub fn hall_basis(group: &Group, gens: &[Element], s: usize) -> Result<HallBasis> {
    if s > MAX_HALL_STEP {
        return Err(Error::Unsupported(format!(
            "Hall bases are generated up to step {MAX_HALL_STEP}, got {s}"
        )));
    }
    let r = gens.len();
    let mut entries: Vec<HallEntry> = gens
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let mut w = vec![0; r];
            w[i] = 1;
            HallEntry {
                bracket: Bracket::Gen(i),
                weights: w,
                value: x.clone(),
            }
        })
        .collect();
    // right child index of each entry, for the Hall condition
    let mut right: Vec<Option<usize>> = vec![None; r];
    for weight in 2..=s as u32 {
        let n = entries.len();
        let mut fresh = Vec::new();
        let mut fresh_right = Vec::new();
        for u in 0..n {
            for v in 0..u {
                if entries[u].weight() + entries[v].weight() != weight {
                    continue;
                }
                if let Some(w) = right[u] {
                    if v < w {
                        continue;
                    }
                }
                let weights: Vec<u32> = entries[u]
                    .weights
                    .iter()
                    .zip(&entries[v].weights)
                    .map(|(a, b)| a + b)
                    .collect();
                fresh.push(HallEntry {
                    bracket: Bracket::Comm(
                        Box::new(entries[u].bracket.clone()),
                        Box::new(entries[v].bracket.clone()),
                    ),
                    weights,
                    value: group.commutator(&entries[u].value, &entries[v].value),
                });
                fresh_right.push(Some(v));
            }
        }
        entries.extend(fresh);
        right.extend(fresh_right);
    }
    Ok(HallBasis {
        rank: r,
        step: s,
        entries,
    })
}

/// Exponent bound `∏ L_i^{χ(i)}` for a basis entry.
fn entry_bound(entry: &HallEntry, bounds: &[u64]) -> u64 {
    entry
        .weights
        .iter()
        .zip(bounds)
        .fold(1u64, |acc, (&w, &l)| acc.saturating_mul(l.saturating_pow(w)))
}

/// `{u_1^{m_1}⋯u_k^{m_k}}` over the basis in Hall order with
/// `|m_j| ≤ ∏ L_i^{χ_j(i)}`.
pub fn enumerate_nilpotent_progression(
    spec: &ProgressionSpec,
    basis: &HallBasis,
    budget: &Budget,
) -> Result<GSet> {
    if basis.rank != spec.rank() {
        return Err(Error::precondition("Hall basis rank differs from progression rank"));
    }
    let gens: Vec<Element> = basis.entries.iter().map(|e| e.value.clone()).collect();
    let bounds: Vec<u64> = basis
        .entries
        .iter()
        .map(|e| entry_bound(e, &spec.bounds))
        .collect();
    ordered_product(&spec.group, &gens, &bounds, budget)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentReport {
    pub rank: usize,
    pub step: usize,
    pub bounds: Vec<u64>,
    pub size_ord: usize,
    pub size_nil: usize,
    pub size_bar: usize,
    pub ord_in_nil: bool,
    pub nil_in_bar: bool,
    /// Least `k` with `P̄ ⊆ P_ord^k`, if reached.
    pub k_star: Option<usize>,
    /// Largest `k` checked without containment, when `k_star` is unknown.
    pub k_lower: usize,
    pub exponent_bound: f64,
    pub pass: bool,
}

/// `(96s)^{s²} r^s`.
pub fn exponent_bound(s: usize, r: usize) -> f64 {
    (96.0 * s as f64).powi((s * s) as i32) * (r as f64).powi(s as i32)
}

pub fn containment_exponent(
    spec: &ProgressionSpec,
    basis: &HallBasis,
    budget: &Budget,
) -> Result<ContainmentReport> {
    let actual = step_of_generated(&spec.group, &spec.generators)?;
    if actual > spec.step || basis.step < spec.step {
        return Err(Error::precondition(format!(
            "generators have step {actual}, progression step {}, basis step {}",
            spec.step, basis.step
        )));
    }
    let ord = enumerate_ordered(spec, budget)?;
    let nil = enumerate_nilprogression(spec, budget)?;
    let bar = enumerate_nilpotent_progression(spec, basis, budget)?;
    let ord_in_nil = ord.is_subset(&nil);
    let nil_in_bar = nil.is_subset(&bar);
    let bound = exponent_bound(spec.step, spec.rank().max(1));
    let mut k_star = None;
    let mut k_lower = 0;
    let mut power = ord.clone();
    let mut frontier = ord.clone();
    let mut k = 1usize;
    loop {
        if bar.is_subset(&power) {
            k_star = Some(k);
            break;
        }
        k_lower = k;
        if (k + 1) as f64 > bound || frontier.is_empty() {
            break;
        }
        // P_ord contains the identity, so only the newest layer needs multiplying.
        let grown = match frontier.product(&ord, budget) {
            Ok(s) => s,
            Err(Error::BudgetExceeded { .. }) => break,
            Err(e) => return Err(e),
        };
        let next = power.union(&grown)?;
        frontier = next.difference(&power)?;
        power = next;
        k += 1;
    }
    let pass = ord_in_nil && nil_in_bar && k_star.is_some_and(|k| k as f64 <= bound);
    Ok(ContainmentReport {
        rank: spec.rank(),
        step: spec.step,
        bounds: spec.bounds.clone(),
        size_ord: ord.len(),
        size_nil: nil.len(),
        size_bar: bar.len(),
        ord_in_nil,
        nil_in_bar,
        k_star,
        k_lower,
        exponent_bound: bound,
        pass,
    })
}
