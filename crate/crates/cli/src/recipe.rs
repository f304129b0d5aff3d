//! Named set generators: `<kind> <group> key=value ...`.
//!
//! | kind | parameters |
//! |------|------------|
//! | `ball` | `radius` (default 1), `gens` (default: standard generators) |
//! | `interval` | `L`, or `lo` and `hi` (arity-one groups) |
//! | `progression` | `L`, `gens` (default: standard generators), `kind` |
//! | `coset-union` | `gens` (subgroup generators), `offsets` |
//! | `random-symmetric` | `size`, `seed` (default 0), `range` (default 10) |
//! | `whole` | none |
//!
//! Element lists separate elements with `;` and coordinates with `,`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use growthlab_core::group::span;
use growthlab_core::progressions::{enumerate_nilprogression, enumerate_ordered, ProgressionKind, ProgressionSpec};
use growthlab_core::{Budget, Element, GSet, Group};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecipeKind {
    Ball,
    Interval,
    Progression,
    CosetUnion,
    RandomSymmetric,
    Whole,
}

impl RecipeKind {
    fn name(self) -> &'static str {
        match self {
            RecipeKind::Ball => "ball",
            RecipeKind::Interval => "interval",
            RecipeKind::Progression => "progression",
            RecipeKind::CosetUnion => "coset-union",
            RecipeKind::RandomSymmetric => "random-symmetric",
            RecipeKind::Whole => "whole",
        }
    }

    fn known(self) -> &'static [&'static str] {
        match self {
            RecipeKind::Ball => &["radius", "gens"],
            RecipeKind::Interval => &["L", "lo", "hi"],
            RecipeKind::Progression => &["L", "gens", "kind"],
            RecipeKind::CosetUnion => &["gens", "offsets"],
            RecipeKind::RandomSymmetric => &["size", "seed", "range"],
            RecipeKind::Whole => &[],
        }
    }
}

impl FromStr for RecipeKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "ball" => RecipeKind::Ball,
            "interval" => RecipeKind::Interval,
            "progression" => RecipeKind::Progression,
            "coset-union" => RecipeKind::CosetUnion,
            "random-symmetric" => RecipeKind::RandomSymmetric,
            "whole" => RecipeKind::Whole,
            other => return Err(CliError::Recipe(format!("unknown recipe `{other}`"))),
        })
    }
}

/// A parsed generator description; its text form round-trips.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Recipe {
    pub kind: RecipeKind,
    pub group: String,
    pub params: BTreeMap<String, String>,
}

impl FromStr for Recipe {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let mut words = text.split_whitespace();
        let kind: RecipeKind = words
            .next()
            .ok_or_else(|| CliError::Recipe("empty recipe".into()))?
            .parse()?;
        let group = words
            .next()
            .ok_or_else(|| CliError::Recipe(format!("`{}` needs a group", kind.name())))?
            .to_string();
        Group::parse(&group)?;
        let mut params = BTreeMap::new();
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| CliError::Recipe(format!("expected key=value, got `{w}`")))?;
            if !kind.known().contains(&k) {
                return Err(CliError::Recipe(format!("`{}` takes no parameter `{k}`", kind.name())));
            }
            if params.insert(k.to_string(), v.to_string()).is_some() {
                return Err(CliError::Recipe(format!("parameter `{k}` given twice")));
            }
        }
        Ok(Recipe { kind, group, params })
    }
}

impl TryFrom<String> for Recipe {
    type Error = CliError;

    fn try_from(s: String) -> Result<Self, CliError> {
        s.parse()
    }
}

impl From<Recipe> for String {
    fn from(r: Recipe) -> String {
        r.to_string()
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind.name(), self.group)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

impl Recipe {
    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.params
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Recipe(format!("bad value `{v}` for `{key}`")))
            })
            .transpose()
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.get(key)?
            .ok_or_else(|| CliError::Recipe(format!("`{}` needs `{key}`", self.kind.name())))
    }

    /// Fill in `seed` when the recipe has none.
    pub fn with_default_seed(mut self, seed: u64) -> Self {
        if self.kind == RecipeKind::RandomSymmetric {
            self.params.entry("seed".into()).or_insert_with(|| seed.to_string());
        }
        self
    }

    pub fn group(&self) -> Result<Group, CliError> {
        Ok(Group::parse(&self.group)?)
    }

    pub fn generate(&self, budget: &Budget) -> Result<GSet, CliError> {
        let g = self.group()?;
        match self.kind {
            RecipeKind::Ball => {
                let radius: usize = self.get("radius")?.unwrap_or(1);
                let gens = self.elements_or_standard(&g, "gens")?;
                let mut e = vec![g.identity()];
                for x in gens {
                    e.push(g.inv(&x));
                    e.push(x);
                }
                let s = GSet::new(&g, e)?;
                if radius == 0 {
                    return Ok(GSet::identity(&g));
                }
                Ok(s.power(radius, budget)?)
            }
            RecipeKind::Interval => {
                if g.arity() != 1 {
                    return Err(CliError::Recipe("`interval` needs a group with one coordinate".into()));
                }
                let (lo, hi) = match self.get::<i64>("L")? {
                    Some(l) => (-l, l),
                    None => (self.require("lo")?, self.require("hi")?),
                };
                if lo > hi {
                    return Err(CliError::Recipe(format!("empty interval {lo}..{hi}")));
                }
                let elems = (lo..=hi).map(|i| g.element(&[i])).collect::<Result<Vec<_>, _>>()?;
                Ok(GSet::new(&g, elems)?)
            }
            RecipeKind::Progression => {
                let gens = self.elements_or_standard(&g, "gens")?;
                let bounds = parse_list::<u64>(&self.require::<String>("L")?)?;
                let kind: ProgressionKind = self.get::<String>("kind")?.as_deref().unwrap_or("ordered").parse()?;
                let spec = ProgressionSpec::with_measured_step(&g, kind, gens, bounds)?;
                Ok(match kind {
                    ProgressionKind::Nil => enumerate_nilprogression(&spec, budget)?,
                    _ => enumerate_ordered(&spec, budget)?,
                })
            }
            RecipeKind::CosetUnion => {
                let gens = parse_elements(&g, &self.require::<String>("gens")?)?;
                let offsets = parse_elements(&g, &self.require::<String>("offsets")?)?;
                let h = span(&GSet::new(&g, gens)?, budget)?;
                let mut all = Vec::new();
                for o in &offsets {
                    all.extend(h.elements().iter().map(|e| g.mul(o, e)));
                }
                Ok(GSet::new(&g, all)?)
            }
            RecipeKind::RandomSymmetric => {
                let size: usize = self.require("size")?;
                let seed: u64 = self.get("seed")?.unwrap_or(0);
                let range: i64 = self.get("range")?.unwrap_or(10);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                random_symmetric(&g, size, range, &mut rng)
            }
            RecipeKind::Whole => Ok(GSet::whole(&g, budget)?),
        }
    }

    fn elements_or_standard(&self, g: &Group, key: &str) -> Result<Vec<Element>, CliError> {
        match self.params.get(key) {
            Some(text) => parse_elements(g, text),
            None => Ok(g.standard_generators()),
        }
    }
}

pub fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Recipe(format!("bad list entry `{t}`")))
        })
        .collect()
}

/// `1,0,0;0,1,0` style element lists.
pub fn parse_elements(g: &Group, text: &str) -> Result<Vec<Element>, CliError> {
    text.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| Ok(g.element(&parse_list::<i64>(t)?)?))
        .collect()
}

/// Symmetric set of exactly `size` elements containing the identity, built
/// by sampling coordinates uniformly (in `[−range, range]` for unbounded
/// ones) and adding each new element with its inverse. Involutions are taken
/// singly while an odd number of elements is missing, otherwise in pairs.
pub fn random_symmetric(g: &Group, size: usize, range: i64, rng: &mut impl Rng) -> Result<GSet, CliError> {
    if size == 0 {
        return Err(CliError::Recipe("size must be at least 1".into()));
    }
    if let Some(order) = g.order() {
        if size as u128 > order {
            return Err(CliError::Recipe(format!("size {size} exceeds the group order {order}")));
        }
    }
    let moduli = g.descriptor().coordinate_moduli();
    let mut set: BTreeSet<Element> = BTreeSet::new();
    set.insert(g.identity());
    let mut pending: Option<Element> = None;
    let mut attempts = 0usize;
    while set.len() < size {
        attempts += 1;
        if attempts > 1000 * size + 1000 {
            return Err(CliError::Recipe(format!(
                "could not reach a symmetric set of size {size} in {}",
                g
            )));
        }
        let coords: Vec<i64> = moduli
            .iter()
            .map(|&m| if m == 0 { rng.gen_range(-range..=range) } else { rng.gen_range(0..m as i64) })
            .collect();
        let x = g.canonical(&Element::new(&coords));
        if set.contains(&x) {
            continue;
        }
        let xi = g.inv(&x);
        if x == xi {
            if (size - set.len()) % 2 == 1 {
                set.insert(x);
            } else if size - set.len() >= 2 {
                match pending.take() {
                    Some(y) if y != x => {
                        set.insert(y);
                        set.insert(x);
                    }
                    _ => pending = Some(x),
                }
            }
        } else if set.len() + 2 <= size {
            set.insert(x);
            set.insert(xi);
        }
    }
    Ok(GSet::new(g, set)?)
}
