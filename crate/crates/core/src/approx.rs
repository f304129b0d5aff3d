//! Approximate-group certificates and the standard toolbox around them:
//! slicing covers, fibre pigeonholing, Plünnecke checks and Freiman
//! homomorphisms.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_rational::Ratio;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::group::{Element, Group, SubgroupHandle};
use crate::setcalc::{ratio_f64, GSet};

/// Witness that `A` is a `|X|`-approximate group: `A` symmetric, `1 ∈ A`
/// and `A² ⊆ XA`, all checked on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxCertificate {
    a: GSet,
    x: GSet,
    a2_size: usize,
}

impl ApproxCertificate {
    pub fn new(a: GSet, x: GSet, budget: &Budget) -> Result<Self> {
        a.group().ensure_same(x.group())?;
        check_approx_shape(&a)?;
        let a2 = a.product(&a, budget)?;
        let xa = x.product(&a, budget)?;
        if !a2.is_subset(&xa) {
            return Err(Error::verification(format!(
                "A² ⊄ XA: {} elements of A² uncovered",
                a2.missing_from(&xa).len()
            )));
        }
        Ok(ApproxCertificate {
            a,
            x,
            a2_size: a2.len(),
        })
    }

    pub fn a(&self) -> &GSet {
        &self.a
    }

    pub fn x(&self) -> &GSet {
        &self.x
    }

    pub fn group(&self) -> &Group {
        self.a.group()
    }

    pub fn k_upper(&self) -> usize {
        self.x.len()
    }

    /// `|A²|/|A|`, a lower bound on any valid `K`.
    pub fn k_lower(&self) -> Ratio<u64> {
        Ratio::new(self.a2_size as u64, self.a.len() as u64)
    }

    pub fn a2_size(&self) -> usize {
        self.a2_size
    }

    /// Drop cover elements (in canonical order) that are not needed.
    pub fn minimized(&self, budget: &Budget) -> Result<ApproxCertificate> {
        let a2 = self.a.product(&self.a, budget)?;
        let mut keep: Vec<Element> = self.x.members().to_vec();
        let mut i = 0;
        while i < keep.len() {
            let trial: Vec<Element> = keep
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, e)| e.clone())
                .collect();
            let xs = GSet::from_reps(self.group(), trial.clone());
            if a2.is_subset(&xs.product(&self.a, budget)?) {
                keep = trial;
            } else {
                i += 1;
            }
        }
        ApproxCertificate::new(self.a.clone(), GSet::from_reps(self.group(), keep), budget)
    }

    /// `|A^m| ≤ K_upper^{m−1}|A|` for `m = 1..=m_max`.
    pub fn growth_law(&self, m_max: usize, budget: &Budget) -> Result<GrowthLawReport> {
        let sizes: Vec<usize> = self.a.powers(m_max, budget)?.iter().map(GSet::len).collect();
        let k = self.k_upper() as u128;
        let n = self.a.len() as u128;
        let mut bounds = Vec::new();
        let mut pass = true;
        for (i, &s) in sizes.iter().enumerate() {
            let bound = k.checked_pow(i as u32).and_then(|p| p.checked_mul(n));
            if let Some(b) = bound {
                pass &= (s as u128) <= b;
            }
            bounds.push(bound.map(|b| b as f64).unwrap_or(f64::INFINITY));
        }
        Ok(GrowthLawReport {
            k_upper: self.k_upper(),
            sizes,
            bounds,
            pass,
        })
    }

    pub fn summary(&self) -> CertificateSummary {
        CertificateSummary {
            size: self.a.len(),
            a2_size: self.a2_size,
            k_upper: self.k_upper(),
            k_lower: ratio_f64(self.k_lower()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateSummary {
    pub size: usize,
    pub a2_size: usize,
    pub k_upper: usize,
    pub k_lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthLawReport {
    pub k_upper: usize,
    pub sizes: Vec<usize>,
    pub bounds: Vec<f64>,
    pub pass: bool,
}

fn check_approx_shape(a: &GSet) -> Result<()> {
    if !a.contains_identity() {
        return Err(Error::MissingIdentity);
    }
    if !a.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    Ok(())
}

/// Greedy set cover of `A²` by left translates `xA`, `x ∈ A²`, taking the
/// translate covering most uncovered points and breaking ties by canonical
/// order.
pub fn greedy_cover_certificate(a: &GSet, budget: &Budget) -> Result<ApproxCertificate> {
    check_approx_shape(a)?;
    let g = a.group();
    let a2 = a.product(a, budget)?;
    let n = a2.len();
    budget.check_pairs(n as u64 * a.len() as u64, "greedy cover")?;
    let index: FxHashMap<&Element, usize> = a2.iter().enumerate().map(|(i, x)| (x, i)).collect();
    // Left multiplication is injective, so hits never repeat.
    let hits = |x: &Element| -> Vec<usize> {
        a.iter().filter_map(|b| index.get(&g.mul(x, b)).copied()).collect()
    };
    // `fresh[i]` counts uncovered points of `x_i A`; covering `y` lowers it
    // for every `x ∈ yA⁻¹ = yA`.
    let mut fresh: Vec<usize> = a2.iter().map(|x| hits(x).len()).collect();
    let mut covered = vec![false; n];
    let mut remaining = n;
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> =
        fresh.iter().enumerate().map(|(i, &c)| (c, Reverse(i))).collect();
    let mut chosen: Vec<Element> = Vec::new();
    while remaining > 0 {
        let (stored, Reverse(i)) = heap.pop().expect("A² covers itself");
        if fresh[i] < stored {
            heap.push((fresh[i], Reverse(i)));
            continue;
        }
        let x = &a2.members()[i];
        for j in hits(x) {
            if covered[j] {
                continue;
            }
            covered[j] = true;
            remaining -= 1;
            let y = &a2.members()[j];
            for b in a.iter() {
                if let Some(&k) = index.get(&g.mul(y, b)) {
                    fresh[k] -= 1;
                }
            }
        }
        chosen.push(x.clone());
    }
    ApproxCertificate::new(a.clone(), GSet::from_reps(g, chosen), budget)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlicingCover {
    pub m: usize,
    pub n: usize,
    /// Translating elements `c` with `A^m ∩ B^n ⊆ ⋃ c(A² ∩ B²)`.
    #[serde(skip)]
    pub translates: Vec<Element>,
    pub count: usize,
    pub bound: f64,
    pub slice_size: usize,
    pub core_size: usize,
    pub verified: bool,
    /// Greedy `K` for the slice itself, beside the `K^{2m−1}L^{2n−1}` shape.
    pub slice_k_upper: Option<usize>,
    pub slice_k_shape: f64,
}

/// Cover `A^m ∩ B^n` by translates of `A² ∩ B²` following the classical
/// argument: `A^m ⊆ X^{m−1}A`, `B^n ⊆ Y^{n−1}B`, and one witness per
/// non-empty slice `xA ∩ yB`.
pub fn slicing_cover(
    a: &ApproxCertificate,
    b: &ApproxCertificate,
    m: usize,
    n: usize,
    budget: &Budget,
) -> Result<SlicingCover> {
    a.group().ensure_same(b.group())?;
    if m < 2 || n < 2 {
        return Err(Error::precondition("slicing needs m, n >= 2"));
    }
    let g = a.group();
    let am = a.a().power(m, budget)?;
    let bn = b.a().power(n, budget)?;
    let slice = am.intersection(&bn)?;
    let core = a
        .a()
        .product(a.a(), budget)?
        .intersection(&b.a().product(b.a(), budget)?)?;
    let xs = a.x().power(m - 1, budget)?;
    let ys = b.x().power(n - 1, budget)?;
    let mut translates: Vec<Element> = Vec::new();
    for x in xs.iter() {
        let xa = a.a().translate_left(x);
        for y in ys.iter() {
            let yb = b.a().translate_left(y);
            let witness = xa.iter().find(|e| yb.contains(e) && slice.contains(e));
            if let Some(c) = witness {
                translates.push(c.clone());
            }
        }
    }
    translates.sort();
    translates.dedup();
    let mut union: FxHashSet<Element> = FxHashSet::default();
    for c in &translates {
        for h in core.iter() {
            union.insert(g.mul(c, h));
        }
    }
    let verified = slice.iter().all(|e| union.contains(e));
    let bound = (a.k_upper() as f64).powi(m as i32 - 1) * (b.k_upper() as f64).powi(n as i32 - 1);
    if !verified {
        return Err(Error::verification("slicing translates do not cover A^m ∩ B^n"));
    }
    if translates.len() as f64 > bound {
        return Err(Error::verification(format!(
            "slicing used {} translates, bound {bound}",
            translates.len()
        )));
    }
    let slice_k_upper = greedy_cover_certificate(&slice, budget)
        .ok()
        .map(|c| c.k_upper());
    Ok(SlicingCover {
        m,
        n,
        count: translates.len(),
        translates,
        bound,
        slice_size: slice.len(),
        core_size: core.len(),
        verified,
        slice_k_upper,
        slice_k_shape: (a.k_upper() as f64).powi(2 * m as i32 - 1)
            * (b.k_upper() as f64).powi(2 * n as i32 - 1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FibreCover {
    /// One element of `A` per occupied left coset of `H`.
    #[serde(skip)]
    pub reps: Vec<Element>,
    pub count: usize,
    pub core_size: usize,
    pub verified: bool,
}

/// Cover `A` by left translates of `A⁻¹A ∩ H`, one per left coset of `H`
/// that meets `A`.
pub fn fibre_cover(a: &GSet, h: &SubgroupHandle, k: usize, budget: &Budget) -> Result<FibreCover> {
    a.group().ensure_same(h.group())?;
    let g = a.group();
    let coset_key = |e: &Element| -> Element {
        h.elements()
            .iter()
            .map(|x| g.mul(e, x))
            .min()
            .expect("subgroup is non-empty")
    };
    let mut seen: FxHashSet<Element> = FxHashSet::default();
    let mut reps = Vec::new();
    for e in a.iter() {
        if seen.insert(coset_key(e)) {
            reps.push(e.clone());
        }
    }
    if reps.len() > k {
        return Err(Error::precondition(format!(
            "A meets {} left cosets, more than k = {k}",
            reps.len()
        )));
    }
    let core = a.inverse_set().product(a, budget)?.intersection(h.elements())?;
    let mut union: FxHashSet<Element> = FxHashSet::default();
    for r in &reps {
        for c in core.iter() {
            union.insert(g.mul(r, c));
        }
    }
    let verified = a.iter().all(|e| union.contains(e));
    if !verified {
        return Err(Error::verification("fibre translates do not cover A"));
    }
    Ok(FibreCover {
        count: reps.len(),
        reps,
        core_size: core.len(),
        verified,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlunneckeReport {
    pub m: usize,
    pub n: usize,
    pub size: usize,
    pub doubling: f64,
    pub lhs: usize,
    pub bound: f64,
    pub pass: bool,
}

/// `mA − nA` in an abelian group.
pub fn sum_difference(a: &GSet, m: usize, n: usize, budget: &Budget) -> Result<GSet> {
    let neg = a.inverse_set();
    let acc = GSet::identity(a.group());
    let acc = repeated_product(acc, a, m, budget)?;
    repeated_product(acc, &neg, n, budget)
}

/// `S·B^n`, multiplying only the newly reached layer when `1 ∈ B`.
fn repeated_product(start: GSet, b: &GSet, n: usize, budget: &Budget) -> Result<GSet> {
    if n == 0 {
        return Ok(start);
    }
    let mut acc = start.product(b, budget)?;
    if !b.contains_identity() {
        for _ in 1..n {
            acc = acc.product(b, budget)?;
        }
        return Ok(acc);
    }
    let mut frontier = acc.difference(&start)?;
    for _ in 1..n {
        let next = acc.union(&frontier.product(b, budget)?)?;
        budget.check_size(next.len(), "sum set")?;
        frontier = next.difference(&acc)?;
        acc = next;
    }
    Ok(acc)
}

/// `|mA − nA| ≤ K^{m+n}|A|` with `K = |A+A|/|A|`.
pub fn plunnecke_check(a: &GSet, m: usize, n: usize, budget: &Budget) -> Result<PlunneckeReport> {
    if !a.group().is_abelian() {
        return Err(Error::NotAbelian(a.group().to_string()));
    }
    if a.is_empty() {
        return Err(Error::precondition("Plünnecke needs a non-empty set"));
    }
    let a2 = a.product(a, budget)?.len() as u128;
    let size = a.len() as u128;
    let lhs = sum_difference(a, m, n, budget)?.len();
    let e = (m + n) as u32;
    // lhs·|A|^{m+n} ≤ |2A|^{m+n}·|A|, in exact arithmetic when it fits.
    let exact = size
        .checked_pow(e)
        .and_then(|d| d.checked_mul(lhs as u128))
        .zip(a2.checked_pow(e).and_then(|p| p.checked_mul(size)));
    let doubling = a2 as f64 / size as f64;
    let bound = doubling.powi(e as i32) * size as f64;
    let pass = match exact {
        Some((l, r)) => l <= r,
        None => lhs as f64 <= bound,
    };
    Ok(PlunneckeReport {
        m,
        n,
        size: a.len(),
        doubling,
        lhs,
        bound,
        pass,
    })
}

/// A map `φ: A → G` given by its table, with the homomorphism order `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreimanMap {
    domain: GSet,
    target: Group,
    table: Vec<Element>,
    k: usize,
}

impl FreimanMap {
    pub fn new(
        domain: GSet,
        target: &Group,
        k: usize,
        f: impl Fn(&Element) -> Element,
    ) -> Result<Self> {
        let mut table = Vec::with_capacity(domain.len());
        for a in domain.iter() {
            let img = f(a);
            target.descriptor().validate(&img)?;
            table.push(target.canonical(&img));
        }
        Ok(FreimanMap {
            domain,
            target: target.clone(),
            table,
            k,
        })
    }

    pub fn domain(&self) -> &GSet {
        &self.domain
    }

    pub fn target(&self) -> &Group {
        &self.target
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn apply(&self, a: &Element) -> Option<&Element> {
        self.domain.index_of(a).map(|i| &self.table[i])
    }

    pub fn is_centred(&self) -> bool {
        let id = self.domain.group().identity();
        self.apply(&id).is_some_and(|e| e.is_zero())
    }

    pub fn image(&self) -> GSet {
        GSet::from_reps(&self.target, self.table.clone())
    }
}

/// Whether `f` is a Freiman `k`-homomorphism, by fingerprinting products of
/// `k`-tuples: each product in the domain must determine the product of the
/// images. Tuples agreeing on (product, image product) are merged level by
/// level, which is exact.
pub fn is_freiman_hom(f: &FreimanMap, budget: &Budget) -> Result<bool> {
    if f.k == 0 {
        return Ok(true);
    }
    let src = f.domain.group();
    let dst = &f.target;
    let pairs: Vec<(&Element, &Element)> = f.domain.iter().zip(f.table.iter()).collect();
    let mut level: FxHashSet<(Element, Element)> =
        pairs.iter().map(|&(a, b)| (a.clone(), b.clone())).collect();
    for _ in 1..f.k {
        budget.check_pairs(level.len() as u64 * pairs.len() as u64, "Freiman fingerprint")?;
        let mut next: FxHashSet<(Element, Element)> = FxHashSet::default();
        for (p, q) in &level {
            for &(a, b) in &pairs {
                next.insert((src.mul(p, a), dst.mul(q, b)));
            }
        }
        budget.check_size(next.len(), "Freiman fingerprint")?;
        level = next;
    }
    let mut seen: FxHashMap<&Element, &Element> = FxHashMap::default();
    for (p, q) in &level {
        if let Some(prev) = seen.insert(p, q) {
            if prev != q {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Certificate for `φ(A)` built from a minimal cover `X ⊆ A³` of the source:
/// `Y = {φ(α₁(x))φ(α₂(x))φ(α₃(x))}` for a decomposition `x = α₁α₂α₃`.
pub fn freiman_image_certificate(
    f: &FreimanMap,
    cert: &ApproxCertificate,
    budget: &Budget,
) -> Result<ApproxCertificate> {
    if f.domain != *cert.a() {
        return Err(Error::precondition("map domain differs from certified set"));
    }
    if !f.is_centred() {
        return Err(Error::precondition("map is not centred"));
    }
    let f3 = FreimanMap { k: 3, ..f.clone() };
    if !is_freiman_hom(&f3, budget)? {
        return Err(Error::precondition("map is not a Freiman 3-homomorphism"));
    }
    let src = f.domain.group();
    let dst = &f.target;
    for a in f.domain.iter() {
        let lhs = f.apply(&src.inv(a)).expect("A is symmetric");
        let rhs = dst.inv(f.apply(a).expect("a in domain"));
        if *lhs != rhs {
            return Err(Error::verification(format!("φ(a⁻¹) ≠ φ(a)⁻¹ at {a:?}")));
        }
    }
    let minimal = cert.minimized(budget)?;
    let mut y: Vec<Element> = Vec::new();
    for x in minimal.x().iter() {
        let triple = decompose_triple(cert.a(), x).ok_or_else(|| {
            Error::precondition(format!("cover element {x:?} is not a product of three elements of A"))
        })?;
        let imgs: Vec<&Element> = triple.iter().map(|t| f.apply(t).expect("in A")).collect();
        y.push(dst.mul(&dst.mul(imgs[0], imgs[1]), imgs[2]));
    }
    ApproxCertificate::new(f.image(), GSet::from_reps(dst, y), budget)
}

fn decompose_triple(a: &GSet, x: &Element) -> Option<[Element; 3]> {
    let g = a.group();
    for a1 in a.iter() {
        for a2 in a.iter() {
            let a3 = g.mul(&g.inv(&g.mul(a1, a2)), x);
            if a.contains(&a3) {
                return Some([a1.clone(), a2.clone(), a3]);
            }
        }
    }
    None
}
