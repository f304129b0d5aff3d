//! Step reduction for approximate groups in nilpotent groups: section maps,
//! pullbacks, the abelian factorisation, normal closures and the full
//! decomposition into a normal subgroup times progressions and sparse sets.

mod decompose;

use num_rational::Ratio;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::approx::{greedy_cover_certificate, ApproxCertificate};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::group::{
    derived_subgroup, lower_central_series, normal_closure, span, step_of, step_of_generated,
    Element, Group, Kernel, PcSubgroup, QuotientView, SubgroupHandle,
};
use crate::oracle::{find_coset_progression, OracleOptions, OracleReport, OracleResult};
use crate::setcalc::{ratio_f64, GSet};

pub use decompose::{
    corollary_covers, decompose, decompose_with, Corollary, CorollaryCover, CorollaryReport,
    Decomposition, DecompositionReport, Piece, StageLog,
};

/// Cap on `k` when searching for `target ⊆ A^k`.
const MAX_RADIUS: usize = 4096;

/// `φ: π(A) → A`, sending each image point to its least preimage in `A`.
#[derive(Debug, Clone)]
pub struct SectionMap {
    quotient: QuotientView,
    table: Vec<(Element, Element)>,
    /// Number of `a ∈ A` checked for `a ∈ (A² ∩ N)·φ(π(a))`.
    pub checks_inverse: usize,
    /// Number of pairs checked for `φ(xy) ∈ φ(x)φ(y)(A³ ∩ N)`.
    pub checks_product: usize,
}

impl SectionMap {
    pub fn quotient(&self) -> &QuotientView {
        &self.quotient
    }

    pub fn phi(&self, x: &Element) -> Option<&Element> {
        self.table
            .binary_search_by(|(k, _)| k.cmp(x))
            .ok()
            .map(|i| &self.table[i].1)
    }

    pub fn entries(&self) -> &[(Element, Element)] {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

/// Build `φ` and check both splitting properties exhaustively.
pub fn build_section(q: &QuotientView, a: &GSet, budget: &Budget) -> Result<SectionMap> {
    q.parent().ensure_same(a.group())?;
    if a.is_empty() {
        return Err(Error::precondition("section of an empty set"));
    }
    if !a.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let g = a.group();
    let mut first: FxHashMap<Element, Element> = FxHashMap::default();
    for e in a.iter() {
        first.entry(q.rep(e)).or_insert_with(|| e.clone());
    }
    let mut table: Vec<(Element, Element)> = first.into_iter().collect();
    table.sort();
    let section = SectionMap {
        quotient: q.clone(),
        table,
        checks_inverse: 0,
        checks_product: 0,
    };
    let a2 = a.product(a, budget)?;
    let a3 = a2.product(a, budget)?;
    for e in a.iter() {
        let phi = section.phi(&q.rep(e)).expect("image point");
        let n = g.mul(e, &g.inv(phi));
        if !a2.contains(&n) || !q.in_kernel(&n) {
            return Err(Error::verification(format!(
                "{e:?} ∉ (A² ∩ N)·φ(π({e:?}))"
            )));
        }
    }
    let keys: Vec<&Element> = section.table.iter().map(|(k, _)| k).collect();
    budget.check_pairs((keys.len() * keys.len()) as u64, "section products")?;
    let qg = q.quotient();
    let mut pairs = 0;
    for (x, px) in &section.table {
        for (y, py) in &section.table {
            let xy = qg.mul(x, y);
            let Some(pxy) = section.phi(&xy) else { continue };
            pairs += 1;
            let n = g.mul(&g.inv(py), &g.mul(&g.inv(px), pxy));
            if !a3.contains(&n) || !q.in_kernel(&n) {
                return Err(Error::verification(format!(
                    "φ({x:?}·{y:?}) ∉ φ(x)φ(y)(A³ ∩ N)"
                )));
            }
        }
    }
    Ok(SectionMap {
        checks_inverse: a.len(),
        checks_product: pairs,
        ..section
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PullbackReport {
    pub m: usize,
    pub c: f64,
    pub p_size: usize,
    pub image_size: usize,
    pub a_size: usize,
    /// `|π⁻¹(P) ∩ A^{m+2}|`.
    pub lhs: usize,
    /// `c|A|`.
    pub rhs: f64,
    pub pass: bool,
}

/// `|π⁻¹(P) ∩ A^{m+2}| ≥ c|A|` for `P ⊆ π(A^m)` with `|P| ≥ c|π(A)|`.
pub fn pullback_check(
    q: &QuotientView,
    a: &GSet,
    p: &GSet,
    m: usize,
    c: Ratio<u64>,
    budget: &Budget,
) -> Result<PullbackReport> {
    q.parent().ensure_same(a.group())?;
    q.quotient().ensure_same(p.group())?;
    if m == 0 {
        return Err(Error::precondition("m must be at least 1"));
    }
    if !a.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let powers = a.powers(m + 2, budget)?;
    if !p.is_subset(&q.project(&powers[m - 1])?) {
        return Err(Error::precondition(format!("P ⊄ π(A^{m})")));
    }
    let image = q.project(a)?;
    let (num, den) = (*c.numer() as u128, *c.denom() as u128);
    if (p.len() as u128) * den < num * image.len() as u128 {
        return Err(Error::precondition("|P| < c|π(A)|"));
    }
    let lhs = powers[m + 1].iter().filter(|e| p.contains(&q.rep(e))).count();
    let pass = (lhs as u128) * den >= num * a.len() as u128;
    if !pass {
        return Err(Error::verification(format!(
            "|π⁻¹(P) ∩ A^{}| = {lhs} < c|A|",
            m + 2
        )));
    }
    Ok(PullbackReport {
        m,
        c: ratio_f64(c),
        p_size: p.len(),
        image_size: image.len(),
        a_size: a.len(),
        lhs,
        rhs: ratio_f64(c) * a.len() as f64,
        pass,
    })
}

/// Step of `⟨A⟩`, by enumeration when finite and from a polycyclic
/// generating set otherwise.
pub(crate) fn generated_step(a: &GSet, budget: &Budget) -> Result<usize> {
    let g = a.group();
    if g.is_finite() {
        return step_of(&span(a, budget)?, budget);
    }
    if !g.is_quotient() && g.is_torsion_free() {
        let pc = PcSubgroup::generate(g.descriptor_arc().clone(), a.members(), &[])?;
        let basis: Vec<Element> = pc.basis().cloned().collect();
        return step_of_generated(g, &basis);
    }
    step_of_generated(g, a.members())
}

/// `π: ⟨A⟩ → ⟨A⟩/[⟨A⟩, ⟨A⟩]`, with the enumerated derived subgroup when the
/// group is finite.
fn abelianization(a: &GSet, budget: &Budget) -> Result<(QuotientView, Option<SubgroupHandle>)> {
    let g = a.group();
    let gens: Vec<Element> = a.iter().filter(|e| !e.is_zero()).cloned().collect();
    if g.is_finite() {
        let d = derived_subgroup(a, budget)?;
        let q = QuotientView::within(&d, &gens)?;
        return Ok((q, Some(d)));
    }
    if !g.is_quotient() && g.is_torsion_free() {
        let desc = g.descriptor_arc().clone();
        let base = PcSubgroup::generate(desc.clone(), &gens, &[])?;
        let basis: Vec<Element> = base.basis().cloned().collect();
        let mut comms = Vec::new();
        for x in &basis {
            for y in &basis {
                let c = g.commutator(x, y);
                if !c.is_zero() {
                    comms.push(c);
                }
            }
        }
        let pc = PcSubgroup::generate(desc, &comms, &basis)?;
        return Ok((QuotientView::lattice_within(g, pc, &basis)?, None));
    }
    Err(Error::Unsupported(format!("abelianisation inside {g}")))
}

/// Membership test for `π⁻¹(⟨x⟩)`.
enum CyclicPreimage {
    Finite(GSet),
    Lattice(PcSubgroup),
}

impl CyclicPreimage {
    fn new(q: &QuotientView, x: &Element, budget: &Budget) -> Result<Self> {
        let qg = q.quotient();
        if let Some(Kernel::Lattice(pc)) = qg.kernel() {
            let mut pc = pc.clone();
            pc.extend(std::slice::from_ref(x), &[])?;
            return Ok(CyclicPreimage::Lattice(pc));
        }
        let mut powers = vec![qg.identity()];
        let mut cur = x.clone();
        while !cur.is_zero() {
            if powers.len() >= budget.elements {
                return Err(Error::budget("cyclic subgroup", budget.elements as u64));
            }
            powers.push(cur.clone());
            cur = qg.mul(&cur, x);
        }
        Ok(CyclicPreimage::Finite(GSet::from_reps(qg, powers)))
    }

    fn contains(&self, q: &QuotientView, e: &Element) -> bool {
        match self {
            CyclicPreimage::Finite(s) => s.contains(&q.rep(e)),
            CyclicPreimage::Lattice(pc) => pc.contains(e),
        }
    }
}

/// Exponent vector of a word `x_1^{ℓ_1}⋯x_r^{ℓ_r}`.
pub type Word = Vec<i64>;

/// Every point of `H·P(x; L)` with one `(h, ℓ)` producing it.
pub(crate) fn coset_words(
    h: &SubgroupHandle,
    gens: &[Element],
    bounds: &[u64],
    budget: &Budget,
) -> Result<FxHashMap<Element, (Element, Word)>> {
    let g = h.group();
    let mut work = h.len() as u64;
    for l in bounds {
        work = work.saturating_mul(2 * l + 1);
    }
    budget.check_pairs(work, "coset progression words")?;
    let mut map: FxHashMap<Element, (Element, Word)> = FxHashMap::default();
    let mut ell: Word = bounds.iter().map(|&l| -(l as i64)).collect();
    loop {
        let p = word_value(g, gens, &ell);
        for x in h.elements().iter() {
            map.entry(g.mul(x, &p)).or_insert_with(|| (x.clone(), ell.clone()));
        }
        let mut i = 0;
        loop {
            if i == ell.len() {
                return Ok(map);
            }
            if ell[i] < bounds[i] as i64 {
                ell[i] += 1;
                break;
            }
            ell[i] = -(bounds[i] as i64);
            i += 1;
        }
    }
}

pub(crate) fn word_value(g: &Group, gens: &[Element], ell: &[i64]) -> Element {
    gens.iter()
        .zip(ell)
        .fold(g.identity(), |acc, (x, &l)| g.mul(&acc, &g.pow(x, l)))
}

/// `(A¹⁸ ∩ π⁻¹(H)) ∏ (A²⁴ ∩ π⁻¹(⟨x_i⟩))` built from a coset progression
/// `H + P(x; L) ⊆ π(A⁴)` found in the abelianisation.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub quotient: QuotientView,
    pub oracle: OracleResult,
    pub h_part: GSet,
    pub cyclic_parts: Vec<GSet>,
    /// Points of `π⁻¹(H + P) ∩ A⁶` split as `a_0 a_1 ⋯ a_r` with `a_0` in the
    /// first part and `a_i` in the `i`-th cyclic part.
    pub core: GSet,
    splittings: Vec<Vec<Element>>,
    /// Points of `π⁻¹(H + P) ∩ A⁶` whose splitting left the stated powers.
    pub core_misses: usize,
    pub pullback_size: usize,
    pub product_size: Option<usize>,
    pub a_size: usize,
    derived: Option<SubgroupHandle>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationReport {
    pub a_size: usize,
    pub oracle: OracleReport,
    pub h_part_size: usize,
    pub cyclic_part_sizes: Vec<usize>,
    pub pullback_size: usize,
    pub core_size: usize,
    pub core_misses: usize,
    pub product_size: Option<usize>,
    pub density: Option<f64>,
}

impl Factorization {
    pub fn generators(&self) -> &[Element] {
        &self.oracle.best.generators
    }

    /// `a_0, …, a_r` for a point of the core.
    pub fn splitting(&self, b: &Element) -> Option<&[Element]> {
        self.core.index_of(b).map(|i| self.splittings[i].as_slice())
    }

    /// Parts in product order: the `H` part, then the cyclic parts.
    pub fn parts(&self) -> Vec<&GSet> {
        std::iter::once(&self.h_part).chain(&self.cyclic_parts).collect()
    }

    /// `|product| / |A|`.
    pub fn density(&self) -> Option<Ratio<u64>> {
        self.product_size
            .map(|p| Ratio::new(p as u64, self.a_size as u64))
    }

    pub fn report(&self) -> FactorizationReport {
        FactorizationReport {
            a_size: self.a_size,
            oracle: self.oracle.report(),
            h_part_size: self.h_part.len(),
            cyclic_part_sizes: self.cyclic_parts.iter().map(GSet::len).collect(),
            pullback_size: self.pullback_size,
            core_size: self.core.len(),
            core_misses: self.core_misses,
            product_size: self.product_size,
            density: self.density().map(ratio_f64),
        }
    }
}

/// Factorisation of a `K`-approximate group in a group of step at least 2.
pub fn abelian_factorization(cert: &ApproxCertificate, budget: &Budget) -> Result<Factorization> {
    let s = generated_step(cert.a(), budget)?;
    if s < 2 {
        return Err(Error::StepTooLow(s));
    }
    factorize(cert.a(), &OracleOptions::default(), true, budget)
}

fn factorize(
    a: &GSet,
    opts: &OracleOptions,
    exact_product: bool,
    budget: &Budget,
) -> Result<Factorization> {
    let g = a.group();
    let (q, derived) = abelianization(a, budget)?;
    let oracle = find_coset_progression(&q.project(a)?, opts, budget)?;
    let best = &oracle.best;
    let powers = a.powers(24, budget)?;
    if !best.realized.is_subset(&q.project(&powers[3])?) {
        return Err(Error::verification("H + P ⊄ π(A⁴)"));
    }
    let h_part = powers[17].filter(|e| best.h.contains(&q.rep(e)));
    let tests: Vec<CyclicPreimage> = best
        .generators
        .iter()
        .map(|x| CyclicPreimage::new(&q, x, budget))
        .collect::<Result<_>>()?;
    let cyclic_parts: Vec<GSet> = tests
        .iter()
        .map(|t| powers[23].filter(|e| t.contains(&q, e)))
        .collect();

    let a6 = &powers[5];
    let section = build_section(&q, a6, budget)?;
    let words = coset_words(&best.h, &best.generators, &best.bounds, budget)?;
    let qg = q.quotient();
    let phi = |x: &Element| -> Result<Element> {
        section
            .phi(x)
            .cloned()
            .ok_or_else(|| Error::verification(format!("{x:?} ∉ π(A⁶)")))
    };
    let r = best.generators.len();
    let mut core = Vec::new();
    let mut splittings = Vec::new();
    let mut misses = 0;
    let mut pullback = 0;
    for b in a6.iter() {
        let pb = q.rep(b);
        let Some((h, ell)) = words.get(&pb) else { continue };
        pullback += 1;
        let n1 = g.mul(b, &g.inv(&phi(&pb)?));
        if !powers[11].contains(&n1) || !q.in_kernel(&n1) {
            return Err(Error::verification("splitting error outside A¹² ∩ [G,G]"));
        }
        let mut parts = vec![g.mul(&n1, &phi(h)?)];
        for (x, &l) in best.generators.iter().zip(ell) {
            parts.push(phi(&qg.pow(x, l))?);
        }
        let prefix = parts[1..].iter().fold(phi(h)?, |acc, p| g.mul(&acc, p));
        let n2 = g.mul(&g.inv(&prefix), &phi(&pb)?);
        if !q.in_kernel(&n2) {
            return Err(Error::verification("accumulated splitting error outside [G,G]"));
        }
        let last = parts.last_mut().expect("non-empty");
        *last = g.mul(last, &n2);
        let product = parts.iter().fold(g.identity(), |acc, p| g.mul(&acc, p));
        if product != *b {
            return Err(Error::verification(format!("splitting of {b:?} does not multiply back")));
        }
        let fits = h_part.contains(&parts[0])
            && (0..r).all(|i| cyclic_parts[i].contains(&parts[i + 1]));
        if fits {
            core.push(b.clone());
            splittings.push(parts);
        } else {
            misses += 1;
        }
    }
    let product_size = if exact_product {
        let mut acc = h_part.clone();
        for p in &cyclic_parts {
            acc = acc.product(p, budget)?;
        }
        Some(acc.len())
    } else {
        None
    };
    Ok(Factorization {
        core: GSet::from_reps(g, core),
        splittings,
        core_misses: misses,
        pullback_size: pullback,
        product_size,
        a_size: a.len(),
        h_part,
        cyclic_parts,
        oracle,
        quotient: q,
        derived,
    })
}

/// Normal subgroup `N`, factors `A_0, …, A_r` and the steps of `⟨ρ(A_i)⟩`
/// in `G/N`.
#[derive(Debug, Clone)]
pub struct StepReduction {
    pub input_step: usize,
    pub n: SubgroupHandle,
    /// Least `k` with `N ⊆ A^k` for the ambient `A`.
    pub n_radius: Option<usize>,
    /// `ρ: G → G/N`.
    pub quotient: QuotientView,
    pub factors: Vec<ApproxCertificate>,
    /// Step of `⟨ρ(A_i)⟩`.
    pub factor_steps: Vec<usize>,
    /// Number of factors.
    pub r: usize,
    pub step_drop_verified: bool,
    /// Points of `A_0 ⋯ A_r` with a verified splitting, a lower bound on
    /// `|A_0 ⋯ A_r|`.
    pub product_lower_bound: usize,
    pub atilde_size: usize,
    pub factorization: Option<Factorization>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReductionReport {
    pub input_step: usize,
    pub n_size: usize,
    pub n_radius: Option<usize>,
    pub r: usize,
    pub factor_sizes: Vec<usize>,
    pub factor_k_upper: Vec<usize>,
    pub factor_steps: Vec<usize>,
    pub step_drop_verified: bool,
    pub product_lower_bound: usize,
    pub atilde_size: usize,
    pub factorization: Option<FactorizationReport>,
}

impl StepReduction {
    pub fn report(&self) -> StepReductionReport {
        StepReductionReport {
            input_step: self.input_step,
            n_size: self.n.len(),
            n_radius: self.n_radius,
            r: self.r,
            factor_sizes: self.factors.iter().map(|c| c.a().len()).collect(),
            factor_k_upper: self.factors.iter().map(|c| c.k_upper()).collect(),
            factor_steps: self.factor_steps.clone(),
            step_drop_verified: self.step_drop_verified,
            product_lower_bound: self.product_lower_bound,
            atilde_size: self.atilde_size,
            factorization: self.factorization.as_ref().map(Factorization::report),
        }
    }
}

/// Reduce `Ã ⊆ A^m` to approximate groups of smaller step modulo a normal
/// subgroup of `⟨A⟩`.
pub fn step_reduction(
    cert: &ApproxCertificate,
    ambient: &ApproxCertificate,
    m: usize,
    budget: &Budget,
) -> Result<StepReduction> {
    cert.group().ensure_same(ambient.group())?;
    if m == 0 {
        return Err(Error::precondition("m must be at least 1"));
    }
    let am = ambient.a().power(m, budget)?;
    if !cert.a().is_subset(&am) {
        return Err(Error::precondition(format!("Ã ⊄ A^{m}")));
    }
    reduce_step(cert, ambient.a(), &OracleOptions::default(), budget)
}

pub(crate) fn reduce_step(
    cert: &ApproxCertificate,
    ambient: &GSet,
    opts: &OracleOptions,
    budget: &Budget,
) -> Result<StepReduction> {
    let g = cert.group();
    let at = cert.a();
    let s = generated_step(at, budget)?;
    if s <= 1 {
        return Ok(StepReduction {
            input_step: s,
            n: SubgroupHandle::trivial(g),
            n_radius: Some(0),
            quotient: QuotientView::trivial(g),
            factors: vec![cert.clone()],
            factor_steps: vec![s],
            r: 1,
            step_drop_verified: true,
            product_lower_bound: at.len(),
            atilde_size: at.len(),
            factorization: None,
        });
    }
    let f = factorize(at, opts, false, budget)?;
    let normalizers: Vec<Element> = ambient.iter().filter(|e| !e.is_zero()).cloned().collect();
    let n = commutator_kernel(&f, s, &normalizers, budget)?;
    let quotient = if n.is_trivial() {
        QuotientView::trivial(g)
    } else {
        QuotientView::within(&n, &normalizers)?
    };
    let n_radius = radius(n.elements(), ambient, budget)?;
    let mut factors = Vec::new();
    let mut factor_steps = Vec::new();
    for (i, part) in f.parts().into_iter().enumerate() {
        let c = greedy_cover_certificate(part, budget)?;
        let t = generated_step(&quotient.project(part)?, budget)?;
        if t >= s {
            return Err(Error::StepDropFailed {
                factor: i,
                step: t,
                ambient: s,
            });
        }
        factors.push(c);
        factor_steps.push(t);
    }
    Ok(StepReduction {
        input_step: s,
        n_radius,
        quotient,
        r: factors.len(),
        factors,
        factor_steps,
        step_drop_verified: true,
        product_lower_bound: f.core.len(),
        atilde_size: at.len(),
        factorization: Some(f),
        n,
    })
}

/// Normal closure in `⟨ambient⟩` of `[π⁻¹(H), …, π⁻¹(H)]` (`s`-fold).
fn commutator_kernel(
    f: &Factorization,
    s: usize,
    normalizers: &[Element],
    budget: &Budget,
) -> Result<SubgroupHandle> {
    let q = &f.quotient;
    let g = q.parent();
    let h = &f.oracle.best.h;
    match &f.derived {
        Some(d) => {
            let mut gens: Vec<Element> = d.generators().to_vec();
            gens.extend(h.generators().iter().map(|x| g.canonical(x)));
            let pre = span(&GSet::new(g, gens)?, budget)?;
            let series = lower_central_series(&pre, budget)?;
            let gamma = match series.get(s - 1) {
                Some(t) => t.clone(),
                None => return Ok(SubgroupHandle::trivial(g)),
            };
            crate::group::normal_closure_of(g, gamma.generators(), normalizers, budget)
        }
        None => {
            if !h.is_trivial() {
                return Err(Error::Unsupported(
                    "torsion in the abelianisation of a torsion-free group".into(),
                ));
            }
            let Some(Kernel::Lattice(d)) = q.quotient().kernel() else {
                return Ok(SubgroupHandle::trivial(g));
            };
            let base: Vec<Element> = d.basis().cloned().collect();
            let mut cur = d.clone();
            for _ in 1..s {
                let mut comms = Vec::new();
                for x in cur.basis() {
                    for y in &base {
                        for (u, v) in [(x.clone(), y.clone()), (g.inv(x), y.clone())] {
                            let c = g.commutator(&u, &v);
                            if !c.is_zero() {
                                comms.push(c);
                            }
                        }
                    }
                }
                cur = PcSubgroup::generate(g.descriptor_arc().clone(), &comms, &base)?;
            }
            if !cur.is_trivial() {
                return Err(Error::Unsupported(
                    "infinite iterated commutator subgroup".into(),
                ));
            }
            Ok(SubgroupHandle::trivial(g))
        }
    }
}

/// Least `k` with `target ⊆ A^k`, with `A⁰ = {1}`.
pub(crate) fn radius(target: &GSet, a: &GSet, budget: &Budget) -> Result<Option<usize>> {
    if target.iter().all(|e| e.is_zero()) {
        return Ok(Some(0));
    }
    a.covering_power(target, MAX_RADIUS, budget)
}

/// `N = ⟨H^A⟩` and the least `k` with `N ⊆ A^k`.
pub fn normal_closure_radius(
    h: &SubgroupHandle,
    cert: &ApproxCertificate,
    budget: &Budget,
) -> Result<(SubgroupHandle, usize)> {
    let g = cert.group();
    g.ensure_same(h.group())?;
    if !g.is_finite() {
        return Err(Error::Unsupported("normal closure radius needs a finite group".into()));
    }
    let generated = span(cert.a(), budget)?;
    if g.order() != Some(generated.len() as u128) {
        return Err(Error::precondition("A does not generate the group"));
    }
    let mut n = if h.is_trivial() {
        h.clone()
    } else {
        normal_closure(h, cert.a(), budget)?
    };
    n.verify_normal(cert.a().members());
    let k = radius(n.elements(), cert.a(), budget)?
        .ok_or_else(|| Error::verification("normal closure not reached by powers of A"))?;
    Ok((n, k))
}

#[cfg(test)]
mod tests;
