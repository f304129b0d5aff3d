use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::{coset_words, radius, reduce_step, word_value, StepReductionReport, Word};
use crate::approx::{greedy_cover_certificate, ApproxCertificate};
use crate::budget::Budget;
use crate::covering::{
    chang_cover, check_ruzsa_containment, ruzsa_cover, Arrangement, ChangReport, RuzsaCover,
    CHANG_C0,
};
use crate::error::{Error, Result};
use crate::group::{Element, Group, QuotientView, SubgroupHandle};
use crate::oracle::{
    derive_sanders_cover, find_coset_progression, OracleOptions, OracleReport, OracleResult,
    SandersCover,
};
use crate::progressions::{ProgressionKind, ProgressionSpec};
use crate::setcalc::{ratio_f64, GSet};

/// Largest number of `(u_1, …, u_ℓ)` choices compared by exact product size.
const PIGEONHOLE_CAP: usize = 4096;

/// A factor of the decomposition, in product order.
#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    Progression(ProgressionSpec),
    Sparse(GSet),
}

impl Piece {
    pub fn is_progression(&self) -> bool {
        matches!(self, Piece::Progression(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageLog {
    pub depth: usize,
    pub kind: String,
    pub size: usize,
    pub step: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction: Option<StepReductionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ruzsa_x: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sanders: Option<SandersCover>,
}

/// `A ⊆ H ∏ pieces`, with the pigeonholed progression `P_ord`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub a: GSet,
    pub step: usize,
    pub k_upper: usize,
    pub h: SubgroupHandle,
    pub h_normal: bool,
    pub pieces: Vec<Piece>,
    /// `xi[j]` is the label of the `j`-th factor in `[P_1, …, P_k, X_1, …, X_ℓ]`.
    pub xi: Vec<usize>,
    /// `u_i ∈ X_i`, in label order.
    pub choices: Vec<Element>,
    pub pigeonhole: String,
    pub p_ord: ProgressionSpec,
    pub radius_h: Option<usize>,
    pub radius_p: Option<usize>,
    /// `|H P_ord| / |AH|`.
    pub delta: Option<Ratio<u64>>,
    /// Elements of `A` whose factorisation through the pieces was checked.
    pub witnesses_verified: usize,
    /// `AH ⊆ H ∏ pieces` by full expansion, when within budget.
    pub expansion_verified: Option<bool>,
    pub stages: Vec<StageLog>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub step: usize,
    pub a_size: usize,
    pub k_upper: usize,
    pub h_size: usize,
    pub h_normal: bool,
    pub radius_h: Option<usize>,
    pub k: usize,
    pub l: usize,
    pub rank_final: usize,
    pub radius_p: Option<usize>,
    pub delta: Option<f64>,
    pub xi: Vec<usize>,
    pub pigeonhole: String,
    pub witnesses_verified: usize,
    pub expansion_verified: Option<bool>,
    pub stages: Vec<StageLog>,
}

impl Decomposition {
    pub fn group(&self) -> &Group {
        self.a.group()
    }

    pub fn progressions(&self) -> impl Iterator<Item = &ProgressionSpec> {
        self.pieces.iter().filter_map(|p| match p {
            Piece::Progression(s) => Some(s),
            Piece::Sparse(_) => None,
        })
    }

    pub fn sparse(&self) -> impl Iterator<Item = &GSet> {
        self.pieces.iter().filter_map(|p| match p {
            Piece::Sparse(s) => Some(s),
            Piece::Progression(_) => None,
        })
    }

    pub fn report(&self) -> DecompositionReport {
        DecompositionReport {
            step: self.step,
            a_size: self.a.len(),
            k_upper: self.k_upper,
            h_size: self.h.len(),
            h_normal: self.h_normal,
            radius_h: self.radius_h,
            k: self.progressions().count(),
            l: self.sparse().count(),
            rank_final: self.p_ord.rank(),
            radius_p: self.radius_p,
            delta: self.delta.map(ratio_f64),
            xi: self.xi.clone(),
            pigeonhole: self.pigeonhole.clone(),
            witnesses_verified: self.witnesses_verified,
            expansion_verified: self.expansion_verified,
            stages: self.stages.clone(),
        }
    }
}

struct Leaf {
    set: GSet,
    /// Generators in `G` of the kernel of the leaf's group.
    kernel: Vec<Element>,
    oracle: OracleResult,
    y: GSet,
    hp: Vec<Element>,
    words: FxHashMap<Element, (Element, Word)>,
    prog: ProgressionSpec,
}

struct Split {
    reduction: super::StepReduction,
    cover: RuzsaCover,
    children: Vec<Node>,
}

enum Node {
    Leaf(usize),
    Split(Box<Split>),
}

enum Factor {
    Member(Element),
    Word(Word),
}

struct Ctx<'a> {
    g: Group,
    opts: OracleOptions,
    budget: &'a Budget,
    leaves: Vec<Leaf>,
    stages: Vec<StageLog>,
    memo: FxHashMap<(usize, Element), (Element, Word)>,
}

impl Ctx<'_> {
    fn build(
        &mut self,
        cert: &ApproxCertificate,
        ambient: &GSet,
        kernel: Vec<Element>,
        depth: usize,
    ) -> Result<Node> {
        let red = reduce_step(cert, ambient, &self.opts, self.budget)?;
        let Some(f) = red.factorization.as_ref() else {
            return self.leaf(cert.a().clone(), kernel, depth);
        };
        let cover = ruzsa_cover(cert.a(), &f.core, self.budget)?;
        self.stages.push(StageLog {
            depth,
            kind: "split".into(),
            size: cert.a().len(),
            step: red.input_step,
            reduction: Some(red.report()),
            ruzsa_x: Some(cover.x.len()),
            oracle: None,
            sanders: None,
        });
        let mut child_kernel = kernel;
        child_kernel.extend(red.n.generators().iter().map(|e| self.g.canonical(e)));
        let child_ambient = red.quotient.project(ambient)?;
        let mut children = Vec::new();
        for (j, fc) in red.factors.iter().enumerate() {
            let image = red.quotient.project(fc.a())?;
            let child = if red.factor_steps[j] <= 1 {
                self.leaf(image, child_kernel.clone(), depth + 1)?
            } else {
                let c = if red.n.is_trivial() {
                    fc.clone()
                } else {
                    greedy_cover_certificate(&image, self.budget)?
                };
                self.build(&c, &child_ambient, child_kernel.clone(), depth + 1)?
            };
            children.push(child);
        }
        Ok(Node::Split(Box::new(Split {
            reduction: red,
            cover,
            children,
        })))
    }

    /// Abelian case: `A ⊆ Y + H + 2P` from the oracle and Ruzsa covering.
    fn leaf(&mut self, set: GSet, kernel: Vec<Element>, depth: usize) -> Result<Node> {
        let oracle = find_coset_progression(&set, &self.opts, self.budget)?;
        let sanders = derive_sanders_cover(&set, &oracle, None, self.budget)?;
        if !sanders.pass {
            return Err(Error::verification("covering by H + 2P failed its size check"));
        }
        let best = &oracle.best;
        let words = coset_words(&best.h, &best.generators, &best.bounds, self.budget)?;
        let gens: Vec<Element> = best.generators.iter().map(|x| self.g.canonical(x)).collect();
        let bounds: Vec<u64> = best.bounds.iter().map(|l| 2 * l).collect();
        let prog = ProgressionSpec::with_measured_step(&self.g, ProgressionKind::Ordered, gens, bounds)?;
        self.stages.push(StageLog {
            depth,
            kind: "leaf".into(),
            size: set.len(),
            step: 1,
            reduction: None,
            ruzsa_x: None,
            oracle: Some(oracle.report()),
            sanders: Some(sanders.clone()),
        });
        self.leaves.push(Leaf {
            y: sanders.x,
            hp: best.realized.members().to_vec(),
            words,
            prog,
            kernel,
            set,
            oracle,
        });
        Ok(Node::Leaf(self.leaves.len() - 1))
    }

    /// `e = y + v − u` with `y ∈ Y` and `u, v ∈ H + P`.
    fn leaf_witness(&mut self, i: usize, e: &Element) -> Result<(Element, Word)> {
        if let Some(w) = self.memo.get(&(i, e.clone())) {
            return Ok(w.clone());
        }
        let leaf = &self.leaves[i];
        let q = leaf.set.group();
        for y in leaf.y.iter() {
            let base = q.mul(&q.inv(y), e);
            for u in &leaf.hp {
                if let Some((_, lv)) = leaf.words.get(&q.mul(&base, u)) {
                    let (_, lu) = &leaf.words[u];
                    let w: Word = lv.iter().zip(lu).map(|(a, b)| a - b).collect();
                    let out = (self.g.canonical(y), w);
                    self.memo.insert((i, e.clone()), out.clone());
                    return Ok(out);
                }
            }
        }
        Err(Error::verification(format!("{e:?} not covered by Y + H + 2P")))
    }

    fn witness(&mut self, node: &Node, e: &Element) -> Result<Vec<Factor>> {
        match node {
            Node::Leaf(i) => {
                let (y, w) = self.leaf_witness(*i, e)?;
                Ok(vec![Factor::Member(y), Factor::Word(w)])
            }
            Node::Split(s) => {
                let q = s.cover.x.group();
                let idx = s
                    .cover
                    .witnesses
                    .binary_search_by(|w| w.a.cmp(e))
                    .map_err(|_| Error::verification(format!("no covering witness for {e:?}")))?;
                let w = &s.cover.witnesses[idx];
                let f = s.reduction.factorization.as_ref().expect("split stage");
                let missing = || Error::verification("covering witness outside the split core");
                let vs = f.splitting(&w.v).ok_or_else(missing)?.to_vec();
                let us = f.splitting(&w.u).ok_or_else(missing)?.to_vec();
                let rho = &s.reduction.quotient;
                let mut out = vec![Factor::Member(self.g.canonical(&w.x))];
                for (j, v) in vs.iter().enumerate() {
                    out.extend(self.witness(&s.children[j], &rho.rep(v))?);
                }
                for (j, u) in us.iter().enumerate().rev() {
                    out.extend(self.witness(&s.children[j], &rho.rep(&q.inv(u)))?);
                }
                Ok(out)
            }
        }
    }

    fn layout(&self, node: &Node, out: &mut Vec<Piece>) {
        match node {
            Node::Leaf(i) => {
                let leaf = &self.leaves[*i];
                out.push(Piece::Sparse(leaf.y.map(&self.g, |e| self.g.canonical(e))));
                out.push(Piece::Progression(leaf.prog.clone()));
            }
            Node::Split(s) => {
                out.push(Piece::Sparse(s.cover.x.map(&self.g, |e| self.g.canonical(e))));
                for c in &s.children {
                    self.layout(c, out);
                }
                for c in s.children.iter().rev() {
                    self.layout(c, out);
                }
            }
        }
    }
}

/// Ordered product of `x_i^{[-L_i, L_i]}` layer by layer, or `None` once a
/// layer could exceed the element budget.
fn try_realize(g: &Group, gens: &[Element], bounds: &[u64], budget: &Budget) -> Result<Option<GSet>> {
    let mut acc = GSet::identity(g);
    for (x, &l) in gens.iter().zip(bounds) {
        let l = l as i64;
        let layer = GSet::from_reps(g, (-l..=l).map(|k| g.pow(x, k)).collect());
        if acc.len().saturating_mul(layer.len()) > budget.elements {
            return Ok(None);
        }
        acc = match acc.product(&layer, budget) {
            Ok(s) => s,
            Err(Error::BudgetExceeded { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
    }
    Ok(Some(acc))
}

fn project_spec(q: &QuotientView, spec: &ProgressionSpec) -> Vec<Element> {
    spec.generators.iter().map(|x| q.rep(x)).collect()
}

/// Product over `pieces` in `G/H`, with the sparse pieces replaced by the
/// given elements when `choice` is set.
fn quotient_product(
    q: &QuotientView,
    pieces: &[Piece],
    choice: Option<&[Element]>,
    budget: &Budget,
) -> Result<Option<GSet>> {
    let qg = q.quotient();
    let mut acc = GSet::identity(qg);
    let mut next_sparse = 0;
    for p in pieces {
        let factor = match p {
            Piece::Progression(spec) => {
                match try_realize(qg, &project_spec(q, spec), &spec.bounds, budget)? {
                    Some(s) => s,
                    None => return Ok(None),
                }
            }
            Piece::Sparse(s) => match choice {
                Some(c) => {
                    next_sparse += 1;
                    GSet::singleton(qg, q.rep(&c[next_sparse - 1]))
                }
                None => q.project(s)?,
            },
        };
        if acc.len().saturating_mul(factor.len()) > budget.elements {
            return Ok(None);
        }
        acc = acc.product(&factor, budget)?;
    }
    Ok(Some(acc))
}

pub fn decompose(cert: &ApproxCertificate, budget: &Budget) -> Result<Decomposition> {
    decompose_with(cert, &OracleOptions::default(), budget)
}

/// Decompose `A ⊆ H ∏{P_1, …, P_k, X_1, …, X_ℓ}` by induction on the step,
/// then pigeonhole one `u_i` per sparse set.
pub fn decompose_with(
    cert: &ApproxCertificate,
    opts: &OracleOptions,
    budget: &Budget,
) -> Result<Decomposition> {
    let g = cert.group().clone();
    let a = cert.a().clone();
    let conj: Vec<Element> = a.iter().filter(|e| !e.is_zero()).cloned().collect();
    let step = super::generated_step(&a, budget)?;
    if a.product(&a, budget)? == a {
        let h = SubgroupHandle::from_set(a.clone())?;
        let p_ord = ProgressionSpec::new(&g, ProgressionKind::Ordered, Vec::new(), Vec::new(), 1)?;
        return Ok(Decomposition {
            step,
            k_upper: cert.k_upper(),
            h_normal: true,
            radius_h: Some(radius(h.elements(), &a, budget)?.unwrap_or(1)),
            h,
            pieces: Vec::new(),
            xi: Vec::new(),
            choices: Vec::new(),
            pigeonhole: "exact".into(),
            p_ord,
            radius_p: Some(0),
            delta: Some(Ratio::from_integer(1)),
            witnesses_verified: a.len(),
            expansion_verified: Some(true),
            stages: vec![StageLog {
                depth: 0,
                kind: "subgroup".into(),
                size: a.len(),
                step,
                reduction: None,
                ruzsa_x: None,
                oracle: None,
                sanders: None,
            }],
            a,
        });
    }

    let mut ctx = Ctx {
        g: g.clone(),
        opts: *opts,
        budget,
        leaves: Vec::new(),
        stages: Vec::new(),
        memo: FxHashMap::default(),
    };
    let root = ctx.build(cert, &a, Vec::new(), 0)?;

    // H = N_1 ⋯ N_r, the normal closure of every leaf's subgroup with its kernel.
    let mut h_gens: Vec<Element> = Vec::new();
    for leaf in &ctx.leaves {
        h_gens.extend(leaf.kernel.iter().cloned());
        h_gens.extend(leaf.oracle.best.h.generators().iter().map(|x| g.canonical(x)));
    }
    h_gens.retain(|e| !e.is_zero());
    h_gens.sort();
    h_gens.dedup();
    let mut h = if h_gens.is_empty() {
        SubgroupHandle::trivial(&g)
    } else {
        crate::group::normal_closure_of(&g, &h_gens, &conj, budget)?
    };
    let h_normal = h.verify_normal(&conj) && conj.iter().all(|x| h.is_normalized_by(x));
    if !h_normal {
        return Err(Error::verification("H is not normalised by A"));
    }

    let mut pieces = Vec::new();
    ctx.layout(&root, &mut pieces);

    let mut sparse_choices: Vec<Vec<Element>> = Vec::new();
    for e in a.iter() {
        let factors = ctx.witness(&root, e)?;
        if factors.len() != pieces.len() {
            return Err(Error::verification("witness length does not match the pieces"));
        }
        let mut acc = g.identity();
        let mut chosen = Vec::new();
        for (p, f) in pieces.iter().zip(&factors) {
            let x = match (p, f) {
                (Piece::Sparse(s), Factor::Member(x)) if s.contains(x) => {
                    chosen.push(x.clone());
                    x.clone()
                }
                (Piece::Progression(spec), Factor::Word(w))
                    if w.iter().zip(&spec.bounds).all(|(l, b)| l.unsigned_abs() <= *b) =>
                {
                    word_value(&g, &spec.generators, w)
                }
                _ => return Err(Error::verification(format!("bad factor in the witness for {e:?}"))),
            };
            acc = g.mul(&acc, &x);
        }
        if !h.contains(&g.mul(e, &g.inv(&acc))) {
            return Err(Error::verification(format!("{e:?} ∉ H·∏ pieces")));
        }
        sparse_choices.push(chosen);
    }

    let qh = if h.is_trivial() {
        QuotientView::trivial(&g)
    } else {
        QuotientView::within(&h, &conj)?
    };
    let image = qh.project(&a)?;
    let expansion_verified = quotient_product(&qh, &pieces, None, budget)?.map(|s| image.is_subset(&s));
    if expansion_verified == Some(false) {
        return Err(Error::verification("AH ⊄ H·∏ pieces"));
    }

    // Labels: progressions first, then sparse sets, each in order of appearance.
    let k = pieces.iter().filter(|p| p.is_progression()).count();
    let (mut next_p, mut next_x) = (0, k);
    let xi: Vec<usize> = pieces
        .iter()
        .map(|p| {
            let slot = if p.is_progression() { &mut next_p } else { &mut next_x };
            *slot += 1;
            *slot - 1
        })
        .collect();

    let sparse_sets: Vec<&GSet> = pieces
        .iter()
        .filter_map(|p| match p {
            Piece::Sparse(s) => Some(s),
            Piece::Progression(_) => None,
        })
        .collect();
    let (choices, pigeonhole) = pigeonhole(&qh, &pieces, &sparse_sets, &sparse_choices, budget)?;

    let mut gens = Vec::new();
    let mut bounds = Vec::new();
    let mut next = 0;
    for p in &pieces {
        match p {
            Piece::Progression(spec) => {
                gens.extend(spec.generators.iter().cloned());
                bounds.extend(spec.bounds.iter().cloned());
            }
            Piece::Sparse(_) => {
                gens.push(choices[next].clone());
                bounds.push(1);
                next += 1;
            }
        }
    }
    let p_ord = ProgressionSpec::with_measured_step(&g, ProgressionKind::Ordered, gens, bounds)?;
    let delta = try_realize(qh.quotient(), &project_spec(&qh, &p_ord), &p_ord.bounds, budget)?
        .map(|s| Ratio::new(s.len() as u64, image.len() as u64));
    if delta == Some(Ratio::from_integer(0)) {
        return Err(Error::verification("δ = 0"));
    }
    let radius_p = match try_realize(&g, &p_ord.generators, &p_ord.bounds, budget)? {
        Some(p) => radius(&p, &a, budget)?,
        None => None,
    };
    let radius_h = if h.is_trivial() {
        Some(0)
    } else {
        radius(h.elements(), &a, budget)?
    };
    Ok(Decomposition {
        step,
        k_upper: cert.k_upper(),
        h,
        h_normal,
        pieces,
        xi,
        choices,
        pigeonhole,
        p_ord,
        radius_h,
        radius_p,
        delta,
        witnesses_verified: a.len(),
        expansion_verified,
        stages: ctx.stages,
        a,
    })
}

/// Pick `u_i ∈ X_i` maximising `|H ∏{P_1, …, u_1, …}|` exactly when the
/// choices are few and the products fit the budget; otherwise the tuple
/// used by most witnesses.
fn pigeonhole(
    qh: &QuotientView,
    pieces: &[Piece],
    sparse: &[&GSet],
    witnessed: &[Vec<Element>],
    budget: &Budget,
) -> Result<(Vec<Element>, String)> {
    let total = sparse
        .iter()
        .try_fold(1usize, |acc, s| acc.checked_mul(s.len()))
        .unwrap_or(usize::MAX);
    if total <= PIGEONHOLE_CAP {
        let mut idx = vec![0usize; sparse.len()];
        let mut best: Option<(usize, Vec<Element>)> = None;
        let mut exact = true;
        loop {
            let tuple: Vec<Element> = idx.iter().zip(sparse).map(|(&i, s)| s.members()[i].clone()).collect();
            match quotient_product(qh, pieces, Some(&tuple), budget)? {
                Some(p) => {
                    if best.as_ref().is_none_or(|(n, _)| p.len() > *n) {
                        best = Some((p.len(), tuple));
                    }
                }
                None => {
                    exact = false;
                    break;
                }
            }
            let mut i = sparse.len();
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < sparse[i].len() {
                    break;
                }
                idx[i] = 0;
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX || sparse.is_empty() {
                break;
            }
        }
        if exact {
            let (_, tuple) = best.expect("at least one tuple");
            return Ok((tuple, "exact".into()));
        }
    }
    let mut counts: FxHashMap<&Vec<Element>, usize> = FxHashMap::default();
    for w in witnessed {
        *counts.entry(w).or_default() += 1;
    }
    let (tuple, _) = counts
        .into_iter()
        .max_by(|x, y| x.1.cmp(&y.1).then_with(|| y.0.cmp(x.0)))
        .expect("A is non-empty");
    Ok((tuple.clone(), "witness".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Corollary {
    Ruzsa,
    Chang,
}

impl fmt::Display for Corollary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Corollary::Ruzsa => "ruzsa",
            Corollary::Chang => "chang",
        })
    }
}

impl FromStr for Corollary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ruzsa" => Ok(Corollary::Ruzsa),
            "chang" => Ok(Corollary::Chang),
            other => Err(Error::Parse(format!("unknown corollary {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorollaryCover {
    pub which: Corollary,
    /// Ruzsa translates, lifted to `G`.
    pub x: Option<GSet>,
    pub x_bound: Option<usize>,
    /// `PP⁻¹`, or `Q_{t−1}⋯Q_1 P_0⁻¹ P_0 Q_1⋯Q_t`.
    pub progression: ProgressionSpec,
    pub base_rank: usize,
    pub chang: Option<ChangReport>,
    pub contained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryReport {
    pub which: Corollary,
    pub x_size: Option<usize>,
    pub x_bound: Option<usize>,
    pub rank: usize,
    pub base_rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chang: Option<ChangReport>,
    pub contained: bool,
}

impl CorollaryCover {
    pub fn report(&self) -> CorollaryReport {
        CorollaryReport {
            which: self.which,
            x_size: self.x.as_ref().map(GSet::len),
            x_bound: self.x_bound,
            rank: self.progression.rank(),
            base_rank: self.base_rank,
            chang: self.chang.clone(),
            contained: self.contained,
        }
    }
}

/// Covering forms of the decomposition, computed in `G/H`.
pub fn corollary_covers(
    dec: &Decomposition,
    cert: &ApproxCertificate,
    which: Corollary,
    budget: &Budget,
) -> Result<CorollaryCover> {
    let g = dec.group();
    g.ensure_same(cert.group())?;
    if cert.a() != &dec.a {
        return Err(Error::precondition("decomposition was built from another set"));
    }
    let conj: Vec<Element> = dec.a.iter().filter(|e| !e.is_zero()).cloned().collect();
    let qh = if dec.h.is_trivial() {
        QuotientView::trivial(g)
    } else {
        QuotientView::within(&dec.h, &conj)?
    };
    let qg = qh.quotient();
    let image = qh.project(&dec.a)?;
    let p = &dec.p_ord;
    let p_image = try_realize(qg, &project_spec(&qh, p), &p.bounds, budget)?
        .ok_or_else(|| Error::budget("realising P_ord", budget.elements as u64))?;
    match which {
        Corollary::Ruzsa => {
            let cover = ruzsa_cover(&image, &p_image, budget)?;
            let contained = check_ruzsa_containment(&image, &cover.x, &p_image, budget)?;
            if !contained {
                return Err(Error::verification("A ⊄ XHPP⁻¹"));
            }
            let mut gens = p.generators.clone();
            gens.extend(p.generators.iter().rev().cloned());
            let mut bounds = p.bounds.clone();
            bounds.extend(p.bounds.iter().rev().cloned());
            Ok(CorollaryCover {
                which,
                x: Some(cover.x.map(g, |e| g.canonical(e))),
                x_bound: Some(cover.ratio_bound),
                progression: ProgressionSpec::new(g, ProgressionKind::Ordered, gens, bounds, p.step)?,
                base_rank: p.rank(),
                chang: None,
                contained,
            })
        }
        Corollary::Chang => {
            let cert_q = greedy_cover_certificate(&image, budget)?;
            let m = radius(&p_image, &image, budget)?
                .ok_or_else(|| Error::verification("P_ord not inside a power of A"))?
                .max(1);
            let cover = chang_cover(&cert_q, &p_image, m, Arrangement::InversesLeft, CHANG_C0, budget)?;
            let lift = |e: &Element| g.canonical(e);
            let mut gens: Vec<Element> = Vec::new();
            let mut bounds: Vec<u64> = Vec::new();
            let t = cover.s.len();
            for s in cover.s[..t - 1].iter().rev() {
                gens.extend(s.iter().map(lift));
            }
            gens.extend(p.generators.iter().rev().cloned());
            bounds.resize(gens.len() - p.rank(), 1);
            bounds.extend(p.bounds.iter().rev().cloned());
            gens.extend(p.generators.iter().cloned());
            bounds.extend(p.bounds.iter().cloned());
            for s in &cover.s {
                gens.extend(s.iter().map(lift));
            }
            bounds.resize(gens.len(), 1);
            let spec = ProgressionSpec::with_measured_step(g, ProgressionKind::Ordered, gens, bounds)?;
            let realized = try_realize(qg, &project_spec(&qh, &spec), &spec.bounds, budget)?
                .ok_or_else(|| Error::budget("realising the covering progression", budget.elements as u64))?;
            let contained = image.is_subset(&realized);
            if !contained {
                return Err(Error::verification("A ⊄ PH"));
            }
            Ok(CorollaryCover {
                which,
                x: None,
                x_bound: None,
                progression: spec,
                base_rank: p.rank(),
                chang: Some(cover.report()),
                contained,
            })
        }
    }
}
