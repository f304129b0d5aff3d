//! JSON scenarios: a group, an optional set recipe and a list of operations.
//!
//! ```json
//! {
//!   "name": "heisenberg-containment",
//!   "group": "ut:3:0",
//!   "set": "ball ut:3:0 radius=1",
//!   "ops": [{ "op": "stats", "n": 4 }, { "op": "containment", "bounds": [1, 1] }],
//!   "outputs": { "json": "out/report.json" }
//! }
//! ```

use std::path::PathBuf;

use growthlab_core::approx::{greedy_cover_certificate, plunnecke_check, slicing_cover, sum_difference, ApproxCertificate};
use growthlab_core::covering::{check_chang_containment, check_ruzsa_containment, chang_cover, ruzsa_cover, Arrangement, CHANG_C0};
use growthlab_core::group::derived_subgroup;
use growthlab_core::oracle::{derive_sanders_cover, find_coset_progression, OracleOptions, OracleResult};
use growthlab_core::pipeline::{
    abelian_factorization, build_section, corollary_covers, decompose, pullback_check, step_reduction, Corollary,
    Decomposition,
};
use growthlab_core::progressions::{containment_exponent, hall_basis, ProgressionKind, ProgressionSpec};
use growthlab_core::{Budget, Error, GSet, Group, QuotientView};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::recipe::{parse_elements, Recipe};
use crate::report::{Record, Report};
use crate::CliError;

fn five() -> usize {
    5
}

fn one() -> usize {
    1
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Op {
    Stats {
        #[serde(default = "five")]
        n: usize,
    },
    Certify,
    GrowthLaw {
        #[serde(default = "five")]
        m_max: usize,
    },
    Ruzsa {
        #[serde(default)]
        b: Option<Recipe>,
    },
    Chang {
        #[serde(default)]
        b: Option<Recipe>,
        #[serde(default = "one")]
        m: usize,
    },
    Plunnecke {
        #[serde(default = "five")]
        max_total: usize,
    },
    Slicing {
        #[serde(default)]
        b: Option<Recipe>,
        #[serde(default = "two")]
        m: usize,
        #[serde(default = "two")]
        n: usize,
    },
    Containment {
        #[serde(default)]
        gens: Option<String>,
        bounds: Vec<u64>,
        #[serde(default)]
        step: Option<usize>,
    },
    Oracle {
        #[serde(default)]
        rank_max: Option<usize>,
    },
    Sanders {
        #[serde(default)]
        rank_max: Option<usize>,
    },
    /// Chang covering with `B = H + P` from the oracle.
    OracleChang {
        #[serde(default)]
        rank_max: Option<usize>,
    },
    Section,
    Pullback {
        #[serde(default = "one")]
        m: usize,
    },
    Factorize,
    Reduce {
        #[serde(default = "one")]
        m: usize,
    },
    Decompose,
    Corollary {
        which: Corollary,
    },
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::Stats { .. } => "stats",
            Op::Certify => "certify",
            Op::GrowthLaw { .. } => "growth-law",
            Op::Ruzsa { .. } => "ruzsa",
            Op::Chang { .. } => "chang",
            Op::Plunnecke { .. } => "plunnecke",
            Op::Slicing { .. } => "slicing",
            Op::Containment { .. } => "containment",
            Op::Oracle { .. } => "oracle",
            Op::Sanders { .. } => "sanders",
            Op::OracleChang { .. } => "oracle-chang",
            Op::Section => "section",
            Op::Pullback { .. } => "pullback",
            Op::Factorize => "factorize",
            Op::Reduce { .. } => "reduce",
            Op::Decompose => "decompose",
            Op::Corollary { .. } => "corollary",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<Recipe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub ops: Vec<Op>,
    #[serde(default)]
    pub outputs: Outputs,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Lazily built inputs shared by the operations of one scenario.
pub struct Context {
    pub group: Option<Group>,
    pub set: Option<GSet>,
    pub budget: Budget,
    pub seed: u64,
    cert: Option<ApproxCertificate>,
    dec: Option<Decomposition>,
}

impl Context {
    pub fn new(group: Option<Group>, set: Option<GSet>, budget: Budget, seed: u64) -> Self {
        Context {
            group,
            set,
            budget,
            seed,
            cert: None,
            dec: None,
        }
    }

    pub fn for_set(set: GSet, budget: Budget, seed: u64) -> Self {
        Context::new(Some(set.group().clone()), Some(set), budget, seed)
    }

    fn set(&self) -> Result<&GSet, CliError> {
        self.set
            .as_ref()
            .ok_or_else(|| CliError::Scenario("operation needs a set".into()))
    }

    fn group(&self) -> Result<&Group, CliError> {
        self.group
            .as_ref()
            .ok_or_else(|| CliError::Scenario("operation needs a group".into()))
    }

    fn cert(&mut self) -> Result<ApproxCertificate, CliError> {
        if self.cert.is_none() {
            self.cert = Some(greedy_cover_certificate(self.set()?, &self.budget)?);
        }
        Ok(self.cert.clone().expect("just built"))
    }

    fn decomposition(&mut self) -> Result<Decomposition, CliError> {
        if self.dec.is_none() {
            let cert = self.cert()?;
            self.dec = Some(decompose(&cert, &self.budget)?);
        }
        Ok(self.dec.clone().expect("just built"))
    }

    fn other(&self, b: &Option<Recipe>) -> Result<GSet, CliError> {
        match b {
            Some(r) => {
                let s = r.clone().with_default_seed(self.seed).generate(&self.budget)?;
                self.set()?.group().ensure_same(s.group())?;
                Ok(s)
            }
            None => Ok(self.set()?.clone()),
        }
    }

    fn oracle(&self, rank_max: Option<usize>) -> Result<OracleResult, CliError> {
        let opts = rank_max.map(OracleOptions::with_rank).unwrap_or_default();
        Ok(find_coset_progression(self.set()?, &opts, &self.budget)?)
    }
}

/// Centre-style quotient `G/[G, G]` of a finite parent.
fn derived_quotient(g: &Group, budget: &Budget) -> Result<QuotientView, CliError> {
    if !g.is_finite() {
        return Err(Error::Unsupported("section and pullback need a finite parent".into()).into());
    }
    let gens = GSet::new(g, g.standard_generators())?;
    let d = derived_subgroup(&gens, budget)?;
    Ok(QuotientView::new(&d)?)
}

fn elements(s: &GSet) -> Vec<String> {
    s.iter().map(|e| e.to_string()).collect()
}

pub fn run_op(op: &Op, ctx: &mut Context) -> Result<Record, CliError> {
    let budget = ctx.budget;
    let name = op.name();
    Ok(match op {
        Op::Stats { n } => {
            let set = ctx.set()?;
            let stats = set.growth_stats(*n, &budget)?;
            let monotone = stats.is_monotone();
            let pass = !set.contains_identity() || monotone;
            Record::new(
                name,
                pass,
                json!({
                    "sizes": stats.sizes,
                    "doubling": stats.doubling().map(growthlab_core::setcalc::ratio_f64),
                    "tripling": stats.tripling().map(growthlab_core::setcalc::ratio_f64),
                    "monotone": monotone,
                }),
            )
        }
        Op::Certify => {
            let cert = ctx.cert()?;
            Record::new(name, true, json!({ "summary": cert.summary(), "x": elements(cert.x()) }))
        }
        Op::GrowthLaw { m_max } => {
            let report = ctx.cert()?.growth_law(*m_max, &budget)?;
            Record::new(name, report.pass, report)
        }
        Op::Ruzsa { b } => {
            let a = ctx.set()?.clone();
            let b = ctx.other(b)?;
            let cover = ruzsa_cover(&a, &b, &budget)?;
            let contained = check_ruzsa_containment(&a, &cover.x, &b, &budget)?;
            let pass = cover.verified && contained && cover.x.len() <= cover.ratio_bound;
            Record::new(
                name,
                pass,
                json!({
                    "a_size": a.len(),
                    "b_size": b.len(),
                    "ab_size": cover.ab_size,
                    "x_size": cover.x.len(),
                    "ratio_bound": cover.ratio_bound,
                    "contained": contained,
                    "x": elements(&cover.x),
                }),
            )
        }
        Op::Chang { b, m } => {
            let cert = ctx.cert()?;
            let b = ctx.other(b)?;
            let cover = chang_cover(&cert, &b, *m, Arrangement::InversesLeft, CHANG_C0, &budget)?;
            let contained = check_chang_containment(&cover, cert.a(), &b, &budget)?;
            let sizes_ok = cover.s.iter().all(|s| s.len() <= 2 * cover.k_upper);
            let pass = cover.verified && contained && sizes_ok && cover.t <= cover.t_bound;
            Record::new(name, pass, json!({ "cover": cover.report(), "contained": contained }))
        }
        Op::Plunnecke { max_total } => {
            let a = ctx.set()?;
            let mut checks = Vec::new();
            for total in 1..=*max_total {
                for m in 0..=total {
                    checks.push(plunnecke_check(a, m, total - m, &budget)?);
                }
            }
            let pass = checks.iter().all(|c| c.pass);
            Record::new(name, pass, json!({ "checks": checks }))
        }
        Op::Slicing { b, m, n } => {
            let ca = ctx.cert()?;
            let cb = match b {
                Some(_) => greedy_cover_certificate(&ctx.other(b)?, &budget)?,
                None => ca.clone(),
            };
            let cover = slicing_cover(&ca, &cb, *m, *n, &budget)?;
            let pass = cover.verified && cover.count as f64 <= cover.bound;
            Record::new(name, pass, cover)
        }
        Op::Containment { gens, bounds, step } => {
            let g = ctx.group()?;
            let gens = match gens {
                Some(text) => parse_elements(g, text)?,
                None => g.standard_generators(),
            };
            let spec = match step {
                Some(s) => ProgressionSpec::new(g, ProgressionKind::Ordered, gens, bounds.clone(), *s)?,
                None => ProgressionSpec::with_measured_step(g, ProgressionKind::Ordered, gens, bounds.clone())?,
            };
            let basis = hall_basis(g, &spec.generators, spec.step)?;
            let report = containment_exponent(&spec, &basis, &budget)?;
            Record::new(name, report.pass, report)
        }
        Op::Oracle { rank_max } => {
            let res = ctx.oracle(*rank_max)?;
            let d = sum_difference(ctx.set()?, 2, 2, &budget)?;
            let contained = res.best.realized.is_subset(&d);
            Record::new(name, contained, json!({ "oracle": res.report(), "d_size": d.len() }))
        }
        Op::Sanders { rank_max } => {
            let res = ctx.oracle(*rank_max)?;
            let set = ctx.set()?.clone();
            let k_upper = if set.is_symmetric() && set.contains_identity() {
                Some(ctx.cert()?.k_upper())
            } else {
                None
            };
            let cover = derive_sanders_cover(&set, &res, k_upper, &budget)?;
            let k_ok = k_upper.is_none_or(|k| cover.h2p_size as f64 <= (k as f64).powi(8) * set.len() as f64);
            Record::new(name, cover.pass && k_ok, json!({ "oracle": res.report(), "cover": cover }))
        }
        Op::OracleChang { rank_max } => {
            let res = ctx.oracle(*rank_max)?;
            let cert = ctx.cert()?;
            // For symmetric A ∋ 1, 2A − 2A = A⁴.
            let cover = chang_cover(&cert, &res.best.realized, 4, Arrangement::InversesLeft, CHANG_C0, &budget)?;
            let contained = check_chang_containment(&cover, cert.a(), &res.best.realized, &budget)?;
            Record::new(
                name,
                cover.verified && contained,
                json!({ "oracle": res.report(), "cover": cover.report(), "contained": contained }),
            )
        }
        Op::Section => {
            let set = ctx.set()?;
            let q = derived_quotient(set.group(), &budget)?;
            let s = build_section(&q, set, &budget)?;
            Record::new(
                name,
                true,
                json!({
                    "image_size": s.len(),
                    "checks_inverse": s.checks_inverse,
                    "checks_product": s.checks_product,
                }),
            )
        }
        Op::Pullback { m } => {
            let set = ctx.set()?;
            let q = derived_quotient(set.group(), &budget)?;
            let p = q.project(&set.power(*m, &budget)?)?;
            let r = pullback_check(&q, set, &p, *m, Ratio::from_integer(1), &budget)?;
            Record::new(name, r.pass, r)
        }
        Op::Factorize => {
            let f = abelian_factorization(&ctx.cert()?, &budget)?;
            Record::new(name, true, f.report())
        }
        Op::Reduce { m } => {
            let cert = ctx.cert()?;
            let r = step_reduction(&cert, &cert, *m, &budget)?;
            Record::new(name, r.step_drop_verified, r.report())
        }
        Op::Decompose => {
            let d = ctx.decomposition()?;
            let pass = decomposition_passes(&d);
            Record::new(name, pass, d.report())
        }
        Op::Corollary { which } => {
            let cert = ctx.cert()?;
            let d = ctx.decomposition()?;
            let c = corollary_covers(&d, &cert, *which, &budget)?;
            Record::new(name, c.contained, c.report())
        }
    })
}

/// H normal and normalised by A, every element of A factored through the
/// pieces, no failed expansion and δ > 0 when measured.
pub fn decomposition_passes(d: &Decomposition) -> bool {
    d.h_normal
        && d.witnesses_verified == d.a.len()
        && d.expansion_verified != Some(false)
        && d.delta.is_none_or(|x| x > Ratio::from_integer(0))
}

/// Run every operation in order. Operation errors are recorded as failures;
/// a budget error also stops the scenario.
pub fn run_scenario(s: &Scenario, budget: Budget, seed: u64) -> Result<Report, CliError> {
    let seed = s.seed.unwrap_or(seed);
    let set = match &s.set {
        Some(r) => Some(r.clone().with_default_seed(seed).generate(&budget)?),
        None => None,
    };
    let group = match (&s.group, &set) {
        (Some(g), Some(set)) => {
            let g = Group::parse(g)?;
            g.ensure_same(set.group())?;
            Some(g)
        }
        (Some(g), None) => Some(Group::parse(g)?),
        (None, Some(set)) => Some(set.group().clone()),
        (None, None) => None,
    };
    let mut ctx = Context::new(group, set, budget, seed);
    let mut report = Report::new(&s.name);
    for op in &s.ops {
        match run_op(op, &mut ctx) {
            Ok(r) => report.push(r),
            Err(e) => {
                let abort = matches!(e, CliError::Core(Error::BudgetExceeded { .. }));
                report.push(Record::failure(op.name(), &e));
                if abort {
                    break;
                }
            }
        }
    }
    Ok(report)
}
