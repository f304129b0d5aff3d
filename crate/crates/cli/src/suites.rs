//! Seeded verification suites. Instances are drawn up front from one
//! ChaCha stream per suite, so the records do not depend on `--jobs`.

use std::fmt;
use std::str::FromStr;

use growthlab_core::approx::{
    freiman_image_certificate, greedy_cover_certificate, is_freiman_hom, plunnecke_check, slicing_cover,
    sum_difference, ApproxCertificate, FreimanMap,
};
use growthlab_core::covering::{check_chang_containment, check_ruzsa_containment, chang_cover, ruzsa_cover, Arrangement, CHANG_C0};
use growthlab_core::oracle::{derive_sanders_cover, find_coset_progression, OracleOptions};
use growthlab_core::pipeline::{corollary_covers, decompose, step_reduction, Corollary};
use growthlab_core::{Budget, Element, GSet, Group};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::recipe::random_symmetric;
use crate::report::{Record, Report};
use crate::scenario::{decomposition_passes, run_op, Context, Op};
use crate::CliError;

/// Largest power checked by the growth law.
pub const GROWTH_LAW_M: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Containment,
    Ruzsa,
    Chang,
    Plunnecke,
    Slicing,
    Freiman,
    Micro,
    Pipeline,
    Corollary,
    Oracle,
    All,
}

impl Suite {
    pub const EACH: [Suite; 10] = [
        Suite::Containment,
        Suite::Ruzsa,
        Suite::Chang,
        Suite::Plunnecke,
        Suite::Slicing,
        Suite::Freiman,
        Suite::Micro,
        Suite::Pipeline,
        Suite::Corollary,
        Suite::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Containment => "containment",
            Suite::Ruzsa => "ruzsa",
            Suite::Chang => "chang",
            Suite::Plunnecke => "plunnecke",
            Suite::Slicing => "slicing",
            Suite::Freiman => "freiman",
            Suite::Micro => "micro",
            Suite::Pipeline => "pipeline",
            Suite::Corollary => "corollary",
            Suite::Oracle => "oracle",
            Suite::All => "all",
        }
    }

    /// Mixed into the seed so suites draw independent streams.
    fn tag(self) -> u64 {
        (Suite::EACH.iter().position(|&s| s == self).unwrap_or(99) as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Suite::EACH
            .iter()
            .chain([&Suite::All])
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| CliError::Scenario(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub budget: Budget,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            budget: Budget::default(),
            seed: 0,
            jobs: 1,
        }
    }
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<Report, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ suite.tag());
    let records = match suite {
        Suite::All => {
            let mut report = Report::new("all");
            for s in Suite::EACH {
                report.extend(run_suite(s, opts)?);
            }
            return Ok(report);
        }
        Suite::Containment => run_cases(opts, containment_cases(), containment_case)?,
        Suite::Ruzsa => run_cases(opts, pair_cases(&mut rng, 100)?, ruzsa_case)?,
        Suite::Chang => run_cases(opts, chang_cases(&mut rng, 50)?, chang_case)?,
        Suite::Plunnecke => run_cases(opts, plunnecke_cases(&mut rng, 200)?, plunnecke_case)?,
        Suite::Slicing => run_cases(opts, pair_cases(&mut rng, 50)?, slicing_case)?,
        Suite::Freiman => run_cases(opts, freiman_cases(&mut rng, 20)?, freiman_case)?,
        Suite::Micro => run_cases(opts, micro_cases()?, micro_case)?,
        Suite::Pipeline => run_cases(opts, pipeline_cases()?, pipeline_case)?,
        Suite::Corollary => run_cases(opts, corollary_cases()?, corollary_case)?,
        Suite::Oracle => run_cases(opts, oracle_cases(&mut rng, 50)?, oracle_case)?,
    };
    let mut report = Report::new(suite.name());
    for r in records {
        report.push(r);
    }
    Ok(report)
}

/// Evaluate cases on a pool of `opts.jobs` threads, keeping case order.
/// A failing case becomes a failure record.
fn run_cases<T: Sync>(
    opts: &SuiteOptions,
    cases: Vec<(String, T)>,
    f: fn(&T, &Budget) -> Result<Vec<Record>, CliError>,
) -> Result<Vec<Record>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| CliError::Scenario(e.to_string()))?;
    let budget = opts.budget;
    let per_case: Vec<Vec<Record>> = pool.install(|| {
        cases
            .par_iter()
            .map(|(label, case)| match f(case, &budget) {
                Ok(records) => records.into_iter().map(|r| labelled(r, label)).collect(),
                Err(e) => vec![labelled(Record::failure("case", &e), label)],
            })
            .collect()
    });
    Ok(per_case.into_iter().flatten().collect())
}

fn labelled(mut r: Record, label: &str) -> Record {
    match &mut r.data {
        serde_json::Value::Object(map) => {
            map.insert("case".into(), label.into());
        }
        other => {
            *other = json!({ "case": label, "value": other.clone() });
        }
    }
    r
}

fn growth_law(cert: &ApproxCertificate, budget: &Budget, which: &str) -> Result<Record, CliError> {
    let report = cert.growth_law(GROWTH_LAW_M, budget)?;
    Ok(Record::new(
        "growth-law",
        report.pass,
        json!({ "set": which, "report": report }),
    ))
}

fn residue(g: &Group, coords: &[i64]) -> Element {
    let moduli = g.descriptor().coordinate_moduli();
    let reduced: Vec<i64> = coords
        .iter()
        .zip(&moduli)
        .map(|(&x, &m)| if m == 0 { x } else { x.rem_euclid(m as i64) })
        .collect();
    g.canonical(&Element::new(&reduced))
}

/// Symmetric sets of odd size containing the identity: random, an
/// arithmetic progression, or a progression with a little noise.
fn sample_set(rng: &mut ChaCha8Rng, g: &Group) -> Result<GSet, CliError> {
    let order = g.order().expect("suites use finite groups") as usize;
    let cyclic = g.arity() == 1;
    match rng.gen_range(0..3) {
        0 if cyclic => {
            let l = rng.gen_range(2..=(order / 4).clamp(2, 20)) as i64;
            let d = rng.gen_range(1..order as i64);
            Ok(GSet::new(g, (-l..=l).map(|i| residue(g, &[i * d])))?)
        }
        1 if cyclic => {
            let l = rng.gen_range(2..=(order / 4).clamp(2, 12)) as i64;
            let d = rng.gen_range(1..order as i64);
            let mut e: Vec<Element> = (-l..=l).map(|i| residue(g, &[i * d])).collect();
            for _ in 0..2 {
                let x = rng.gen_range(0..order as i64);
                e.push(residue(g, &[x]));
                e.push(residue(g, &[-x]));
            }
            Ok(GSet::new(g, e)?)
        }
        _ => {
            let size = 2 * rng.gen_range(1..=15usize.min((order - 1) / 4).max(1)) + 1;
            random_symmetric(g, size, 10, rng)
        }
    }
}

/// `ℤ_n` with `n ≤ 997`, or Heisenberg mod 5 one time in four.
fn sample_group(rng: &mut ChaCha8Rng) -> Result<Group, CliError> {
    let spec = if rng.gen_range(0..4) == 0 {
        "ut:3:5".to_string()
    } else {
        format!("ab:{}", rng.gen_range(11..=997))
    };
    Ok(Group::parse(&spec)?)
}

fn pair_cases(rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<(String, (GSet, GSet))>, CliError> {
    (0..count)
        .map(|i| {
            let g = sample_group(rng)?;
            let a = sample_set(rng, &g)?;
            let b = sample_set(rng, &g)?;
            Ok((format!("{i}: {g} |A|={} |B|={}", a.len(), b.len()), (a, b)))
        })
        .collect()
}

fn ruzsa_case((a, b): &(GSet, GSet), budget: &Budget) -> Result<Vec<Record>, CliError> {
    let cover = ruzsa_cover(a, b, budget)?;
    let contained = check_ruzsa_containment(a, &cover.x, b, budget)?;
    let pass = cover.verified && contained && cover.x.len() <= cover.ratio_bound;
    Ok(vec![Record::new(
        "ruzsa",
        pass,
        json!({
            "a_size": a.len(),
            "b_size": b.len(),
            "ab_size": cover.ab_size,
            "x_size": cover.x.len(),
            "ratio_bound": cover.ratio_bound,
            "contained": contained,
        }),
    )])
}

fn slicing_case((a, b): &(GSet, GSet), budget: &Budget) -> Result<Vec<Record>, CliError> {
    let ca = greedy_cover_certificate(a, budget)?;
    let cb = greedy_cover_certificate(b, budget)?;
    let mut out = vec![growth_law(&ca, budget, "A")?, growth_law(&cb, budget, "B")?];
    for (m, n) in [(2, 2), (3, 2)] {
        let cover = slicing_cover(&ca, &cb, m, n, budget)?;
        let pass = cover.verified && cover.count as f64 <= cover.bound;
        out.push(Record::new("slicing", pass, cover));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
enum ChangB {
    /// `B = A^m`.
    Power,
    /// A third of `A`, containing the identity.
    Third(u64),
    Identity,
}

fn chang_cases(rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<(String, (GSet, usize, ChangB))>, CliError> {
    (0..count)
        .map(|i| {
            let g = sample_group(rng)?;
            let a = sample_set(rng, &g)?;
            let m = rng.gen_range(1..=2);
            let b = match rng.gen_range(0..3) {
                0 => ChangB::Power,
                1 => ChangB::Third(rng.gen()),
                _ => ChangB::Identity,
            };
            Ok((format!("{i}: {g} |A|={} m={m} B={b:?}", a.len()), (a, m, b)))
        })
        .collect()
}

fn chang_case((a, m, which): &(GSet, usize, ChangB), budget: &Budget) -> Result<Vec<Record>, CliError> {
    let cert = greedy_cover_certificate(a, budget)?;
    let g = a.group();
    let b = match which {
        ChangB::Power => a.power(*m, budget)?,
        ChangB::Third(seed) => {
            let mut r = ChaCha8Rng::seed_from_u64(*seed);
            let mut e = vec![g.identity()];
            e.extend(a.iter().filter(|x| !x.is_zero() && r.gen_ratio(1, 3)).cloned());
            GSet::new(g, e)?
        }
        ChangB::Identity => GSet::identity(g),
    };
    let cover = chang_cover(&cert, &b, *m, Arrangement::InversesLeft, CHANG_C0, budget)?;
    let contained = check_chang_containment(&cover, a, &b, budget)?;
    let sizes_ok = cover.s.iter().all(|s| s.len() <= 2 * cover.k_upper);
    let pass = cover.verified && contained && sizes_ok && cover.t <= cover.t_bound;
    Ok(vec![
        growth_law(&cert, budget, "A")?,
        Record::new(
            "chang",
            pass,
            json!({ "m": m, "a_size": a.len(), "b_size": b.len(), "cover": cover.report(), "sizes_ok": sizes_ok, "contained": contained }),
        ),
    ])
}

fn plunnecke_cases(rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<(String, GSet)>, CliError> {
    (0..count)
        .map(|i| {
            let n = rng.gen_range(11..=997i64);
            let g = Group::parse(&format!("ab:{n}"))?;
            let size = rng.gen_range(1..=((n as usize) / 8).min(25));
            let a = if rng.gen_bool(0.5) {
                let mut e = Vec::new();
                while e.len() < size {
                    let x = residue(&g, &[rng.gen_range(0..n)]);
                    if !e.contains(&x) {
                        e.push(x);
                    }
                }
                GSet::new(&g, e)?
            } else {
                let d = rng.gen_range(1..n);
                let s = rng.gen_range(0..n);
                GSet::new(&g, (0..size as i64).map(|i| residue(&g, &[s + i * d])))?
            };
            Ok((format!("{i}: {g} |A|={}", a.len()), a))
        })
        .collect()
}

fn plunnecke_case(a: &GSet, budget: &Budget) -> Result<Vec<Record>, CliError> {
    let mut checks = Vec::new();
    for total in 1..=5 {
        for m in 0..=total {
            checks.push(plunnecke_check(a, m, total - m, budget)?);
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(vec![Record::new("plunnecke", pass, json!({ "checks": checks }))])
}

/// A centred linear map on a box `{−L..L}^d ⊆ ℤ_N^d` with `N > 6L`, so
/// triple sums never wrap and any linear map to `ℤ_M` lifts.
struct FreimanCase {
    domain: GSet,
    target: Group,
    coeffs: Vec<i64>,
}

fn freiman_cases(rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<(String, FreimanCase)>, CliError> {
    (0..count)
        .map(|i| {
            let d = if i % 2 == 0 { 1 } else { 2 };
            let l = if d == 1 { rng.gen_range(2..=8i64) } else { rng.gen_range(1..=2i64) };
            let n = 6 * l + 1 + rng.gen_range(0..10i64);
            let src = Group::parse(&format!("ab:{}", vec![n.to_string(); d].join(",")))?;
            let m = rng.gen_range(5..=200i64);
            let target = Group::parse(&format!("ab:{m}"))?;
            let coeffs: Vec<i64> = (0..d).map(|_| rng.gen_range(0..m)).collect();
            let mut e = Vec::new();
            if d == 1 {
                for x in -l..=l {
                    e.push(residue(&src, &[x]));
                }
            } else {
                for x in -l..=l {
                    for y in -l..=l {
                        e.push(residue(&src, &[x, y]));
                    }
                }
            }
            let domain = GSet::new(&src, e)?;
            let label = format!("{i}: {src} -> {target} L={l} c={coeffs:?}");
            Ok((label, FreimanCase { domain, target, coeffs }))
        })
        .collect()
}

fn freiman_case(c: &FreimanCase, budget: &Budget) -> Result<Vec<Record>, CliError> {
    let src = c.domain.group().clone();
    let moduli = src.descriptor().coordinate_moduli();
    let m = c.target.descriptor().coordinate_moduli()[0] as i64;
    let lift = |e: &Element| -> Element {
        let total: i64 = e
            .0
            .iter()
            .zip(&moduli)
            .zip(&c.coeffs)
            .map(|((&x, &n), &k)| {
                let x = if x > n as i64 / 2 { x - n as i64 } else { x };
                x * k
            })
            .sum();
        Element::new(&[total.rem_euclid(m)])
    };
    let f = FreimanMap::new(c.domain.clone(), &c.target, 3, lift)?;
    let hom = is_freiman_hom(&f, budget)?;
    let inverses = c
        .domain
        .iter()
        .all(|a| f.apply(&src.inv(a)) == Some(&c.target.inv(f.apply(a).expect("in domain"))));
    let cert = greedy_cover_certificate(&c.domain, budget)?;
    let image = freiman_image_certificate(&f, &cert, budget)?;
    let pass = hom && inverses && image.k_upper() <= cert.k_upper();
    Ok(vec![
        growth_law(&cert, budget, "A")?,
        growth_law(&image, budget, "f(A)")?,
        Record::new(
            "freiman",
            pass,
            json!({
                "homomorphism": hom,
                "inverses": inverses,
                "source_k_upper": cert.k_upper(),
                "image_k_upper": image.k_upper(),
                "image_size": image.a().len(),
            }),
        ),
    ])
}

fn micro_cases() -> Result<Vec<(String, GSet)>, CliError> {
    ["ut:3:3", "ut:3:5"]
        .iter()
        .map(|spec| {
            let g = Group::parse(spec)?;
            Ok((format!("{g} whole"), GSet::whole(&g, &Budget::default())?))
        })
        .collect()
}

fn micro_case(a: &GSet, budget: &Budget) -> Result<Vec<Record>, CliError> {
    let mut ctx = Context::for_set(a.clone(), *budget, 0);
    Ok(vec![
        run_op(&Op::Section, &mut ctx)?,
        run_op(&Op::Pullback { m: 1 }, &mut ctx)?,
        run_op(&Op::Pullback { m: 2 }, &mut ctx)?,
    ])
}

fn containment_cases() -> Vec<(String, Vec<u64>)> {
    vec![("ut:3:0 L=(1,1)".into(), vec![1, 1]), ("ut:3:0 L=(2,2)".into(), vec![2, 2])]
}

fn containment_case(bounds: &Vec<u64>, budget: &Budget) -> Result<Vec<Record>, CliError> {
    let g = Group::parse("ut:3:0")?;
    let mut ctx = Context::new(Some(g), None, *budget, 0);
    let op = Op::Containment {
        gens: None,
        bounds: bounds.clone(),
        step: Some(2),
    };
    Ok(vec![run_op(&op, &mut ctx)?])
}

/// Radius-one symmetric balls in Heisenberg mod 3, mod 5 and over `ℤ`.
pub fn pipeline_instances() -> Result<Vec<GSet>, CliError> {
    ["ut:3:3", "ut:3:5", "ut:3:0"]
        .iter()
        .map(|spec| {
            let g = Group::parse(spec)?;
            let mut e = vec![g.identity()];
            for x in g.standard_generators() {
                e.push(g.inv(&x));
                e.push(x);
            }
            Ok(GSet::new(&g, e)?)
        })
        .collect()
}

fn pipeline_cases() -> Result<Vec<(String, GSet)>, CliError> {
    Ok(pipeline_instances()?
        .into_iter()
        .map(|a| (format!("{} ball", a.group()), a))
        .collect())
}

fn pipeline_case(a: &GSet, budget: &Budget) -> Result<Vec<Record>, CliError> {
    let cert = greedy_cover_certificate(a, budget)?;
    let mut out = vec![growth_law(&cert, budget, "A")?];
    if a.group().is_finite() {
        let red = step_reduction(&cert, &cert, 1, budget)?;
        for (i, f) in red.factors.iter().enumerate() {
            out.push(growth_law(f, budget, &format!("A_{i}"))?);
        }
    }
    let d = decompose(&cert, budget)?;
    let torsion_free_ok = !a.group().is_torsion_free() || d.h.len() == 1;
    let pass = decomposition_passes(&d) && torsion_free_ok;
    out.push(Record::new("decompose", pass, d.report()));
    Ok(out)
}

/// The finite pipeline instances; over `ℤ` the concatenated progression is
/// far beyond any element budget.
fn corollary_cases() -> Result<Vec<(String, GSet)>, CliError> {
    Ok(pipeline_cases()?
        .into_iter()
        .filter(|(_, a)| a.group().is_finite())
        .collect())
}

fn corollary_case(a: &GSet, budget: &Budget) -> Result<Vec<Record>, CliError> {
    let cert = greedy_cover_certificate(a, budget)?;
    let d = decompose(&cert, budget)?;
    [Corollary::Ruzsa, Corollary::Chang]
        .into_iter()
        .map(|which| {
            let c = corollary_covers(&d, &cert, which, budget)?;
            Ok(Record::new("corollary", c.contained, c.report()))
        })
        .collect()
}

fn oracle_cases(rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<(String, GSet)>, CliError> {
    (0..count)
        .map(|i| {
            let spec = match rng.gen_range(0..3) {
                0 => format!("ab:{},{}", rng.gen_range(2..=12), rng.gen_range(2..=12)),
                _ => format!("ab:{}", rng.gen_range(11..=997)),
            };
            let g = Group::parse(&spec)?;
            let a = sample_set(rng, &g)?;
            Ok((format!("{i}: {g} |A|={}", a.len()), a))
        })
        .collect()
}

fn oracle_case(a: &GSet, budget: &Budget) -> Result<Vec<Record>, CliError> {
    let res = find_coset_progression(a, &OracleOptions::default(), budget)?;
    let d = sum_difference(a, 2, 2, budget)?;
    let contained = res.best.realized.is_subset(&d);
    let cert = greedy_cover_certificate(a, budget)?;
    let cover = derive_sanders_cover(a, &res, Some(cert.k_upper()), budget)?;
    let k = cert.k_upper() as f64;
    let k_ok = cover.h2p_size as f64 <= k.powi(8) * a.len() as f64;
    Ok(vec![
        growth_law(&cert, budget, "A")?,
        Record::new(
            "oracle",
            contained,
            json!({ "oracle": res.report(), "d_size": d.len(), "density": res.density() }),
        ),
        Record::new("sanders", cover.pass && k_ok, json!({ "a_size": a.len(), "cover": cover })),
    ])
}
