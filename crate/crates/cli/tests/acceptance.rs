//! Acceptance criteria 1–11, run in order on one thread so the timings are
//! not shared with other tests. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::time::{Duration, Instant};

use growthlab::report::{Record, Report};
use growthlab::suites::{run_suite, Suite, SuiteOptions};
use growthlab_core::approx::{greedy_cover_certificate, ApproxCertificate};
use growthlab_core::pipeline::{corollary_covers, decompose, step_reduction, Corollary, Decomposition};
use growthlab_core::progressions::{containment_exponent, hall_basis, ProgressionKind, ProgressionSpec};
use growthlab_core::{Budget, GSet, Group};
use num_rational::Ratio;
use serde_json::Value;

const CONTAINMENT_LIMIT: Duration = Duration::from_secs(1);
const RUZSA_LIMIT: Duration = Duration::from_secs(30);
const CHANG_LIMIT: Duration = Duration::from_secs(60);
const PLUNNECKE_LIMIT: Duration = Duration::from_secs(60);
const SLICING_LIMIT: Duration = Duration::from_secs(60);
const FREIMAN_LIMIT: Duration = Duration::from_secs(10);
const MICRO_LIMIT: Duration = Duration::from_secs(10);
const DECOMPOSE_LIMIT: Duration = Duration::from_secs(120);
const COROLLARY_LIMIT: Duration = Duration::from_secs(60);
const ORACLE_LIMIT: Duration = Duration::from_secs(120);

/// Relative slack when comparing a recomputed float bound.
const FLOAT_SLACK: f64 = 1e-9;

/// Absolute tolerance on the locked oracle densities.
const DENSITY_TOLERANCE: f64 = 1e-12;

/// `|H + P| / |A|` for the 50 oracle instances at seed 0.
const ORACLE_DENSITIES: [f64; 50] = [
    13.066666666666666, 3.4, 1.0, 3.347826086956522, 12.84, 45.705882352941174, 3.0, 6.428571428571429,
    6.913043478260869, 5.0, 27.096774193548388, 19.533333333333335, 27.11111111111111, 2.0, 4.068965517241379,
    10.238095238095237, 3.076923076923077, 5.142857142857143, 12.105263157894736, 3.909090909090909,
    3.914285714285714, 2.8823529411764706, 3.926829268292683, 20.44, 4.2, 3.6666666666666665, 1.0,
    3.4285714285714284, 7.111111111111111, 27.565217391304348, 7.947368421052632, 3.914285714285714,
    35.470588235294116, 2.142857142857143, 26.23076923076923, 3.5714285714285716, 8.285714285714286,
    3.769230769230769, 3.926829268292683, 3.5714285714285716, 1.0, 10.0, 4.0, 5.588235294117647, 3.0,
    9.619047619047619, 3.857142857142857, 1.1428571428571428, 5.0, 3.909090909090909,
];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: Vec<String>, summary: String) -> Self {
        if failures.is_empty() {
            Outcome { pass: true, detail: summary }
        } else {
            let shown: Vec<&str> = failures.iter().take(3).map(String::as_str).collect();
            Outcome {
                pass: false,
                detail: format!("{summary}; {} failure(s): {}", failures.len(), shown.join(" | ")),
            }
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn check_time(failures: &mut Vec<String>, what: &str, took: Duration, limit: Duration) {
    if took >= limit {
        failures.push(format!("{what} took {took:.2?}, limit {limit:?}"));
    }
}

fn suite(s: Suite) -> (Report, Duration) {
    let (r, t) = timed(|| run_suite(s, &SuiteOptions::default()));
    (r.unwrap_or_else(|e| panic!("suite {s} failed to run: {e}")), t)
}

fn records<'a>(r: &'a Report, op: &'a str) -> impl Iterator<Item = &'a Record> {
    r.records.iter().filter(move |x| x.op == op)
}

fn case(r: &Record) -> String {
    let label = r.data.get("case").and_then(Value::as_str).unwrap_or("?");
    match &r.error {
        Some(e) => format!("{label}: {e}"),
        None => label.to_string(),
    }
}

fn u(v: &Value, key: &str) -> u64 {
    v[key].as_u64().unwrap_or_else(|| panic!("missing integer `{key}` in {v}"))
}

fn f(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing number `{key}` in {v}"))
}

fn failed_records(r: &Report) -> Vec<String> {
    r.records.iter().filter(|x| !x.pass).map(case).collect()
}

fn heisenberg_chain(bounds: [u64; 2]) -> growthlab_core::Result<growthlab_core::progressions::ContainmentReport> {
    let g = Group::parse("ut:3:0")?;
    let gens = g.standard_generators();
    let spec = ProgressionSpec::new(&g, ProgressionKind::Ordered, gens.clone(), bounds.to_vec(), 2)?;
    let basis = hall_basis(&g, &gens, 2)?;
    containment_exponent(&spec, &basis, &Budget::default())
}

fn criterion_1() -> Outcome {
    let mut fails = Vec::new();
    let bound = 192f64.powi(4) * 4.0;
    let (small, took) = timed(|| heisenberg_chain([1, 1]));
    check_time(&mut fails, "L=(1,1)", took, CONTAINMENT_LIMIT);
    match small {
        Ok(r) => {
            if (r.size_ord, r.size_nil, r.size_bar) != (9, 13, 27) {
                fails.push(format!("sizes {}/{}/{}", r.size_ord, r.size_nil, r.size_bar));
            }
            if !(r.ord_in_nil && r.nil_in_bar) {
                fails.push("L=(1,1) chain not contained".into());
            }
            if r.k_star != Some(3) || r.exponent_bound != bound {
                fails.push(format!("k*={:?}, bound {}", r.k_star, r.exponent_bound));
            }
        }
        Err(e) => fails.push(format!("L=(1,1): {e}")),
    }
    let (large, took_large) = timed(|| heisenberg_chain([2, 2]));
    let mut k_large = None;
    match large {
        Ok(r) => {
            k_large = r.k_star;
            if !(r.ord_in_nil && r.nil_in_bar) {
                fails.push("L=(2,2) chain not contained".into());
            }
            if r.k_star.is_none_or(|k| k as f64 > bound) {
                fails.push(format!("L=(2,2) k*={:?}", r.k_star));
            }
        }
        Err(e) => fails.push(format!("L=(2,2): {e}")),
    }
    Outcome::new(
        fails,
        format!("sizes 9/13/27, k*=3 ≤ {bound:e} in {took:.2?}; L=(2,2) k*={k_large:?} in {took_large:.2?}"),
    )
}

fn criterion_2(reports: &mut Vec<Report>) -> Outcome {
    let (r, took) = suite(Suite::Ruzsa);
    let mut fails = failed_records(&r);
    check_time(&mut fails, "suite", took, RUZSA_LIMIT);
    let rs: Vec<&Record> = records(&r, "ruzsa").collect();
    if rs.len() != 100 {
        fails.push(format!("{} instances", rs.len()));
    }
    for x in &rs {
        let d = &x.data;
        if d["contained"] != true || u(d, "x_size") > u(d, "ratio_bound") {
            fails.push(case(x));
        }
        // ⌈|AB|/|B|⌉ recomputed from the record.
        if u(d, "ratio_bound") != u(d, "ab_size").div_ceil(u(d, "b_size")) {
            fails.push(format!("{}: ratio bound", case(x)));
        }
    }
    let out = Outcome::new(fails, format!("{} instances in {took:.2?}", rs.len()));
    reports.push(r);
    out
}

fn criterion_3(reports: &mut Vec<Report>) -> Outcome {
    let (r, took) = suite(Suite::Chang);
    let mut fails = failed_records(&r);
    check_time(&mut fails, "suite", took, CHANG_LIMIT);
    let rs: Vec<&Record> = records(&r, "chang").collect();
    if rs.len() != 50 {
        fails.push(format!("{} instances", rs.len()));
    }
    let mut max_t = 0;
    for x in &rs {
        let d = &x.data;
        let cover = &d["cover"];
        let k = u(cover, "k_upper");
        let t = u(cover, "t");
        max_t = max_t.max(t);
        let c = u(d, "a_size") as f64 / u(d, "b_size") as f64;
        let t_bound = (8.0 * (c.ln() + u(d, "m") as f64 * (k as f64).ln() + 1.0)).ceil().max(1.0) as u64;
        let sizes_ok = cover["s_sizes"].as_array().unwrap().iter().all(|s| s.as_u64().unwrap() <= 2 * k);
        if !sizes_ok || d["contained"] != true || t > t_bound || u(cover, "t_bound") != t_bound {
            fails.push(case(x));
        }
    }
    let out = Outcome::new(fails, format!("{} instances, max t = {max_t}, in {took:.2?}", rs.len()));
    reports.push(r);
    out
}

fn criterion_4(reports: &mut Vec<Report>) -> Outcome {
    let (r, took) = suite(Suite::Plunnecke);
    let mut fails = failed_records(&r);
    check_time(&mut fails, "suite", took, PLUNNECKE_LIMIT);
    let rs: Vec<&Record> = records(&r, "plunnecke").collect();
    if rs.len() != 200 {
        fails.push(format!("{} instances", rs.len()));
    }
    let mut checks = 0;
    for x in &rs {
        let list = x.data["checks"].as_array().unwrap();
        let mut pairs: Vec<(u64, u64)> = Vec::new();
        for c in list {
            let (m, n) = (u(c, "m"), u(c, "n"));
            pairs.push((m, n));
            let bound = f(c, "doubling").powi((m + n) as i32) * u(c, "size") as f64;
            if u(c, "lhs") as f64 > bound * (1.0 + FLOAT_SLACK) {
                fails.push(format!("{}: m={m} n={n}", case(x)));
            }
            checks += 1;
        }
        let expected: Vec<(u64, u64)> = (1..=5u64).flat_map(|t| (0..=t).map(move |m| (m, t - m))).collect();
        if pairs != expected {
            fails.push(format!("{}: checked {pairs:?}", case(x)));
        }
    }
    let out = Outcome::new(fails, format!("{} instances, {checks} inequalities, in {took:.2?}", rs.len()));
    reports.push(r);
    out
}

fn criterion_5(reports: &mut Vec<Report>) -> Outcome {
    let (r, took) = suite(Suite::Slicing);
    let mut fails = failed_records(&r);
    check_time(&mut fails, "suite", took, SLICING_LIMIT);
    let rs: Vec<&Record> = records(&r, "slicing").collect();
    if rs.len() != 100 {
        fails.push(format!("{} covers", rs.len()));
    }
    for x in &rs {
        let d = &x.data;
        if d["verified"] != true || u(d, "count") as f64 > f(d, "bound") {
            fails.push(case(x));
        }
    }
    let out = Outcome::new(fails, format!("50 instances × (2,2),(3,2) in {took:.2?}"));
    reports.push(r);
    out
}

fn criterion_6(reports: &mut Vec<Report>) -> Outcome {
    let (r, took) = suite(Suite::Freiman);
    let mut fails = failed_records(&r);
    check_time(&mut fails, "suite", took, FREIMAN_LIMIT);
    let rs: Vec<&Record> = records(&r, "freiman").collect();
    if rs.len() != 20 {
        fails.push(format!("{} maps", rs.len()));
    }
    for x in &rs {
        let d = &x.data;
        if d["homomorphism"] != true || d["inverses"] != true || u(d, "image_k_upper") > u(d, "source_k_upper") {
            fails.push(case(x));
        }
    }
    let out = Outcome::new(fails, format!("{} maps in {took:.2?}", rs.len()));
    reports.push(r);
    out
}

fn criterion_7(reports: &mut Vec<Report>) -> Outcome {
    let (r, took) = suite(Suite::Micro);
    let mut fails = failed_records(&r);
    check_time(&mut fails, "suite", took, MICRO_LIMIT);
    let sections: Vec<&Record> = records(&r, "section").collect();
    let pullbacks = records(&r, "pullback").count();
    // Whole group of order p³: every a, and every pair of image points.
    for (x, p) in sections.iter().zip([3u64, 5]) {
        let d = &x.data;
        if u(d, "checks_inverse") != p.pow(3) || u(d, "checks_product") != p.pow(4) {
            fails.push(format!("{}: not exhaustive", case(x)));
        }
    }
    if sections.len() != 2 || pullbacks != 4 {
        fails.push(format!("{} sections, {pullbacks} pullbacks", sections.len()));
    }
    let out = Outcome::new(fails, format!("mod 3 and mod 5, exhaustive, in {took:.2?}"));
    reports.push(r);
    out
}

fn ball(spec: &str) -> GSet {
    let g = Group::parse(spec).unwrap();
    let mut e = vec![g.identity()];
    for x in g.standard_generators() {
        e.push(g.inv(&x));
        e.push(x);
    }
    GSet::new(&g, e).unwrap()
}

struct PipelineRun {
    spec: &'static str,
    cert: ApproxCertificate,
    dec: Decomposition,
}

fn criterion_8(runs: &mut Vec<PipelineRun>, certs: &mut Vec<(String, ApproxCertificate)>) -> Outcome {
    let budget = Budget::default();
    let mut fails = Vec::new();
    let mut notes = Vec::new();
    for spec in ["ut:3:3", "ut:3:5", "ut:3:0"] {
        let a = ball(spec);
        let cert = greedy_cover_certificate(&a, &budget).unwrap();
        certs.push((format!("{spec} ball"), cert.clone()));
        let (dec, took) = timed(|| decompose(&cert, &budget));
        check_time(&mut fails, spec, took, DECOMPOSE_LIMIT);
        let dec = match dec {
            Ok(d) => d,
            Err(e) => {
                fails.push(format!("{spec}: {e}"));
                continue;
            }
        };
        if !dec.h_normal {
            fails.push(format!("{spec}: H not verified normal"));
        }
        if dec.witnesses_verified != a.len() {
            fails.push(format!("{spec}: {} of {} witnesses", dec.witnesses_verified, a.len()));
        }
        if a.group().is_finite() {
            if dec.expansion_verified != Some(true) {
                fails.push(format!("{spec}: AH ⊆ H∏pieces {:?}", dec.expansion_verified));
            }
            if dec.delta.is_none_or(|d| d <= Ratio::from_integer(0)) {
                fails.push(format!("{spec}: δ = {:?}", dec.delta));
            }
            if let Ok(red) = step_reduction(&cert, &cert, 1, &budget) {
                for (i, c) in red.factors.into_iter().enumerate() {
                    certs.push((format!("{spec} factor {i}"), c));
                }
            }
        } else if dec.h.len() != 1 {
            fails.push(format!("{spec}: |H| = {}", dec.h.len()));
        }
        let delta = dec.delta.map(|d| format!("{d}")).unwrap_or_else(|| "n/a".into());
        notes.push(format!("{spec} |H|={} δ={delta} {took:.1?}", dec.h.len()));
        runs.push(PipelineRun { spec, cert, dec });
    }
    Outcome::new(fails, notes.join(", "))
}

fn criterion_9(runs: &[PipelineRun]) -> Outcome {
    let budget = Budget::default();
    let mut fails = Vec::new();
    let finite: Vec<&PipelineRun> = runs.iter().filter(|r| r.dec.group().is_finite()).collect();
    if finite.len() != 2 {
        fails.push(format!("{} finite decompositions available", finite.len()));
    }
    let (_, took) = timed(|| {
        for run in &finite {
            for which in [Corollary::Ruzsa, Corollary::Chang] {
                match corollary_covers(&run.dec, &run.cert, which, &budget) {
                    Ok(c) => {
                        let bound_ok = match (&c.x, c.x_bound) {
                            (Some(x), Some(b)) => x.len() <= b,
                            _ => which == Corollary::Chang,
                        };
                        if !c.contained || !bound_ok {
                            fails.push(format!("{} {which}", run.spec));
                        }
                    }
                    Err(e) => fails.push(format!("{} {which}: {e}", run.spec)),
                }
            }
        }
    });
    check_time(&mut fails, "corollaries", took, COROLLARY_LIMIT);
    Outcome::new(fails, format!("ruzsa and chang on mod 3 and mod 5 in {took:.2?}"))
}

fn criterion_10() -> (Outcome, Report) {
    let (r, took) = suite(Suite::Oracle);
    let mut fails = failed_records(&r);
    check_time(&mut fails, "suite", took, ORACLE_LIMIT);
    let oracles: Vec<&Record> = records(&r, "oracle").collect();
    let sanders: Vec<&Record> = records(&r, "sanders").collect();
    if oracles.len() != 50 || sanders.len() != 50 {
        fails.push(format!("{} oracle / {} cover records", oracles.len(), sanders.len()));
    }
    for x in &oracles {
        if x.data["oracle"]["contained"] != true {
            fails.push(case(x));
        }
    }
    for x in &sanders {
        let cover = &x.data["cover"];
        let k = u(cover, "k_upper") as f64;
        let shape = k.powi(8) * u(&x.data, "a_size") as f64;
        if cover["contained"] != true || u(cover, "h2p_size") as f64 > shape {
            fails.push(case(x));
        }
    }
    let densities: Vec<f64> = oracles.iter().map(|x| f(&x.data, "density")).collect();
    let drift = densities
        .iter()
        .zip(ORACLE_DENSITIES)
        .filter(|(a, b)| (*a - b).abs() > DENSITY_TOLERANCE)
        .count();
    if densities.len() != ORACLE_DENSITIES.len() || drift > 0 {
        fails.push(format!("{drift} densities differ from the locked values"));
    }
    (Outcome::new(fails, format!("{} instances in {took:.2?}", oracles.len())), r)
}

fn criterion_11(reports: &[Report], certs: &[(String, ApproxCertificate)]) -> Outcome {
    let budget = Budget::default();
    let mut fails = Vec::new();
    let mut count = 0;
    for r in reports {
        for x in records(r, "growth-law") {
            count += 1;
            let rep = &x.data["report"];
            let k = u(rep, "k_upper") as u128;
            let sizes: Vec<u128> = rep["sizes"].as_array().unwrap().iter().map(|s| s.as_u64().unwrap() as u128).collect();
            let exact = sizes.len() == 5 && (1..5).all(|m| sizes[m] <= k.pow(m as u32) * sizes[0]);
            if !x.pass || !exact {
                fails.push(format!("{} {}", r.name, case(x)));
            }
        }
    }
    for (label, cert) in certs {
        count += 1;
        match cert.growth_law(5, &budget) {
            Ok(g) if g.pass => {}
            Ok(_) => fails.push(label.clone()),
            Err(e) => fails.push(format!("{label}: {e}")),
        }
    }
    if count == 0 {
        fails.push("no certificates seen".into());
    }
    Outcome::new(fails, format!("{count} certificates, m ≤ 5"))
}

fn main() {
    let names = [
        "nilprogression containment chain",
        "Ruzsa covering suite",
        "Chang covering suite",
        "Plünnecke suite",
        "constructive slicing",
        "Freiman image certificates",
        "section and pullback",
        "step-reduction decomposition",
        "corollary covers",
        "coset progression oracle",
        "growth law",
    ];
    let mut outcomes: Vec<Outcome> = Vec::new();
    let mut reports: Vec<Report> = Vec::new();
    let mut runs = Vec::new();
    let mut certs = Vec::new();

    let report_line = |i: usize, o: &Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{tag}] {}: {}", i + 1, names[i], o.detail);
    };

    outcomes.push(criterion_1());
    report_line(0, &outcomes[0]);
    let suites: [fn(&mut Vec<Report>) -> Outcome; 6] =
        [criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7];
    for (i, run) in suites.into_iter().enumerate() {
        let o = run(&mut reports);
        report_line(i + 1, &o);
        outcomes.push(o);
    }
    let o = criterion_8(&mut runs, &mut certs);
    report_line(7, &o);
    outcomes.push(o);
    let o = criterion_9(&runs);
    report_line(8, &o);
    outcomes.push(o);
    let (o, oracle_report) = criterion_10();
    report_line(9, &o);
    outcomes.push(o);
    reports.push(oracle_report);
    let o = criterion_11(&reports, &certs);
    report_line(10, &o);
    outcomes.push(o);

    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
