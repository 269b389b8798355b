//! One pass/fail line per acceptance criterion. Runs without the libtest harness
//! so the lines are always printed; exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use pcmap::analysis::{analyze, Analysis, AnalysisConfig};
use pcmap::billiard::{self, extract_return_map, Point};
use pcmap::census::{appendix_a_census, run_census, OrbitKind};
use pcmap::chains::verify_lemma;
use pcmap::conjugacy::{build_table, verify_half_slopes};
use pcmap::fuzz::{fuzz_generate, fuzz_generate_increasing, fuzz_scene};
use pcmap::gapflow::ResidualVerdict;
use pcmap::interval::pairwise_disjoint;
use pcmap::rational::{self, ratio, Rational};
use pcmap::{PiecewiseAffineContraction, SidedInterval};
use pcmap_cli::spec::{MapSpecFile, SceneSpecFile};

const FUZZ_PER_N: u64 = 500;
const K: usize = 24;
const L: usize = 60;
const SLOPE_DEPTH: usize = 40;
const SLOPE_PAIRS: usize = 100;
const SLOPE_FUZZ_MAPS: u64 = 50;
const APPENDIX_MAPS: u64 = 100;
const BILLIARD_SAMPLES: i64 = 256;
const BILLIARD_FUZZ_SCENES: u64 = 100;

struct Line {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    limit: Option<Duration>,
}

fn spec(name: &str) -> PiecewiseAffineContraction {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name);
    MapSpecFile::load(&path).unwrap().to_map().unwrap()
}

fn points(o: &[Rational]) -> Vec<String> {
    o.iter().map(rational::to_pq).collect()
}

fn criterion<F: FnOnce() -> (bool, String)>(
    id: usize,
    name: &'static str,
    limit: Option<Duration>,
    f: F,
) -> Line {
    let t = Instant::now();
    let (pass, detail) = f();
    let elapsed = t.elapsed();
    let pass = pass && limit.map_or(true, |l| elapsed <= l);
    let line = Line { id, name, pass, detail, elapsed, limit };
    print_line(&line);
    line
}

fn print_line(l: &Line) {
    let limit = l.limit.map(|d| format!(" / limit {}s", d.as_secs())).unwrap_or_default();
    println!(
        "criterion {:>2} {} {}: {} ({:.2}s{limit})",
        l.id,
        if l.pass { "PASS" } else { "FAIL" },
        l.name,
        l.detail,
        l.elapsed.as_secs_f64()
    );
}

fn c1() -> (bool, String) {
    let g = spec("map-g.json");
    let census = run_census(&g, 4).unwrap();
    let orbits: Vec<Vec<String>> = census.orbits.iter().map(|o| points(&o.points)).collect();
    let expected = vec![vec!["3/7".to_string()], vec!["1/54".to_string(), "16/27".to_string()]];
    let regular = census.orbits.iter().all(|o| o.kind == OrbitKind::Regular);
    let j = |orbit: usize, p: Rational| {
        census.regions[orbit].as_ref().and_then(|r| r.components.iter().find(|c| c.owner == p).map(|c| c.interval.clone()))
    };
    let j1 = j(0, ratio(3, 7));
    let j2 = j(1, ratio(16, 27));
    let ok = orbits == expected
        && regular
        && j1 == Some(SidedInterval::open(ratio(1, 4), ratio(1, 2)))
        && j2 == Some(SidedInterval::closed_open(ratio(1, 2), rational::one()));
    (
        ok,
        format!(
            "orbits {:?}, J(3/7) = {}, J(16/27) = {}",
            orbits,
            j1.map(|x| x.to_string()).unwrap_or_default(),
            j2.map(|x| x.to_string()).unwrap_or_default()
        ),
    )
}

struct Fuzzed {
    n: usize,
    seed: u64,
    analysis: Analysis,
}

fn fuzz_all() -> (Vec<Fuzzed>, Vec<String>) {
    let cfg = AnalysisConfig { max_period: K, depth: L, ..AnalysisConfig::default() };
    let jobs: Vec<(usize, u64)> = (2..=5).flat_map(|n| (0..FUZZ_PER_N).map(move |s| (n, s))).collect();
    let results: Vec<Result<Fuzzed, String>> = jobs
        .into_par_iter()
        .map(|(n, seed)| {
            let map = fuzz_generate(n, seed).map_err(|e| format!("n={n} seed={seed}: {e}"))?;
            let analysis = analyze(&map, &cfg).map_err(|e| format!("n={n} seed={seed}: {e}"))?;
            Ok(Fuzzed { n, seed, analysis })
        })
        .collect();
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(f) => ok.push(f),
            Err(e) => errors.push(e),
        }
    }
    (ok, errors)
}

fn c2(fuzzed: &[Fuzzed], errors: &[String]) -> (bool, String) {
    let bound = fuzzed.iter().filter(|f| !f.analysis.verdict.bound_ok).count();
    let lemma = fuzzed.iter().filter(|f| f.analysis.residual_verdict == ResidualVerdict::Violated).count();
    let inconclusive = fuzzed.iter().filter(|f| f.analysis.residual_verdict == ResidualVerdict::Inconclusive).count();
    let nonempty = fuzzed.iter().filter(|f| f.analysis.residual_verdict == ResidualVerdict::HoldsNonEmpty).count();
    let first_bad = fuzzed
        .iter()
        .find(|f| !f.analysis.verdict.bound_ok || f.analysis.residual_verdict == ResidualVerdict::Violated)
        .map(|f| format!(", first at n={} seed={}", f.n, f.seed))
        .unwrap_or_default();
    (
        bound == 0 && lemma == 0 && errors.is_empty() && inconclusive == 0,
        format!(
            "{} maps, m+d>n: {bound}, residual violations: {lemma}, non-empty residuals: {nonempty}, inconclusive: {inconclusive}, errors: {}{first_bad}",
            fuzzed.len(),
            errors.len()
        ),
    )
}

fn tight_family() -> Vec<(&'static str, PiecewiseAffineContraction)> {
    ["map-half.json", "map-g.json", "map-deg.json", "map-tri.json", "map-quad.json"]
        .into_iter()
        .map(|f| (f, spec(f)))
        .collect()
}

fn fixture_analyses() -> Vec<(&'static str, PiecewiseAffineContraction, Analysis)> {
    let cfg = AnalysisConfig { max_period: K, depth: L, ..AnalysisConfig::default() };
    ["map-half.json", "map-g.json", "map-deg.json", "map-inc.json", "map-tri.json", "map-quad.json"]
        .into_iter()
        .map(|f| {
            let m = spec(f);
            let a = analyze(&m, &cfg).unwrap();
            (f, m, a)
        })
        .collect()
}

fn c3(fixtures: &[(&'static str, PiecewiseAffineContraction, Analysis)]) -> (bool, String) {
    let mut per_n = Vec::new();
    let mut ok = true;
    let mut covered = BTreeSet::new();
    for (name, map) in tight_family() {
        let a = &fixtures.iter().find(|(f, _, _)| *f == name).unwrap().2;
        let tight = a.verdict.tight && a.violations().is_empty();
        ok &= tight;
        covered.insert(map.n());
        per_n.push(format!("{name}: n={} m={} d={}", map.n(), a.verdict.m, a.verdict.d));
    }
    ok &= covered == BTreeSet::from([1, 2, 3, 4]);
    (ok, per_n.join("; "))
}

fn c4(fixtures: &[(&'static str, PiecewiseAffineContraction, Analysis)], fuzzed: &[Fuzzed]) -> (bool, String) {
    let evidence: Vec<_> = fixtures
        .iter()
        .map(|(_, _, a)| a)
        .chain(fuzzed.iter().map(|f| &f.analysis))
        .filter_map(|a| a.verdict.asymptotically_periodic_evidence.as_ref())
        .collect();
    let failed = evidence.iter().filter(|e| !e.all_converged()).count();
    (
        failed == 0 && !evidence.is_empty(),
        format!("{} tight maps, 1000 seeds x 2000 steps each, maps with a non-converging seed: {failed}", evidence.len()),
    )
}

fn c5(fixtures: &[(&'static str, PiecewiseAffineContraction, Analysis)], fuzzed: &[Fuzzed]) -> (bool, String) {
    let all: Vec<&Analysis> = fixtures.iter().map(|(_, _, a)| a).chain(fuzzed.iter().map(|f| &f.analysis)).collect();
    let count = |p: fn(&Analysis) -> bool| all.iter().filter(|a| !p(a)).count();
    let e = count(|a| a.atlas_checks.e_disjoint_from_images);
    let b = count(|a| a.atlas_checks.b_bound_ok);
    let r = count(|a| a.atlas_checks.r_bound_ok);
    let d = count(|a| a.atlas_checks.layers_disjoint);
    let u = count(|a| a.atlas_checks.leftover_ok);
    let depth_ok = all.iter().all(|a| a.atlas.depth == L);
    (
        e + b + r + d + u == 0 && depth_ok,
        format!("{} maps at L={L}, failures: E-overlap {e}, |B| {b}, r {r}, layers {d}, uncovered {u}", all.len()),
    )
}

fn c6(fixtures: &[(&'static str, PiecewiseAffineContraction, Analysis)], fuzzed: &[Fuzzed]) -> (bool, String) {
    let all: Vec<&Analysis> = fixtures.iter().map(|(_, _, a)| a).chain(fuzzed.iter().map(|f| &f.analysis)).collect();
    let overlapping = all
        .iter()
        .filter(|a| {
            let parts: Vec<SidedInterval> =
                a.decomposition.manifolds.iter().flat_map(|w| w.open_intervals.iter().cloned()).collect();
            !pairwise_disjoint(&parts)
        })
        .count();
    let manifolds = |name: &str| -> Vec<Vec<String>> {
        let a = &fixtures.iter().find(|(f, _, _)| *f == name).unwrap().2;
        a.decomposition.manifolds.iter().map(|w| w.open_intervals.iter().map(|j| j.to_string()).collect()).collect()
    };
    let g = manifolds("map-g.json");
    let d = manifolds("map-deg.json");
    let ok = overlapping == 0
        && g == vec![vec!["(1/4, 1/2)".to_string()], vec!["(0, 1/4)".to_string(), "(1/2, 1)".to_string()]]
        && d == vec![vec!["(0, 3/4)".to_string(), "(3/4, 1)".to_string()]];
    (ok, format!("MAP-G {g:?}, MAP-DEG {d:?}, maps with overlapping manifolds: {overlapping} of {}", all.len()))
}

fn c7(fixtures: &[(&'static str, PiecewiseAffineContraction, Analysis)], fuzzed: &[Fuzzed]) -> (bool, String) {
    let all: Vec<&Analysis> = fixtures.iter().map(|(_, _, a)| a).chain(fuzzed.iter().map(|f| &f.analysis)).collect();
    let mut checked = 0;
    let mut uncertified = 0;
    let mut bad = 0;
    for a in &all {
        let dec = &a.decomposition;
        match (dec.beta_injective, dec.beta_image_size(), dec.degenerate_on_boundaries) {
            (Some(inj), Some(size), Some(on_boundary)) => {
                checked += 1;
                if !inj || size > a.verdict.n - a.verdict.d || !on_boundary {
                    bad += 1;
                }
            }
            _ => uncertified += 1,
        }
    }
    let residual_nonempty = all.iter().filter(|a| a.residual_verdict == ResidualVerdict::HoldsNonEmpty).count();
    (
        bad == 0 && checked > 0 && uncertified == residual_nonempty,
        format!(
            "beta checked on {checked} certified maps, failures: {bad}; skipped {uncertified} maps with a non-empty residual"
        ),
    )
}

fn c8() -> (bool, String) {
    let tol = ratio(1, 100_000);
    let mut maps: Vec<(String, PiecewiseAffineContraction)> =
        ["map-g.json", "map-deg.json", "map-inc.json"].iter().map(|f| (f.to_string(), spec(f))).collect();
    maps.extend((0..SLOPE_FUZZ_MAPS).map(|s| {
        let n = 2 + (s as usize % 4);
        (format!("fuzz n={n} seed={s}"), fuzz_generate(n, s).unwrap())
    }));
    let results: Vec<(String, Result<(bool, f64), String>)> = maps
        .par_iter()
        .map(|(name, m)| {
            let r = build_table(m, SLOPE_DEPTH, 0)
                .and_then(|t| verify_half_slopes(m, &t, SLOPE_PAIRS, &tol))
                .map(|r| (r.all_within_tol(), rational::to_f64(&r.worst_deviation())))
                .map_err(|e| e.to_string());
            (name.clone(), r)
        })
        .collect();
    let failed: Vec<&String> =
        results.iter().filter(|(_, r)| !matches!(r, Ok((true, _)))).map(|(n, _)| n).collect();
    let worst = results.iter().filter_map(|(_, r)| r.as_ref().ok().map(|x| x.1)).fold(0.0, f64::max);
    (
        failed.is_empty(),
        format!("{} maps at L={SLOPE_DEPTH}, tol 1e-5, worst deviation {worst:.2e}, failed: {failed:?}", results.len()),
    )
}

fn c9() -> (bool, String) {
    match verify_lemma(5, 7) {
        Ok(r) => (
            r.is_clean(),
            format!(
                "{} chains, max #S per s {:?}, bound exceptions {}, characterization exceptions {}",
                r.total_chains(),
                r.max_coordinates_per_s,
                r.bound_violations.len(),
                r.characterization_violations.len()
            ),
        ),
        Err(e) => (false, e.to_string()),
    }
}

fn c10() -> (bool, String) {
    let results: Vec<Result<bool, String>> = (0..APPENDIX_MAPS)
        .into_par_iter()
        .map(|s| {
            let n = 1 + (s as usize % 5);
            let m = fuzz_generate_increasing(n, s).map_err(|e| e.to_string())?;
            let fast = appendix_a_census(&m, K).map_err(|e| format!("seed {s}: {e}"))?;
            let general = run_census(&m, K).map_err(|e| e.to_string())?;
            let a: Vec<&Vec<Rational>> = fast.iter().map(|e| &e.orbit.points).collect();
            let b: Vec<&Vec<Rational>> = general.orbits.iter().map(|o| &o.points).collect();
            Ok(a == b && general.orbits.iter().all(|o| o.kind == OrbitKind::Regular))
        })
        .collect();
    let disagree = results.iter().filter(|r| !matches!(r, Ok(true))).count();
    (disagree == 0, format!("{} maps, disagreements or non-injective alpha: {disagree}", results.len()))
}

fn c11() -> (bool, String) {
    let scene = billiard::right_triangle_bottom_field();
    let d = Point::ints(1, 1);
    let mut chart_mismatch = 0;
    for k in 0..BILLIARD_SAMPLES {
        let t = ratio(k, BILLIARD_SAMPLES);
        let expected = Point::new((rational::one() + &t) / rational::int(2), (rational::one() - &t) / rational::int(2));
        match scene.first_return_chart(0, &t, &d) {
            Ok((1, mu)) if scene.point(1, &mu) == expected => {}
            _ => chart_mismatch += 1,
        }
    }
    let ex = extract_return_map(&scene).unwrap();
    let bottom = &ex.pieces[0].domain;
    let mut map_mismatch = 0;
    for k in 0..BILLIARD_SAMPLES {
        let q = &bottom.lo + (&bottom.hi - &bottom.lo) * ratio(k, BILLIARD_SAMPLES);
        if scene.first_return(&q).ok() != ex.evaluate(&q) {
            map_mismatch += 1;
        }
    }
    let law_ok = ex.chart_laws[0].mu_slope == ratio(-1, 2) && ex.chart_laws[0].mu_intercept == ratio(1, 2);

    let mut scenes = vec![billiard::right_triangle_full_field()];
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs");
    for f in ["right-triangle.json", "triangle-345.json"] {
        scenes.push(SceneSpecFile::load(&path.join(f)).unwrap().to_scene().unwrap());
    }
    scenes.extend((0..BILLIARD_FUZZ_SCENES).filter_map(|s| fuzz_scene(s).ok()));
    let extracts: Vec<_> = scenes.iter().filter_map(|s| extract_return_map(s).ok()).collect();
    let emitted: Vec<&PiecewiseAffineContraction> = extracts.iter().filter_map(|e| e.map.as_ref()).collect();
    let over_bound = emitted
        .par_iter()
        .filter(|m| run_census(m, K).map(|c| c.m() + c.d() > m.n()).unwrap_or(true))
        .count();
    let exact_emitted = extracts.iter().filter(|e| e.map.is_some() && !e.approximate).count();
    (
        chart_mismatch == 0 && map_mismatch == 0 && law_ok && over_bound == 0 && exact_emitted > 0,
        format!(
            "chart mismatches {chart_mismatch}/{BILLIARD_SAMPLES}, normalized mismatches {map_mismatch}/{BILLIARD_SAMPLES} (approximate arclength), \
             contractive extracts {} ({exact_emitted} exact), over the bound: {over_bound}",
            emitted.len()
        ),
    )
}

fn main() {
    let mut lines = Vec::new();
    lines.push(criterion(1, "two-piece example reproduction", Some(Duration::from_secs(1)), c1));
    let mut shared = None;
    lines.push(criterion(2, "counting bound, fuzzed", Some(Duration::from_secs(300)), || {
        let (fuzzed, errors) = fuzz_all();
        let r = c2(&fuzzed, &errors);
        shared = Some(fuzzed);
        r
    }));
    let fuzzed = shared.expect("criterion 2 ran");
    let fixtures = fixture_analyses();
    lines.push(criterion(3, "tightness family", None, || c3(&fixtures)));
    lines.push(criterion(4, "asymptotic periodicity evidence", None, || c4(&fixtures, &fuzzed)));
    lines.push(criterion(5, "gap structure", None, || c5(&fixtures, &fuzzed)));
    lines.push(criterion(6, "stable manifolds", None, || c6(&fixtures, &fuzzed)));
    lines.push(criterion(7, "beta injectivity", None, || c7(&fixtures, &fuzzed)));
    lines.push(criterion(8, "half-slope normal form", Some(Duration::from_secs(120)), c8));
    lines.push(criterion(9, "chain lemma exhaustion", Some(Duration::from_secs(60)), c9));
    lines.push(criterion(10, "piecewise increasing agreement", None, c10));
    lines.push(criterion(11, "billiard pipeline", None, c11));
    let failed: Vec<usize> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    println!("acceptance: {} of {} criteria pass", lines.len() - failed.len(), lines.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
