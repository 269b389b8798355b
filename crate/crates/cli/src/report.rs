//! JSON reports. Every rational is a `"p/q"` string and object keys are sorted,
//! so identical inputs give byte-identical files.

use serde_json::{json, Value};

use pcmap::analysis::Analysis;
use pcmap::billiard::ReturnMapExtract;
use pcmap::census::{Census, CensusVerdict, OrbitKind, PeriodicOrbitRecord};
use pcmap::chains::VerificationReport;
use pcmap::conjugacy::{ApproximateNormalForm, SlopeReport};
use pcmap::gapflow::{AtlasChecks, CaptureTable, GapAtlas, ResidualVerdict};
use pcmap::rational::{to_pq, Rational};
use pcmap::{PiecewiseAffineContraction, SidedInterval};

pub fn q(r: &Rational) -> Value {
    Value::String(to_pq(r))
}

pub fn interval(j: &SidedInterval) -> Value {
    json!({ "lo": q(&j.lo), "hi": q(&j.hi), "lo_closed": j.lo_closed, "hi_closed": j.hi_closed })
}

fn intervals(js: &[SidedInterval]) -> Value {
    Value::Array(js.iter().map(interval).collect())
}

fn kind(k: OrbitKind) -> &'static str {
    match k {
        OrbitKind::Regular => "regular",
        OrbitKind::Degenerate => "degenerate",
    }
}

pub fn map_summary(map: &PiecewiseAffineContraction) -> Value {
    json!({
        "n": map.n(),
        "kappa": q(map.kappa()),
        "pieces": map.pieces().iter().map(|p| json!({
            "domain": interval(&p.domain),
            "slope": q(&p.slope),
            "intercept": q(&p.intercept),
        })).collect::<Vec<_>>(),
    })
}

fn orbit(o: &PeriodicOrbitRecord, census: &Census, index: usize) -> Value {
    let region = census.regions[index].as_ref().map(|r| {
        r.components
            .iter()
            .map(|c| json!({ "owner": q(&c.owner), "interval": interval(&c.interval), "straddle_detected": c.straddle_detected }))
            .collect::<Vec<_>>()
    });
    json!({
        "points": o.points.iter().map(q).collect::<Vec<_>>(),
        "period": o.period,
        "word": o.word.one_based(),
        "kind": kind(o.kind),
        "external": matches!(o.externality, pcmap::census::Externality::External),
        "blocking_steps": o.classification.blocking_steps.iter()
            .map(|(side, step)| json!({ "side": format!("{side:?}").to_lowercase(), "step": step }))
            .collect::<Vec<_>>(),
        "trapping_region": region,
    })
}

pub fn verdict(v: &CensusVerdict) -> Value {
    json!({
        "m": v.m,
        "d": v.d,
        "n": v.n,
        "bound_ok": v.bound_ok,
        "regular_bound_ok": v.regular_bound_ok,
        "tight": v.tight,
        "evidence": v.asymptotically_periodic_evidence.as_ref().map(|e| json!({
            "seeds": e.seeds, "steps": e.steps, "converged": e.converged,
        })),
    })
}

pub fn census(map: &PiecewiseAffineContraction, census: &Census, v: &CensusVerdict) -> Value {
    json!({
        "map": map_summary(map),
        "max_period": census.max_period,
        "orbits": census.orbits.iter().enumerate().map(|(i, o)| orbit(o, census, i)).collect::<Vec<_>>(),
        "verdict": verdict(v),
    })
}

pub fn atlas(atlas: &GapAtlas, checks: &AtlasChecks, captures: Option<&CaptureTable>) -> Value {
    json!({
        "depth": atlas.depth,
        "e": intervals(&atlas.e),
        "b": atlas.b.iter().map(q).collect::<Vec<_>>(),
        "f": intervals(&atlas.f),
        "r": atlas.r(),
        "covered_length": q(&atlas.covered_length()),
        "checks": {
            "e_components_ok": checks.e_components_ok,
            "e_length_ok": checks.e_length_ok,
            "e_disjoint_from_images": checks.e_disjoint_from_images,
            "b_bound_ok": checks.b_bound_ok,
            "r_bound_ok": checks.r_bound_ok,
            "layers_disjoint": checks.layers_disjoint,
            "leftover_ok": checks.leftover_ok,
            "leftover": q(&checks.leftover),
        },
        "captures": captures.map(|c| json!({
            "records": c.records.iter().map(|r| json!({
                "gap": r.gap, "orbit": r.orbit, "target_time": r.target_time,
            })).collect::<Vec<_>>(),
            "dichotomy_violations": c.dichotomy_violations,
            "uncaptured_gaps": c.uncaptured_gaps,
            "orbits_without_capture": c.orbits_without_capture,
        })),
    })
}

fn residual_verdict(v: ResidualVerdict) -> &'static str {
    match v {
        ResidualVerdict::HoldsEmpty => "holds_empty",
        ResidualVerdict::HoldsNonEmpty => "holds_nonempty",
        ResidualVerdict::Violated => "violated",
        ResidualVerdict::Inconclusive => "inconclusive",
    }
}

pub fn analysis(map: &PiecewiseAffineContraction, a: &Analysis) -> Value {
    let dec = &a.decomposition;
    json!({
        "census": census(map, &a.census, &a.verdict),
        "atlas": atlas(&a.atlas, &a.atlas_checks, Some(&a.captures)),
        "manifolds": dec.manifolds.iter().map(|w| json!({
            "orbit": w.orbit,
            "open_intervals": intervals(&w.open_intervals),
            "uncovered_bound": q(&w.uncovered_bound),
        })).collect::<Vec<_>>(),
        "residual": dec.residual.iter().map(|c| json!({
            "interval": interval(&c.interval), "below_resolution": c.below_resolution,
        })).collect::<Vec<_>>(),
        "residual_verdict": residual_verdict(a.residual_verdict),
        "certified": dec.certified,
        "invariance_ok": dec.invariance_ok,
        "beta": dec.beta.as_ref().map(|bs| bs.iter().map(|b| json!({
            "manifold": b.manifold, "inf": q(&b.inf), "q": b.q, "breakpoint": q(&b.breakpoint),
        })).collect::<Vec<_>>()),
        "beta_injective": dec.beta_injective,
        "degenerate_on_boundaries": dec.degenerate_on_boundaries,
        "chains": dec.chains.iter().map(|c| json!({
            "orbit": c.orbit, "pairs": c.pairs, "is_chain": c.is_chain,
            "coordinates": c.coordinates, "contains_zero": c.contains_zero, "bound_ok": c.bound_ok,
        })).collect::<Vec<_>>(),
        "trapping_checks": a.trapping_checks.iter().map(|(o, tr)| json!({ "orbit": o, "tr": tr })).collect::<Vec<_>>(),
        "violations": a.violations(),
        "inconclusive": a.inconclusive(),
    })
}

pub fn slopes(report: &SlopeReport, normal_form: Option<&ApproximateNormalForm>) -> Value {
    json!({
        "depth": report.depth,
        "tol": q(&report.tol),
        "all_within_tol": report.all_within_tol(),
        "worst_deviation": pcmap::rational::to_f64(&report.worst_deviation()),
        "pieces": report.pieces.iter().map(|p| json!({
            "piece": p.piece,
            "expected": q(&p.expected),
            "pairs": p.pairs,
            "min_quotient": pcmap::rational::to_f64(&p.min_quotient),
            "max_quotient": pcmap::rational::to_f64(&p.max_quotient),
            "within_tol": p.within_tol,
        })).collect::<Vec<_>>(),
        "normal_form": normal_form.map(|nf| json!({
            "breakpoints": nf.breakpoints.iter().map(q).collect::<Vec<_>>(),
            "pieces": nf.pieces.iter().map(|(s, b)| json!({ "slope": q(s), "intercept": q(b) })).collect::<Vec<_>>(),
        })),
    })
}

pub fn chains(r: &VerificationReport) -> Value {
    json!({
        "s_max": r.s_max,
        "alphabet_max": r.alphabet_max,
        "chains_per_s": r.chains_per_s,
        "max_coordinates_per_s": r.max_coordinates_per_s,
        "extremal_per_s": r.extremal_per_s,
        "bound_violations": r.bound_violations,
        "characterization_violations": r.characterization_violations,
        "clean": r.is_clean(),
    })
}

pub fn extract(ex: &ReturnMapExtract) -> Value {
    json!({
        "approximate": ex.approximate,
        "contractive": ex.contractive,
        "field_discontinuities": ex.field_discontinuities,
        "vertex_crossings": ex.vertex_crossings,
        "discontinuities": ex.discontinuities,
        "discontinuity_bound_ok": ex.discontinuity_bound_ok(),
        "excluded": ex.excluded.iter().map(|e| json!({ "parameter": q(&e.parameter), "reason": e.reason.to_string() })).collect::<Vec<_>>(),
        "pieces": ex.pieces.iter().zip(&ex.provenance).zip(&ex.chart_laws).map(|((p, pr), law)| json!({
            "domain": interval(&p.domain),
            "slope": q(&p.slope),
            "intercept": q(&p.intercept),
            "field_arc": pr.field_arc,
            "source_edge": pr.source_edge,
            "target_edge": pr.target_edge,
            "chart": {
                "lambda_lo": q(&law.lambda_lo),
                "lambda_hi": q(&law.lambda_hi),
                "mu_intercept": q(&law.mu_intercept),
                "mu_slope": q(&law.mu_slope),
            },
        })).collect::<Vec<_>>(),
        "emitted": ex.map.is_some(),
        "not_emitted": ex.not_emitted,
    })
}

pub fn to_text(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}
