//! The whole pipeline on one map, with every checkable bound collected as a finding.

use crate::census::{self, Census, CensusVerdict};
use crate::error::Result;
use crate::gapflow::{self, AtlasChecks, CaptureTable, Decomposition, GapAtlas, ResidualVerdict};
use crate::map::PiecewiseAffineContraction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisConfig {
    pub max_period: usize,
    pub depth: usize,
    pub manifold_samples: usize,
    pub tr2_rounds: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { max_period: 24, depth: gapflow::DEFAULT_DEPTH, manifold_samples: 64, tr2_rounds: 2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub census: Census,
    pub verdict: CensusVerdict,
    pub atlas: GapAtlas,
    pub atlas_checks: AtlasChecks,
    pub captures: CaptureTable,
    pub decomposition: Decomposition,
    pub residual_verdict: ResidualVerdict,
    /// TR1, TR2 and TR3 per regular orbit.
    pub trapping_checks: Vec<(usize, [bool; 3])>,
}

impl Analysis {
    /// Failed bounds. Any entry is a counterexample to a proven statement or a bug.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let v = &self.verdict;
        if !v.bound_ok {
            out.push(format!("m + d = {} + {} > n = {}", v.m, v.d, v.n));
        }
        if self.residual_verdict == ResidualVerdict::Violated {
            out.push(format!("residual non-empty with m + d = {} = n", v.m + v.d));
        }
        if let Some(ev) = &v.asymptotically_periodic_evidence {
            if !ev.all_converged() {
                out.push(format!("tight map but only {}/{} seeds converged", ev.converged, ev.seeds));
            }
        }
        let a = &self.atlas_checks;
        for (ok, what) in [
            (a.e_components_ok, "E has more than n+1 components"),
            (a.e_length_ok, "|E| < 1 - kappa"),
            (a.e_disjoint_from_images, "E meets one of its forward images"),
            (a.b_bound_ok, "|B| > n - 1"),
            (a.r_bound_ok, "r > 2n"),
            (a.layers_disjoint, "gap layers overlap"),
            (a.leftover_ok, "uncovered length exceeds kappa^(L+1)"),
        ] {
            if !ok {
                out.push(what.to_string());
            }
        }
        for (gap, layer, orbit) in &self.captures.dichotomy_violations {
            out.push(format!("layer {layer} of gap {gap} straddles the trapping region of orbit {orbit}"));
        }
        for (orbit, tr) in &self.trapping_checks {
            for (k, ok) in tr.iter().enumerate() {
                if !ok {
                    out.push(format!("TR{} fails for orbit {orbit}", k + 1));
                }
            }
        }
        let dec = &self.decomposition;
        if !dec.invariance_ok {
            out.push("a stable manifold is not forward invariant".into());
        }
        if dec.beta_injective == Some(false) {
            out.push("beta is not injective".into());
        }
        if let Some(size) = dec.beta_image_size() {
            if size > v.n - v.d {
                out.push(format!("|image(beta)| = {size} > n - d = {}", v.n - v.d));
            }
        }
        if dec.degenerate_on_boundaries == Some(false) {
            out.push("a degenerate orbit point is off every manifold boundary".into());
        }
        for c in &dec.chains {
            if !c.is_chain || !c.bound_ok {
                out.push(format!("harvested chain of orbit {} breaks the coordinate bound", c.orbit));
            }
        }
        out
    }

    /// Checks that could not be decided at the configured depth.
    pub fn inconclusive(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.residual_verdict == ResidualVerdict::Inconclusive {
            out.push(format!(
                "m + d = n but gaps {:?} are uncaptured at depth {}",
                self.captures.uncaptured_gaps, self.atlas.depth
            ));
        }
        out
    }
}

pub fn analyze(map: &PiecewiseAffineContraction, cfg: &AnalysisConfig) -> Result<Analysis> {
    let census = census::run_census(map, cfg.max_period)?;
    let verdict = census::verdict_for(map, &census);
    let atlas = gapflow::build_atlas(map, cfg.depth)?;
    let atlas_checks = gapflow::check_atlas(map, &atlas)?;
    let captures = gapflow::target_times(&atlas, &census);
    let mut manifolds = Vec::new();
    let mut trapping_checks = Vec::new();
    for (i, region) in census.regions.iter().enumerate() {
        if let Some(region) = region {
            manifolds.push(gapflow::stable_manifold_interior(map, &atlas, &census, &captures, i)?);
            trapping_checks.push((
                i,
                [
                    census::check_tr1(map, region)?,
                    census::check_tr2(map, region, cfg.tr2_rounds)?,
                    census::check_tr3(region),
                ],
            ));
        }
    }
    let decomposition = gapflow::decompose_and_beta(map, &census, &captures, manifolds, cfg.manifold_samples)?;
    let residual_verdict = gapflow::residual_verdict(verdict.m, verdict.d, map.n(), &decomposition);
    Ok(Analysis { census, verdict, atlas, atlas_checks, captures, decomposition, residual_verdict, trapping_checks })
}
