//! The `pcmap` command line: spec ingestion, analyses, JSON reports, SVG plots and the fuzz harness.
//!
//! Exit codes: 0 success, 2 invalid input, 3 a proven bound failed, 4 undecided at the
//! requested depth, 1 anything else (I/O).

pub mod report;
pub mod spec;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use pcmap::analysis::{analyze, AnalysisConfig};
use pcmap::billiard::extract_return_map;
use pcmap::census::{run_census, verdict_for};
use pcmap::chains::verify_lemma;
use pcmap::conjugacy::{build_table, snap_normal_form, verify_half_slopes};
use pcmap::fuzz::fuzz_generate;
use pcmap::gapflow::{build_atlas, check_atlas, target_times, DEFAULT_DEPTH};
use pcmap::rational::{self, Rational};
use pcmap::{Error, PiecewiseAffineContraction};

use crate::spec::{MapSpecFile, SceneSpecFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

/// Overrides the default output directory when `--out` is absent.
pub const OUT_ENV: &str = "PCMAP_OUT";

#[derive(Debug, Parser)]
#[command(name = "pcmap", version, about = "Exact analysis of piecewise affine contractions")]
pub struct Cli {
    /// Directory for reports and figures.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Graph,
    Cobweb,
    Basins,
    Gaps,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a map spec is a piecewise contraction.
    Validate {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Periodic orbits up to period K, their classification and trapping regions.
    Census {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 24)]
        max_period: usize,
    },
    /// Gap set, exceptional set, gap intervals and their forward layers.
    Gaps {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = 24)]
        max_period: usize,
    },
    /// Stable manifolds, residual set, beta assignment and harvested chains.
    Manifolds {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 24)]
        max_period: usize,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
    /// Slopes of the conjugated map and its snapped slope-1/2 normal form.
    Normalize {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 40)]
        depth: usize,
        #[arg(long, default_value = "1/100000")]
        tol: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Exhaustive check of the chain coordinate bound.
    Chains {
        #[arg(long, default_value_t = 5)]
        s_max: usize,
        #[arg(long, default_value_t = 7)]
        alphabet: u32,
    },
    /// First-return map of a polygon scene, then its census when it is a contraction.
    Billiard {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 24)]
        max_period: usize,
    },
    /// Seeded random maps through the whole pipeline.
    Fuzz {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 500)]
        count: u64,
        #[arg(long, default_value_t = 24)]
        max_period: usize,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// SVG figure of a map.
    Plot {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long, default_value_t = 24)]
        max_period: usize,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        /// Starting point of the cobweb.
        #[arg(long, default_value = "9/10")]
        x0: String,
        #[arg(long, default_value_t = 40)]
        steps: usize,
    },
}

/// Failure of a subcommand, already mapped to its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Invalid(_)
            | Error::Parse(_)
            | Error::OutOfDomain(_)
            | Error::InvalidScene(_)
            | Error::NotInward(_)
            | Error::CornerHit(_)
            | Error::NonInjective(_)
            | Error::IncommensurableEdges(_)
            | Error::PreconditionFailed(_)
            | Error::EmptyChain => EXIT_INVALID,
            Error::LayerHitBreakpoint { .. } => EXIT_VIOLATION,
            _ => EXIT_INCONCLUSIVE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
}

pub struct Outcome {
    pub code: i32,
    /// Lines for standard output.
    pub summary: Vec<String>,
    pub written: Vec<PathBuf>,
}

struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Output {
    fn new(dir: Option<PathBuf>) -> Self {
        let dir = dir
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("pcmap-out"));
        Self { dir, written: Vec::new() }
    }

    fn write(&mut self, name: &str, text: &str) -> Result<PathBuf, Failure> {
        fs::create_dir_all(&self.dir).map_err(|e| io_failure(&self.dir, e))?;
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| io_failure(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "spec".into())
}

fn load_map(path: &Path) -> Result<(MapSpecFile, PiecewiseAffineContraction), Failure> {
    let spec = MapSpecFile::load(path)?;
    let map = spec.to_map()?;
    Ok((spec, map))
}

fn parse_rational(s: &str, what: &str) -> Result<Rational, Failure> {
    rational::parse(s).map_err(|e| Failure { code: EXIT_INVALID, message: format!("--{what}: {e}") })
}

/// Runs one parsed command line.
pub fn execute(cli: Cli) -> Result<Outcome, Failure> {
    let mut out = Output::new(cli.out);
    let mut summary = Vec::new();
    let mut code = EXIT_OK;
    match cli.command {
        Command::Validate { spec } => {
            let (_, map) = load_map(&spec)?;
            summary.push(format!("valid: n = {}, kappa = {}", map.n(), rational::to_pq(map.kappa())));
        }
        Command::Census { spec, max_period } => {
            let (_, map) = load_map(&spec)?;
            let census = run_census(&map, max_period)?;
            let v = verdict_for(&map, &census);
            let path = out.write(&format!("{}-census.json", stem(&spec)), &report::to_text(&report::census(&map, &census, &v)))?;
            for o in &census.orbits {
                let pts: Vec<String> = o.points.iter().map(rational::to_pq).collect();
                summary.push(format!("period {} {:?}: {}", o.period, o.kind, pts.join(", ")));
            }
            summary.push(format!("m = {}, d = {}, n = {}", v.m, v.d, v.n));
            summary.push(format!("report: {}", path.display()));
            if !v.bound_ok {
                code = EXIT_VIOLATION;
            }
        }
        Command::Gaps { spec, depth, max_period } => {
            let (_, map) = load_map(&spec)?;
            let atlas = build_atlas(&map, depth)?;
            let checks = check_atlas(&map, &atlas)?;
            let census = run_census(&map, max_period)?;
            let captures = target_times(&atlas, &census);
            let path = out.write(
                &format!("{}-gaps.json", stem(&spec)),
                &report::to_text(&report::atlas(&atlas, &checks, Some(&captures))),
            )?;
            summary.push(format!("r = {}, |B| = {}, checks ok: {}", atlas.r(), atlas.b.len(), checks.all_ok()));
            summary.push(format!("report: {}", path.display()));
            if !checks.all_ok() || !captures.dichotomy_violations.is_empty() {
                code = EXIT_VIOLATION;
            }
        }
        Command::Manifolds { spec, max_period, depth } => {
            let (_, map) = load_map(&spec)?;
            let cfg = AnalysisConfig { max_period, depth, ..AnalysisConfig::default() };
            let a = analyze(&map, &cfg)?;
            let path = out.write(&format!("{}-manifolds.json", stem(&spec)), &report::to_text(&report::analysis(&map, &a)))?;
            for w in &a.decomposition.manifolds {
                let parts: Vec<String> = w.open_intervals.iter().map(|j| j.to_string()).collect();
                summary.push(format!("orbit {}: {}", w.orbit, parts.join(" ")));
            }
            summary.push(format!("residual: {:?}", a.residual_verdict));
            summary.push(format!("violations: {}", a.violations().len()));
            summary.push(format!("report: {}", path.display()));
            code = if !a.violations().is_empty() {
                EXIT_VIOLATION
            } else if !a.inconclusive().is_empty() {
                EXIT_INCONCLUSIVE
            } else {
                EXIT_OK
            };
        }
        Command::Normalize { spec, depth, tol, samples } => {
            let (_, map) = load_map(&spec)?;
            let tol = parse_rational(&tol, "tol")?;
            let table = build_table(&map, depth, 0)?;
            let slopes = verify_half_slopes(&map, &table, samples, &tol)?;
            let nf = snap_normal_form(&map, &table)?;
            let path = out.write(
                &format!("{}-normalize.json", stem(&spec)),
                &report::to_text(&report::slopes(&slopes, Some(&nf))),
            )?;
            summary.push(format!(
                "within tolerance: {}, worst deviation {:.3e}",
                slopes.all_within_tol(),
                rational::to_f64(&slopes.worst_deviation())
            ));
            summary.push(format!("report: {}", path.display()));
            if !slopes.all_within_tol() {
                code = EXIT_INCONCLUSIVE;
            }
        }
        Command::Chains { s_max, alphabet } => {
            let r = verify_lemma(s_max, alphabet)?;
            let path = out.write("chains.json", &report::to_text(&report::chains(&r)))?;
            summary.push(format!("chains: {}, exceptions: {}", r.total_chains(), r.bound_violations.len() + r.characterization_violations.len()));
            summary.push(format!("report: {}", path.display()));
            if !r.is_clean() {
                code = EXIT_VIOLATION;
            }
        }
        Command::Billiard { spec, max_period } => {
            let scene = SceneSpecFile::load(&spec)?.to_scene()?;
            let ex = extract_return_map(&scene)?;
            let mut body = json!({ "extract": report::extract(&ex) });
            if let Some(map) = &ex.map {
                let census = run_census(map, max_period)?;
                let v = verdict_for(map, &census);
                body["census"] = report::census(map, &census, &v);
                summary.push(format!("extracted {} pieces, m = {}, d = {}", map.n(), v.m, v.d));
                if !v.bound_ok {
                    code = EXIT_VIOLATION;
                }
            } else {
                summary.push(format!(
                    "extracted {} pieces, no map emitted: {}",
                    ex.pieces.len(),
                    ex.not_emitted.clone().unwrap_or_default()
                ));
            }
            let path = out.write(&format!("{}-billiard.json", stem(&spec)), &report::to_text(&body))?;
            summary.push(format!("report: {}", path.display()));
        }
        Command::Fuzz { n, count, max_period, depth, seed } => {
            let (c, lines) = fuzz(&mut out, n, count, max_period, depth, seed)?;
            code = c;
            summary.extend(lines);
        }
        Command::Plot { spec, kind, max_period, depth, x0, steps } => {
            let (file, map) = load_map(&spec)?;
            let title = if file.name.is_empty() { stem(&spec) } else { file.name.clone() };
            let svg = match kind {
                PlotKind::Graph => svg::graph(&map, &title),
                PlotKind::Cobweb => svg::cobweb(&map, &parse_rational(&x0, "x0")?, steps, &title)?,
                PlotKind::Basins => {
                    let a = analyze(&map, &AnalysisConfig { max_period, depth, ..AnalysisConfig::default() })?;
                    svg::basins(&map, &a, &title)
                }
                PlotKind::Gaps => svg::gaps(&build_atlas(&map, depth)?, 40, &title),
            };
            let name = format!("{}-{}.svg", stem(&spec), format!("{kind:?}").to_lowercase());
            let path = out.write(&name, &svg)?;
            summary.push(format!("figure: {}", path.display()));
        }
    }
    Ok(Outcome { code, summary, written: out.written })
}

enum FuzzResult {
    Clean,
    Violations(Vec<String>),
    Inconclusive(Vec<String>),
}

fn fuzz(out: &mut Output, n: usize, count: u64, max_period: usize, depth: usize, seed: u64) -> Result<(i32, Vec<String>), Failure> {
    let cfg = AnalysisConfig { max_period, depth, ..AnalysisConfig::default() };
    let results: Vec<(u64, PiecewiseAffineContraction, FuzzResult)> = (seed..seed + count)
        .into_par_iter()
        .map(|s| {
            let map = fuzz_generate(n, s)?;
            let verdict = match analyze(&map, &cfg) {
                Ok(a) if !a.violations().is_empty() => FuzzResult::Violations(a.violations()),
                Ok(a) if !a.inconclusive().is_empty() => FuzzResult::Inconclusive(a.inconclusive()),
                Ok(_) => FuzzResult::Clean,
                Err(e @ Error::LayerHitBreakpoint { .. }) => FuzzResult::Violations(vec![e.to_string()]),
                Err(e) => FuzzResult::Inconclusive(vec![e.to_string()]),
            };
            Ok((s, map, verdict))
        })
        .collect::<Result<_, Error>>()?;
    let mut violations = 0;
    let mut inconclusive = 0;
    let mut lines = Vec::new();
    let mut records = Vec::new();
    for (s, map, r) in &results {
        match r {
            FuzzResult::Clean => {}
            FuzzResult::Violations(v) => {
                violations += 1;
                let name = format!("fuzz-n{n}-seed{s}");
                let spec = MapSpecFile::from_map(&name, &v.join("; "), map);
                let path = out.write(&format!("corpus/{name}.json"), &spec.to_json())?;
                lines.push(format!("counterexample: {}", path.display()));
                records.push(json!({ "seed": s, "violations": v }));
            }
            FuzzResult::Inconclusive(v) => {
                inconclusive += 1;
                records.push(json!({ "seed": s, "inconclusive": v }));
            }
        }
    }
    let body = json!({
        "n": n, "count": count, "seed": seed, "max_period": max_period, "depth": depth,
        "violations": violations, "inconclusive": inconclusive, "records": records,
    });
    let path = out.write(&format!("fuzz-n{n}-seed{seed}.json"), &report::to_text(&body))?;
    lines.push(format!("maps: {count}"));
    lines.push(format!("violations: {violations}"));
    lines.push(format!("inconclusive: {inconclusive}"));
    lines.push(format!("report: {}", path.display()));
    let code = if violations > 0 {
        EXIT_VIOLATION
    } else if inconclusive > 0 {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    Ok((code, lines))
}

/// Parses arguments, runs, prints, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            outcome.code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
