//! The staged run: build fields, trace, analyse, write artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analysis;
use crate::distance::{build_field, DistanceField};
use crate::error::{Error, Result};
use crate::export::{render_svg, to_json, AnalysisRecord, CurveDocument};
use crate::mediatrix::{trace_mediatrix, MediatrixCurve};
use crate::scenario::{AnalysisKind, OutputKind, Scenario};
use crate::surface::Surface;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    /// SHA-256 of the configuration text.
    pub config_sha256: String,
    pub tool_version: String,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    /// Emitted files relative to the output directory, manifest excluded.
    pub files: Vec<String>,
    pub analyses: BTreeMap<String, bool>,
    pub passed: bool,
}

/// Everything computed by a run, before anything is written.
pub struct RunResult {
    pub surface: Surface,
    pub field_p: DistanceField,
    pub field_q: DistanceField,
    pub curve: MediatrixCurve,
    pub records: Vec<AnalysisRecord>,
    pub timings: BTreeMap<String, f64>,
}

fn timed<T>(timings: &mut BTreeMap<String, f64>, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f();
    timings.insert(stage.to_string(), start.elapsed().as_secs_f64());
    out
}

fn record<T: Serialize>(
    scenario: &Scenario,
    kind: AnalysisKind,
    passed: bool,
    tolerances: Value,
    report: &T,
) -> Result<AnalysisRecord> {
    Ok(AnalysisRecord {
        analysis: kind.name().to_string(),
        scenario: scenario.name.clone(),
        passed,
        tolerances,
        report: serde_json::to_value(report)?,
    })
}

/// Runs one analysis suite on a traced curve.
pub fn run_analysis(
    scenario: &Scenario,
    kind: AnalysisKind,
    surface: &Surface,
    field_p: &DistanceField,
    field_q: &DistanceField,
    curve: &MediatrixCurve,
) -> Result<AnalysisRecord> {
    let a = &scenario.analysis;
    let t = &scenario.tracer;
    let threshold = t.deficiency_threshold;
    match kind {
        AnalysisKind::DirectionalDerivative => {
            let r = analysis::directional_derivative_check(
                surface,
                field_p,
                a.derivative_samples,
                scenario.seed,
                a.derivative_margin,
                a.derivative_tol,
            )?;
            record(scenario, kind, r.passed, json!({ "max_error": a.derivative_tol }), &r)
        }
        AnalysisKind::RayResidual => {
            let r = analysis::ray_residual_suite(surface, field_p, field_q, curve, threshold, &a.ray_residual_grid)?;
            record(
                scenario,
                kind,
                r.passed,
                json!({ "t_grid": a.ray_residual_grid, "deficiency_threshold": threshold }),
                &r,
            )
        }
        AnalysisKind::Linearizability => {
            let r =
                analysis::linearizability_suite(surface, field_p, field_q, curve, &a.lin_grid, a.lin_tol, threshold)?;
            record(
                scenario,
                kind,
                r.passed,
                json!({ "lin_tol": a.lin_tol, "t_grid": a.lin_grid }),
                &r,
            )
        }
        AnalysisKind::GaussBonnet => {
            let r = analysis::gauss_bonnet_suite(surface, field_p, field_q, curve, threshold, a.gb_tol)?;
            record(
                scenario,
                kind,
                r.passed,
                json!({ "gb_tol": a.gb_tol, "deficiency_threshold": threshold }),
                &r,
            )
        }
        AnalysisKind::DeficiencyBudget => {
            let r = analysis::deficiency_sum_bound(surface, curve, a.noise_floor, a.curvature_resolution);
            record(
                scenario,
                kind,
                r.holds,
                json!({ "noise_floor": a.noise_floor, "curvature_resolution": a.curvature_resolution }),
                &r,
            )
        }
        AnalysisKind::WedgeContainment => {
            let rho = scenario.wedge_rho(surface);
            let r = analysis::wedge_containment_report(surface, curve, rho, t.wedge_slack)?;
            record(
                scenario,
                kind,
                r.passed,
                json!({ "rho": rho, "slack": t.wedge_slack }),
                &r,
            )
        }
        AnalysisKind::ProjectionBound => {
            let r = analysis::projection_bound_check(
                surface,
                field_p,
                field_q,
                curve,
                a.projection_samples,
                scenario.seed,
                a.projection_offset,
                t.beta_min,
                t.tol_f,
                a.projection_slack,
            )?;
            record(
                scenario,
                kind,
                r.passed,
                json!({ "slack": a.projection_slack, "max_offset": a.projection_offset, "beta_floor": t.beta_min }),
                &r,
            )
        }
        AnalysisKind::SphereOracle => {
            let r = analysis::sphere_oracle(surface, curve, a.hausdorff_tol, a.length_tol)?;
            record(
                scenario,
                kind,
                r.passed,
                json!({ "hausdorff": a.hausdorff_tol, "length": a.length_tol }),
                &r,
            )
        }
        AnalysisKind::CurveStructure => {
            let r = analysis::curve_structure(curve, t.tol_f, t.beta_min, threshold);
            record(
                scenario,
                kind,
                r.passed,
                json!({ "tol_f": t.tol_f, "beta_min": t.beta_min, "step": t.step }),
                &r,
            )
        }
    }
}

/// Validates the scenario, builds both fields, traces the mediatrix and runs
/// every requested analysis.
pub fn compute(scenario: &Scenario) -> Result<RunResult> {
    let surface = scenario.validate()?;
    let mut timings = BTreeMap::new();
    let (field_p, field_q) = timed(&mut timings, "fields", || {
        let (fp, fq) = rayon::join(
            || build_field(&surface, &scenario.p, &scenario.distance),
            || build_field(&surface, &scenario.q, &scenario.distance),
        );
        Ok((fp?, fq?))
    })?;
    let curve = timed(&mut timings, "trace", || {
        trace_mediatrix(&surface, &field_p, &field_q, &scenario.tracer)
    })?;
    let mut records = Vec::with_capacity(scenario.analyses.len());
    for &kind in &scenario.analyses {
        let r = timed(&mut timings, &format!("analysis.{}", kind.name()), || {
            run_analysis(scenario, kind, &surface, &field_p, &field_q, &curve)
        })?;
        records.push(r);
    }
    Ok(RunResult {
        surface,
        field_p,
        field_q,
        curve,
        records,
        timings,
    })
}

pub fn config_hash(config_text: &str) -> String {
    Sha256::digest(config_text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes the requested artifacts and the manifest into `out_dir`.
pub fn write_outputs(
    scenario: &Scenario,
    config_text: &str,
    result: &RunResult,
    out_dir: &Path,
) -> Result<RunManifest> {
    fs::create_dir_all(out_dir)?;
    let doc = CurveDocument::new(
        &scenario.name,
        &result.surface,
        &result.curve,
        scenario.tracer.deficiency_threshold,
    );
    let mut files: Vec<String> = Vec::new();
    let mut write = |rel: &str, bytes: &[u8]| -> Result<()> {
        let path: PathBuf = out_dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        files.push(rel.to_string());
        Ok(())
    };
    if scenario.outputs.contains(&OutputKind::Json) {
        write("curve.json", to_json(&doc)?.as_bytes())?;
        for r in &result.records {
            write(&format!("analysis/{}.json", r.analysis), to_json(r)?.as_bytes())?;
        }
    }
    if scenario.outputs.contains(&OutputKind::Csv) {
        let mut buf = Vec::new();
        doc.write_csv(&mut buf)?;
        write("curve.csv", &buf)?;
    }
    if scenario.outputs.contains(&OutputKind::Svg) {
        write("figure.svg", render_svg(&doc, scenario.analysis.figure)?.as_bytes())?;
    }
    let analyses: BTreeMap<String, bool> = result.records.iter().map(|r| (r.analysis.clone(), r.passed)).collect();
    let manifest = RunManifest {
        scenario: scenario.name.clone(),
        config_sha256: config_hash(config_text),
        tool_version: TOOL_VERSION.to_string(),
        timings: result.timings.clone(),
        files,
        passed: analyses.values().all(|&p| p),
        analyses,
    };
    fs::write(out_dir.join("manifest.json"), to_json(&manifest)?)?;
    Ok(manifest)
}

/// Parses, validates, computes and writes one scenario.
pub fn run(config_text: &str, out_dir: &Path) -> Result<RunManifest> {
    let scenario = Scenario::from_toml(config_text)?;
    let result = compute(&scenario).map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::Scenario {
            name: scenario.name.clone(),
            source: Box::new(other),
        },
    })?;
    write_outputs(&scenario, config_text, &result, out_dir)
}

/// Sizes the global worker pool. Must run before any parallel work.
pub fn set_worker_count(workers: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| Error::config("workers", e.to_string()))
}
