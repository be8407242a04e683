//! Serializable artifacts: the curve document, its CSV table, analysis
//! records and SVG figures.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::io::Write;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mediatrix::MediatrixCurve;
use crate::scenario::ViewProjection;
use crate::surface::{ChartId, ChartPoint, Surface, SurfaceKind, SurfaceSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePointRecord {
    pub index: usize,
    pub chart: ChartId,
    pub u: f64,
    pub v: f64,
    /// Profile parameter from the north pole.
    pub t: f64,
    pub phi: f64,
    pub embedded: [f64; 3],
    pub distance_p: f64,
    pub distance_q: f64,
    pub residual: f64,
    pub beta: f64,
    pub deficiency: f64,
    pub singular: bool,
    pub directions_p: Vec<f64>,
    pub directions_q: Vec<f64>,
    pub bisectors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDocument {
    pub scenario: String,
    pub surface: SurfaceSpec,
    /// Profile parameter length, used to lay out chart-plane figures.
    pub param_length: f64,
    pub p: ChartPoint,
    pub q: ChartPoint,
    pub p_embedded: [f64; 3],
    pub q_embedded: [f64; 3],
    /// Bump centres and radii as `(t, φ, radius)`.
    pub bumps: Vec<[f64; 3]>,
    pub step: f64,
    pub closed: bool,
    pub length: f64,
    pub deficiency_threshold: f64,
    pub singular_points: Vec<usize>,
    pub branch_points: Vec<usize>,
    pub points: Vec<CurvePointRecord>,
}

fn arr(v: Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn bump_centres(surface: &Surface) -> Vec<[f64; 3]> {
    match &surface.spec().kind {
        SurfaceKind::BumpedCigar { bumps, .. } => bumps
            .iter()
            .enumerate()
            .filter_map(|(i, b)| surface.bump_center(i).map(|(t, phi)| [t, phi, b.radius]))
            .collect(),
        _ => Vec::new(),
    }
}

impl CurveDocument {
    pub fn new(scenario: &str, surface: &Surface, curve: &MediatrixCurve, threshold: f64) -> Self {
        let singular_points = curve.singular_points(threshold);
        let points = curve
            .points
            .iter()
            .enumerate()
            .map(|(index, x)| {
                let (t, phi) = surface.param_of(&x.position);
                CurvePointRecord {
                    index,
                    chart: x.position.chart,
                    u: x.position.u,
                    v: x.position.v,
                    t,
                    phi,
                    embedded: x.embedded,
                    distance_p: x.distance_p,
                    distance_q: x.distance_q,
                    residual: x.residual,
                    beta: x.beta,
                    deficiency: x.deficiency,
                    singular: singular_points.contains(&index),
                    directions_p: x.directions_p(),
                    directions_q: x.directions_q(),
                    bisectors: x.prewedges.iter().map(|w| w.midpoint.angle).collect(),
                }
            })
            .collect();
        CurveDocument {
            scenario: scenario.to_string(),
            surface: surface.spec().clone(),
            param_length: surface.param_length(),
            p: curve.p,
            q: curve.q,
            p_embedded: arr(surface.embed(&curve.p)),
            q_embedded: arr(surface.embed(&curve.q)),
            bumps: bump_centres(surface),
            step: curve.step,
            closed: curve.closed,
            length: curve.length(),
            deficiency_threshold: threshold,
            singular_points,
            branch_points: curve.branch_points.clone(),
            points,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "index",
            "chart",
            "u",
            "v",
            "t",
            "phi",
            "x",
            "y",
            "z",
            "distance_p",
            "distance_q",
            "residual",
            "beta",
            "deficiency",
            "singular",
        ])?;
        for r in &self.points {
            w.write_record([
                r.index.to_string(),
                r.chart.name().to_string(),
                r.u.to_string(),
                r.v.to_string(),
                r.t.to_string(),
                r.phi.to_string(),
                r.embedded[0].to_string(),
                r.embedded[1].to_string(),
                r.embedded[2].to_string(),
                r.distance_p.to_string(),
                r.distance_q.to_string(),
                r.residual.to_string(),
                r.beta.to_string(),
                r.deficiency.to_string(),
                r.singular.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One `analysis/<name>.json` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub analysis: String,
    pub scenario: String,
    pub passed: bool,
    pub tolerances: serde_json::Value,
    pub report: serde_json::Value,
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 40.0;

fn header(svg: &mut String, title: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="14">{title}</text>"#
    );
}

fn polyline(svg: &mut String, pts: &[(f64, f64)], style: &str) {
    if pts.is_empty() {
        return;
    }
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(svg, r#"<polyline points="{}" fill="none" {style}/>"#, coords.join(" "));
}

fn marker(svg: &mut String, (x, y): (f64, f64), label: &str, color: &str) {
    let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="{color}"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{label}</text>"#,
        x + 7.0,
        y - 7.0
    );
}

fn singular_marker(svg: &mut String, (x, y): (f64, f64)) {
    let _ = writeln!(
        svg,
        r#"<circle class="singular" cx="{x:.2}" cy="{y:.2}" r="7" fill="none" stroke="crimson" stroke-width="2"/>"#
    );
}

/// Renders the curve with `p`, `q` and singular points marked.
pub fn render_svg(doc: &CurveDocument, projection: ViewProjection) -> Result<String> {
    if doc.points.is_empty() {
        return Err(Error::Config {
            field: "curve".into(),
            message: "cannot render an empty curve".into(),
        });
    }
    let mut svg = String::new();
    let title = format!(
        "{}: {} points, length {:.4}, {} singular",
        doc.scenario,
        doc.points.len(),
        doc.length,
        doc.singular_points.len()
    );
    header(&mut svg, &title);
    match projection {
        ViewProjection::ChartPlane => chart_plane(&mut svg, doc),
        ViewProjection::Orthographic3d => orthographic(&mut svg, doc),
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn chart_plane(svg: &mut String, doc: &CurveDocument) {
    let (w, h) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN - 20.0);
    let top = MARGIN + 20.0;
    // Longitude runs from −π to π so that φ = 0 sits in the middle.
    let lon = |phi: f64| (phi + PI).rem_euclid(TAU) - PI;
    let map = |t: f64, phi: f64| (MARGIN + w * (phi + PI) / TAU, top + h * t / doc.param_length);
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN}" y="{top}" width="{w}" height="{h}" fill="none" stroke="#888"/>"##
    );
    for &[t, phi, radius] in &doc.bumps {
        let (cx, cy) = map(t, lon(phi));
        let _ = writeln!(
            svg,
            r##"<ellipse cx="{cx:.2}" cy="{cy:.2}" rx="{:.2}" ry="{:.2}" fill="#eee" stroke="#aaa" stroke-dasharray="4 3"/>"##,
            w * radius / TAU,
            h * radius / doc.param_length
        );
    }
    // Split the polyline where it crosses the longitude seam.
    let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    let mut closed_points: Vec<&CurvePointRecord> = doc.points.iter().collect();
    if doc.closed {
        closed_points.push(&doc.points[0]);
    }
    let mut prev: Option<&CurvePointRecord> = None;
    for r in closed_points {
        let phi = lon(r.phi);
        if let Some(pr) = prev {
            let prev_phi = lon(pr.phi);
            if (phi - prev_phi).abs() > PI {
                let shift = if phi < prev_phi { TAU } else { -TAU };
                let last = runs.last_mut().expect("runs is never empty");
                last.push(map(r.t, phi + shift));
                runs.push(vec![map(pr.t, prev_phi - shift)]);
            }
        }
        runs.last_mut().expect("runs is never empty").push(map(r.t, phi));
        prev = Some(r);
    }
    for run in &runs {
        polyline(svg, run, r#"stroke="navy" stroke-width="1.5""#);
    }
    for &i in &doc.singular_points {
        let r = &doc.points[i];
        singular_marker(svg, map(r.t, lon(r.phi)));
    }
    for (label, x, color) in [("p", &doc.p, "seagreen"), ("q", &doc.q, "darkorange")] {
        let (t, phi) = chart_param(doc, x);
        marker(svg, map(t, lon(phi)), label, color);
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">longitude −π to π</text>"#,
        MARGIN,
        HEIGHT - 12.0
    );
}

fn chart_param(doc: &CurveDocument, x: &ChartPoint) -> (f64, f64) {
    match x.chart {
        ChartId::Body => (x.u, x.v),
        ChartId::NorthCap => (x.u.hypot(x.v), x.v.atan2(x.u).rem_euclid(TAU)),
        ChartId::SouthCap => (doc.param_length - x.u.hypot(x.v), (-x.v).atan2(x.u).rem_euclid(TAU)),
    }
}

fn orthographic(svg: &mut String, doc: &CurveDocument) {
    let (az, el) = (-0.6_f64, 0.35_f64);
    let view = |p: [f64; 3]| {
        let (x, y, z) = (p[0], p[1], p[2]);
        let xr = x * az.cos() - y * az.sin();
        let yr = x * az.sin() + y * az.cos();
        let up = z * el.cos() - yr * el.sin();
        let depth = yr * el.cos() + z * el.sin();
        (xr, up, depth)
    };
    let all: Vec<[f64; 3]> = doc
        .points
        .iter()
        .map(|r| r.embedded)
        .chain([doc.p_embedded, doc.q_embedded])
        .collect();
    let extent = all
        .iter()
        .map(|&p| {
            let (a, b, _) = view(p);
            a.abs().max(b.abs())
        })
        .fold(1e-9, f64::max);
    let scale = 0.5 * (HEIGHT - 2.0 * MARGIN - 20.0) / extent;
    let (cx, cy) = (0.5 * WIDTH, 0.5 * HEIGHT + 10.0);
    let map = |p: [f64; 3]| {
        let (a, b, d) = view(p);
        ((cx + scale * a, cy - scale * b), d)
    };
    let _ = writeln!(
        svg,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#bbb" stroke-dasharray="3 3"/>"##,
        map(doc.p_embedded).0 .0,
        map(doc.p_embedded).0 .1,
        map(doc.q_embedded).0 .0,
        map(doc.q_embedded).0 .1
    );
    // Segments on the far side of the view are drawn dashed.
    let n = doc.points.len();
    let segments = if doc.closed { n } else { n - 1 };
    for i in 0..segments {
        let (a, da) = map(doc.points[i].embedded);
        let (b, db) = map(doc.points[(i + 1) % n].embedded);
        let style = if da + db < 0.0 {
            r##"stroke="#7a8cc0" stroke-dasharray="3 2""##
        } else {
            r#"stroke="navy" stroke-width="1.5""#
        };
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" {style}/>"#,
            a.0, a.1, b.0, b.1
        );
    }
    for &i in &doc.singular_points {
        singular_marker(svg, map(doc.points[i].embedded).0);
    }
    marker(svg, map(doc.p_embedded).0, "p", "seagreen");
    marker(svg, map(doc.q_embedded).0, "q", "darkorange");
}
