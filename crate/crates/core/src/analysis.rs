//! Executable checks of the regularity statements about mediatrices:
//! the directional derivative of distance, the bisector-ray residual, radial
//! linearizability of spokes, the Jordan-wedge Gauss-Bonnet identity and the
//! deficiency budget.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle;
use crate::distance::{distance_and_directions, DistanceField, Launch};
use crate::error::{Error, Result};
use crate::geodesic::{self, integrate_geodesic, polar_coordinates, TangentDirection};
use crate::mediatrix::{
    project_pass, project_to_mediatrix, wedge_containment_check, MediatrixCurve, MediatrixPoint, Pair,
};
use crate::profile::gauss_legendre8;
use crate::surface::{ChartId, ChartPoint, Surface, SurfaceKind};

/// `−cos` of the circle distance from `theta` to `Θ_{x,p}`.
pub fn directional_derivative(
    surface: &Surface,
    field_p: &DistanceField,
    x: &ChartPoint,
    theta: TangentDirection,
) -> Result<f64> {
    let r = distance_and_directions(surface, field_p, x)?;
    if r.degenerate || r.directions.is_empty() {
        return Err(Error::Degenerate(*x));
    }
    Ok(-circle::distance_to_set(theta.angle, &r.angles()).cos())
}

/// One-sided difference quotients of `d(exp_x(tθ), p)` at `t, t/2, t/4`,
/// Richardson-extrapolated to `t → 0⁺`.
pub fn extrapolated_difference(
    surface: &Surface,
    field_p: &DistanceField,
    x: &ChartPoint,
    theta: TangentDirection,
    t: f64,
) -> Result<f64> {
    let d0 = distance_and_directions(surface, field_p, x)?.distance;
    let quotient = |h: f64| -> Result<f64> {
        let y = geodesic::exp_map_with_step(surface, x, theta, h, field_p.step)?;
        let y = surface.canonical(&y);
        Ok((distance_and_directions(surface, field_p, &y)?.distance - d0) / h)
    };
    let (q1, q2, q3) = (quotient(t)?, quotient(0.5 * t)?, quotient(0.25 * t)?);
    let r1 = 2.0 * q2 - q1;
    let r2 = 2.0 * q3 - q2;
    Ok((4.0 * r2 - r1) / 3.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeSample {
    pub x: ChartPoint,
    pub theta: f64,
    pub analytic: f64,
    pub extrapolated: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub samples: Vec<DerivativeSample>,
    /// Draws rejected for being too close to the source or crossing the cut
    /// locus.
    pub skipped: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub t_ladder: [f64; 3],
    pub passed: bool,
}

/// Largest launch-angle change along a ray that still counts as one smooth
/// branch of the distance function.
const BRANCH_JUMP: f64 = 0.3;

/// Whether the ray `exp_x(sθ)`, `s ∈ [0, t]`, stays on one smooth branch of
/// `d(·, p)`: the minimizing launch at the far end continues the one at `x`.
fn single_branch(
    surface: &Surface,
    field_p: &DistanceField,
    x: &ChartPoint,
    theta: TangentDirection,
    t: f64,
) -> Result<bool> {
    let r0 = distance_and_directions(surface, field_p, x)?;
    let y = geodesic::exp_map_with_step(surface, x, theta, t, field_p.step)?;
    let r1 = distance_and_directions(surface, field_p, &surface.canonical(&y))?;
    if r0.degenerate || r1.degenerate || r1.launches.len() != 1 {
        return Ok(false);
    }
    let a1 = r1.launches[0].angle;
    Ok(r0
        .launches
        .iter()
        .any(|l| circle::arc_distance(l.angle, a1) <= BRANCH_JUMP))
}

/// Compares the analytic one-sided derivative with extrapolated finite
/// differences at `count` pinned-seed random samples. Points are uniform in
/// the profile parameter and longitude, at least `margin` from the source and
/// the poles; rays that cross the cut locus of `p` within the ladder are
/// redrawn.
pub fn directional_derivative_check(
    surface: &Surface,
    field_p: &DistanceField,
    count: usize,
    seed: u64,
    margin: f64,
    tolerance: f64,
) -> Result<DerivativeReport> {
    let t = 1e-2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_len = surface.param_length();
    let p3 = surface.embed(&field_p.source);
    let mut rows = Vec::with_capacity(count);
    let mut skipped = 0;
    while rows.len() < count {
        let x = surface.point_at(rng.gen_range(margin..t_len - margin), rng.gen_range(0.0..TAU));
        let theta = TangentDirection::new(rng.gen_range(0.0..TAU));
        if (surface.embed(&x) - p3).norm() < margin || !single_branch(surface, field_p, &x, theta, t)? {
            skipped += 1;
            continue;
        }
        let analytic = directional_derivative(surface, field_p, &x, theta)?;
        let extrapolated = extrapolated_difference(surface, field_p, &x, theta, t)?;
        rows.push(DerivativeSample {
            x,
            theta: theta.angle,
            analytic,
            extrapolated,
            error: (analytic - extrapolated).abs(),
        });
    }
    let max_error = rows.iter().map(|r| r.error).fold(0.0, f64::max);
    Ok(DerivativeReport {
        samples: rows,
        skipped,
        max_error,
        tolerance,
        t_ladder: [t, 0.5 * t, 0.25 * t],
        passed: max_error <= tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayResidualReport {
    pub base: ChartPoint,
    pub prewedge: usize,
    pub midpoint: f64,
    /// `(t, η(t))` with `η(t) = |f_pq(exp_x(tθ̂))| / t`.
    pub rows: Vec<(f64, f64)>,
    /// Least-squares slope of `log η` against `log t`.
    pub log_slope: f64,
    pub strictly_decreasing: bool,
}

/// Residual of `f_pq` along the bisector ray of pre-wedge `prewedge_index`.
pub fn bisector_ray_residual(
    surface: &Surface,
    field_p: &DistanceField,
    field_q: &DistanceField,
    x: &MediatrixPoint,
    prewedge_index: usize,
    t_grid: &[f64],
) -> Result<RayResidualReport> {
    let pair = Pair::new(surface, field_p, field_q);
    let midpoint = x.prewedges[prewedge_index].midpoint;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let y = geodesic::exp_map_with_step(surface, &x.position, midpoint, t, field_p.step)?;
        let (rp, rq) = pair.global(&surface.canonical(&y))?;
        rows.push((t, (rq.distance - rp.distance).abs() / t));
    }
    let logs: Vec<(f64, f64)> = rows.iter().map(|&(t, e)| (t.ln(), e.max(1e-300).ln())).collect();
    let n = logs.len() as f64;
    let (mx, my) = (
        logs.iter().map(|l| l.0).sum::<f64>() / n,
        logs.iter().map(|l| l.1).sum::<f64>() / n,
    );
    let sxy: f64 = logs.iter().map(|l| (l.0 - mx) * (l.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|l| (l.0 - mx).powi(2)).sum();
    let strictly_decreasing = rows.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(RayResidualReport {
        base: x.position,
        prewedge: prewedge_index,
        midpoint: midpoint.angle,
        rows,
        log_slope: if sxx > 0.0 { sxy / sxx } else { 0.0 },
        strictly_decreasing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpokeSample {
    pub t: f64,
    /// Measured distance from the base point.
    pub distance: f64,
    pub theta: f64,
    pub gap: f64,
    pub adversarial_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizabilityReport {
    pub index: usize,
    pub base: ChartPoint,
    pub prewedge: usize,
    pub midpoint: f64,
    /// Midpoint of a different pre-wedge, used as the wrong limit direction.
    pub adversarial_midpoint: f64,
    pub samples: Vec<SpokeSample>,
    pub terminal_gap: f64,
    pub converged: bool,
    pub adversarial_converged: bool,
    pub lin_tol: f64,
}

/// Maxima over consecutive dyadic windows must not grow by more than the
/// per-window slack as `t` decreases.
fn windows_non_increasing(gaps: &[f64], slack: &[f64]) -> bool {
    let maxima: Vec<f64> = gaps.windows(2).map(|w| w[0].max(w[1])).collect();
    maxima
        .windows(2)
        .zip(slack.iter().skip(2))
        .all(|(w, s)| w[1] <= w[0] + s)
}

const WINDOW_SLACK: f64 = 1e-6;
/// A residual `r` at the base point displaces the spoke sideways by about
/// `r / sin β`, which shows up as an angular gap of order `r / t`.
const RESIDUAL_GAIN: f64 = 4.0;
const SPOKE_TOL: f64 = 1e-11;

/// Polar direction `θ(t)` of the spoke of pre-wedge `prewedge` at `x_index`,
/// for each `t` in the decreasing grid.
#[allow(clippy::too_many_arguments)]
pub fn radial_linearizability_check(
    surface: &Surface,
    field_p: &DistanceField,
    field_q: &DistanceField,
    curve: &MediatrixCurve,
    x_index: usize,
    prewedge: usize,
    t_grid: &[f64],
    lin_tol: f64,
) -> Result<LinearizabilityReport> {
    let pair = Pair::new(surface, field_p, field_q);
    let x = &curve.points[x_index];
    let n = curve.points.len();
    let midpoint = x.prewedges[prewedge].midpoint.angle;
    let adversarial_midpoint = x.prewedges[(prewedge + 1) % x.prewedges.len()].midpoint.angle;
    // The spoke leaves toward whichever curve neighbour lies closest to θ̂.
    let mut neighbours = Vec::new();
    if curve.closed || x_index + 1 < n {
        neighbours.push((x_index + 1) % n);
    }
    if curve.closed || x_index > 0 {
        neighbours.push((x_index + n - 1) % n);
    }
    let mut heading = midpoint;
    let mut best = PI;
    for j in neighbours {
        let (theta, _) = polar_coordinates(surface, &x.position, &curve.points[j].position)?;
        let gap = circle::arc_distance(theta.angle, midpoint);
        if gap < best {
            best = gap;
            heading = theta.angle;
        }
    }
    let mut samples = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let y = geodesic::shoot(surface, &x.position, heading, t, field_p.step)?.0;
        let y = surface.canonical(&y);
        let e = pair.anchored_eval(&y, &x.launches_p, &x.launches_q)?;
        let (z, _) = project_pass(&pair, &y, &e, 1e-3, SPOKE_TOL)?;
        let (theta, distance) = polar_coordinates(surface, &x.position, &surface.canonical(&z))?;
        samples.push(SpokeSample {
            t,
            distance,
            theta: theta.angle,
            gap: circle::arc_distance(theta.angle, midpoint),
            adversarial_gap: circle::arc_distance(theta.angle, adversarial_midpoint),
        });
    }
    let gaps: Vec<f64> = samples.iter().map(|s| s.gap).collect();
    let adv: Vec<f64> = samples.iter().map(|s| s.adversarial_gap).collect();
    let slack: Vec<f64> = samples
        .iter()
        .map(|s| WINDOW_SLACK + RESIDUAL_GAIN * (x.residual + SPOKE_TOL) / s.t)
        .collect();
    let terminal_gap = *gaps.last().unwrap_or(&PI);
    let converged = terminal_gap <= lin_tol && windows_non_increasing(&gaps, &slack);
    let adversarial_converged = *adv.last().unwrap_or(&PI) <= lin_tol && windows_non_increasing(&adv, &slack);
    Ok(LinearizabilityReport {
        index: x_index,
        base: x.position,
        prewedge,
        midpoint,
        adversarial_midpoint,
        samples,
        terminal_gap,
        converged,
        adversarial_converged,
        lin_tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizabilitySummary {
    pub t_grid: Vec<f64>,
    pub lin_tol: f64,
    pub checked: usize,
    pub max_terminal_gap: f64,
    /// `(index, pre-wedge)` pairs that did not converge.
    pub failures: Vec<(usize, usize)>,
    /// `(index, pre-wedge)` pairs whose wrong midpoint converged.
    pub adversarial_failures: Vec<(usize, usize)>,
    /// Full reports at flagged singular points.
    pub singular: Vec<LinearizabilityReport>,
    pub passed: bool,
}

/// Runs the spoke check on every pre-wedge of every traced point.
pub fn linearizability_suite(
    surface: &Surface,
    field_p: &DistanceField,
    field_q: &DistanceField,
    curve: &MediatrixCurve,
    t_grid: &[f64],
    lin_tol: f64,
    threshold: f64,
) -> Result<LinearizabilitySummary> {
    let jobs: Vec<(usize, usize)> = curve
        .points
        .iter()
        .enumerate()
        .flat_map(|(i, x)| (0..x.prewedges.len()).map(move |w| (i, w)))
        .collect();
    let reports = jobs
        .par_iter()
        .map(|&(i, w)| radial_linearizability_check(surface, field_p, field_q, curve, i, w, t_grid, lin_tol))
        .collect::<Result<Vec<_>>>()?;
    let failures = reports
        .iter()
        .filter(|r| !r.converged)
        .map(|r| (r.index, r.prewedge))
        .collect::<Vec<_>>();
    let adversarial_failures = reports
        .iter()
        .filter(|r| r.adversarial_converged)
        .map(|r| (r.index, r.prewedge))
        .collect::<Vec<_>>();
    let max_terminal_gap = reports.iter().map(|r| r.terminal_gap).fold(0.0, f64::max);
    let singular = reports
        .into_iter()
        .filter(|r| curve.points[r.index].deficiency > threshold)
        .collect();
    Ok(LinearizabilitySummary {
        t_grid: t_grid.to_vec(),
        lin_tol,
        checked: jobs.len(),
        max_terminal_gap,
        passed: failures.is_empty() && adversarial_failures.is_empty() && !jobs.is_empty(),
        failures,
        adversarial_failures,
        singular,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    P,
    Q,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanWedgeReport {
    pub base: ChartPoint,
    pub side: Side,
    pub empty: bool,
    /// Interior angle at the base point.
    pub mu: f64,
    /// Interior angle at the source.
    pub alpha: f64,
    pub curvature_integral: f64,
    pub residual: f64,
}

// Seven-point degree-5 rule on a triangle: barycentric coordinates, weight.
const TRIANGLE_RULE: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    (
        [0.059_715_871_789_770, 0.470_142_064_105_115, 0.470_142_064_105_115],
        0.132_394_152_788_506,
    ),
    (
        [0.470_142_064_105_115, 0.059_715_871_789_770, 0.470_142_064_105_115],
        0.132_394_152_788_506,
    ),
    (
        [0.470_142_064_105_115, 0.470_142_064_105_115, 0.059_715_871_789_770],
        0.132_394_152_788_506,
    ),
    (
        [0.797_426_985_353_087, 0.101_286_507_323_456, 0.101_286_507_323_456],
        0.125_939_180_544_827,
    ),
    (
        [0.101_286_507_323_456, 0.797_426_985_353_087, 0.101_286_507_323_456],
        0.125_939_180_544_827,
    ),
    (
        [0.101_286_507_323_456, 0.101_286_507_323_456, 0.797_426_985_353_087],
        0.125_939_180_544_827,
    ),
];

/// `K·√det g` in the `(t, φ)` parametrization, which stays valid up to the
/// poles even where the body chart is not used for integration.
fn curvature_density(surface: &Surface, t: f64, phi: f64) -> f64 {
    let jet = surface.jet(&ChartPoint::new(ChartId::Body, t, phi));
    let n = jet.xu.cross(&jet.xv);
    let area = n.norm();
    if area < 1e-300 {
        return 0.0;
    }
    let n = n / area;
    let (l, m, nn) = (jet.xuu.dot(&n), jet.xuv.dot(&n), jet.xvv.dot(&n));
    (l * nn - m * m) / area
}

type Triangle = [[f64; 2]; 3];

fn signed_area(tri: &Triangle) -> f64 {
    let [a, b, c] = tri;
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn triangle_integral(surface: &Surface, tri: &Triangle) -> f64 {
    let area = signed_area(tri);
    if area == 0.0 {
        return 0.0;
    }
    let [a, b, c] = tri;
    let mut sum = 0.0;
    for (w, weight) in TRIANGLE_RULE {
        let t = w[0] * a[0] + w[1] * b[0] + w[2] * c[0];
        let phi = w[0] * a[1] + w[1] * b[1] + w[2] * c[1];
        sum += weight * curvature_density(surface, t, phi);
    }
    area * sum
}

/// Signed number of times the triangles cover `(t, φ)`, counting every
/// longitude lift.
fn multiplicity(tris: &[Triangle], t: f64, phi: f64) -> i64 {
    let mut count = 0;
    for tri in tris {
        let (lo, hi) = tri.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v[1]), hi.max(v[1]))
        });
        let (tlo, thi) = tri.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v[0]), hi.max(v[0]))
        });
        if t < tlo || t > thi {
            continue;
        }
        let area = signed_area(tri);
        if area == 0.0 {
            continue;
        }
        let mut lift = phi + ((lo - phi) / TAU).ceil() * TAU;
        while lift <= hi {
            let inside = (0..3).all(|i| {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                let cross = (b[0] - a[0]) * (lift - a[1]) - (t - a[0]) * (b[1] - a[1]);
                cross * area >= 0.0
            });
            if inside {
                count += if area > 0.0 { 1 } else { -1 };
            }
            lift += TAU;
        }
    }
    count
}

/// `∫ K dA` over the polar cap `t < t_p`.
fn north_cap_integral(surface: &Surface, t_p: f64) -> f64 {
    let (nt, nphi) = ((t_p / 0.02).ceil().max(1.0) as usize, 256);
    let (dt, dphi) = (t_p / nt as f64, TAU / nphi as f64);
    let mut sum = 0.0;
    for i in 0..nt {
        let t0 = i as f64 * dt;
        for j in 0..nphi {
            let phi0 = j as f64 * dphi;
            sum += gauss_legendre8(t0, t0 + dt, |t| {
                gauss_legendre8(phi0, phi0 + dphi, |phi| curvature_density(surface, t, phi))
            });
        }
    }
    sum
}

/// `(t, φ)` samples of the geodesic from the source with the given launch,
/// ordered from the base point, with `φ` unwrapped continuously.
fn boundary_trace(surface: &Surface, field: &DistanceField, launch: &Launch, step: f64) -> Result<Vec<[f64; 2]>> {
    let tr = integrate_geodesic(
        surface,
        &field.source,
        TangentDirection::new(launch.angle),
        launch.length,
        step,
    )?;
    let mut out: Vec<[f64; 2]> = tr
        .samples
        .iter()
        .rev()
        .map(|s| {
            let (t, phi) = surface.param_of(&s.position);
            [t, phi]
        })
        .collect();
    for i in 1..out.len() {
        let prev = out[i - 1][1];
        out[i][1] = prev + circle::signed_diff(prev, out[i][1]);
    }
    Ok(out)
}

/// Gauss-Bonnet on the domain bounded by the two extreme minimizing
/// geodesics from `x` to the source of `side`, on the side away from the
/// other source: `∫_J K = μ + α`.
///
/// The strip ruled between the two traces in `(t, φ)` is a 2-chain whose
/// boundary is the loop plus, when the traces wind around the axis, the
/// parallel through the source; subtracting the polar cap closes it. That
/// chain equals `c·J + m·M`, with `m` its multiplicity at the other source
/// and `m + c` its multiplicity just inside the μ sector at `x`.
pub fn jordan_wedge_report(
    surface: &Surface,
    field: &DistanceField,
    other: &ChartPoint,
    x: &MediatrixPoint,
    side: Side,
) -> Result<JordanWedgeReport> {
    let (own, other_launches) = match side {
        Side::P => (&x.launches_p, &x.launches_q),
        Side::Q => (&x.launches_q, &x.launches_p),
    };
    let mut report = JordanWedgeReport {
        base: x.position,
        side,
        empty: true,
        mu: 0.0,
        alpha: 0.0,
        curvature_integral: 0.0,
        residual: 0.0,
    };
    if own.len() < 2 {
        return Ok(report);
    }
    let mut sorted: Vec<Launch> = own.clone();
    sorted.sort_by(|a, b| a.arrival.total_cmp(&b.arrival));
    let other_dirs: Vec<f64> = other_launches.iter().map(|l| l.arrival).collect();
    // The complement of J at x is the gap between consecutive own directions
    // that holds the directions toward the other source.
    let n = sorted.len();
    let k = (0..n)
        .find(|&i| {
            let (a, b) = (sorted[i].arrival, sorted[(i + 1) % n].arrival);
            other_dirs
                .iter()
                .any(|&d| circle::in_arc(d, a, circle::ccw_gap(a, b), 0.0))
        })
        .unwrap_or(n - 1);
    let (first, last) = (sorted[(k + 1) % n], sorted[k]);
    let mu = TAU - circle::ccw_gap(last.arrival, first.arrival);
    let alpha = circle::arc_distance(first.angle, last.angle);

    let step = 1e-3_f64.min(surface.injectivity_bound() / 100.0);
    let a = boundary_trace(surface, field, &first, step)?;
    let mut b = boundary_trace(surface, field, &last, step)?;
    let align = circle::signed_diff(a[0][1], b[0][1]) - (b[0][1] - a[0][1]);
    for s in &mut b {
        s[1] += align;
    }
    let rungs = a.len().min(b.len());
    let m = 48;
    let lerp = |p: [f64; 2], q: [f64; 2], s: f64| [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
    let mut tris: Vec<Triangle> = Vec::with_capacity(2 * m * rungs);
    for i in 0..rungs - 1 {
        for j in 0..m {
            let (s0, s1) = (j as f64 / m as f64, (j + 1) as f64 / m as f64);
            let p00 = lerp(a[i], b[i], s0);
            let p01 = lerp(a[i], b[i], s1);
            let p10 = lerp(a[i + 1], b[i + 1], s0);
            let p11 = lerp(a[i + 1], b[i + 1], s1);
            tris.push([p00, p10, p11]);
            tris.push([p00, p11, p01]);
        }
    }
    let strip: f64 = tris.par_iter().map(|tri| triangle_integral(surface, tri)).sum();

    let (t_src, _) = surface.param_of(&field.source);
    let t_len = surface.param_length();
    let at_pole = t_src < 1e-9 || t_src > t_len - 1e-9;
    let winding = if at_pole {
        0
    } else {
        ((b[rungs - 1][1] - a[rungs - 1][1]) / TAU).round() as i64
    };
    let cap = if winding != 0 {
        north_cap_integral(surface, t_src)
    } else {
        0.0
    };
    let chain_multiplicity = |t: f64, phi: f64| multiplicity(&tris, t, phi) - if t < t_src { winding } else { 0 };

    let (tq, phiq) = surface.param_of(other);
    let outer = chain_multiplicity(tq, phiq);
    let probe = TangentDirection::new(first.arrival + 0.5 * mu);
    let reach = 1e-2_f64.min(0.1 * x.distance_p.min(x.distance_q));
    let y = geodesic::exp_map_with_step(surface, &x.position, probe, reach, step)?;
    let (ty, phiy) = surface.param_of(&surface.canonical(&y));
    let c = chain_multiplicity(ty, phiy) - outer;

    let total = strip - winding as f64 * cap - outer as f64 * 2.0 * TAU;
    let curvature_integral = if c == 0 { f64::NAN } else { total / c as f64 };
    report.empty = false;
    report.mu = mu;
    report.alpha = alpha;
    report.curvature_integral = curvature_integral;
    report.residual = if c == 0 {
        f64::INFINITY
    } else {
        (curvature_integral - (mu + alpha)).abs()
    };
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficiencyIdentity {
    pub index: usize,
    pub deficiency: f64,
    pub mu_p: f64,
    pub mu_q: f64,
    /// `|2·def − |μ_p − μ_q||`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussBonnetSummary {
    pub gb_tol: f64,
    /// Reports for every non-empty Jordan wedge along the curve.
    pub wedges: Vec<(usize, JordanWedgeReport)>,
    pub identities: Vec<DeficiencyIdentity>,
    pub max_residual: f64,
    pub max_identity_residual: f64,
    pub passed: bool,
}

/// Jordan wedges at every traced point with several minimizing directions to
/// a source, plus the deficiency identity at singular points.
pub fn gauss_bonnet_suite(
    surface: &Surface,
    field_p: &DistanceField,
    field_q: &DistanceField,
    curve: &MediatrixCurve,
    threshold: f64,
    gb_tol: f64,
) -> Result<GaussBonnetSummary> {
    let singular = curve.singular_points(threshold);
    let jobs: Vec<usize> = (0..curve.points.len())
        .filter(|&i| {
            let x = &curve.points[i];
            x.launches_p.len() > 1 || x.launches_q.len() > 1 || singular.contains(&i)
        })
        .collect();
    let per_point = jobs
        .par_iter()
        .map(|&i| {
            let x = &curve.points[i];
            Ok((
                i,
                jordan_wedge_report(surface, field_p, &curve.q, x, Side::P)?,
                jordan_wedge_report(surface, field_q, &curve.p, x, Side::Q)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut wedges = Vec::new();
    let mut identities = Vec::new();
    for (i, rp, rq) in per_point {
        if singular.contains(&i) {
            let deficiency = curve.points[i].deficiency;
            identities.push(DeficiencyIdentity {
                index: i,
                deficiency,
                mu_p: rp.mu,
                mu_q: rq.mu,
                residual: (2.0 * deficiency - (rp.mu - rq.mu).abs()).abs(),
            });
        }
        for r in [rp, rq] {
            if !r.empty {
                wedges.push((i, r));
            }
        }
    }
    let max_residual = wedges.iter().map(|w| w.1.residual).fold(0.0, f64::max);
    let max_identity_residual = identities.iter().map(|d| d.residual).fold(0.0, f64::max);
    Ok(GaussBonnetSummary {
        gb_tol,
        passed: max_residual <= gb_tol && max_identity_residual <= gb_tol,
        wedges,
        identities,
        max_residual,
        max_identity_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayResidualSummary {
    pub t_grid: Vec<f64>,
    pub reports: Vec<RayResidualReport>,
    pub passed: bool,
}

/// Bisector-ray residuals along every pre-wedge of every singular point;
/// passes when each sequence strictly decreases with `t`.
pub fn ray_residual_suite(
    surface: &Surface,
    field_p: &DistanceField,
    field_q: &DistanceField,
    curve: &MediatrixCurve,
    threshold: f64,
    t_grid: &[f64],
) -> Result<RayResidualSummary> {
    let mut reports = Vec::new();
    for i in curve.singular_points(threshold) {
        let x = &curve.points[i];
        for w in 0..x.prewedges.len() {
            reports.push(bisector_ray_residual(surface, field_p, field_q, x, w, t_grid)?);
        }
    }
    Ok(RayResidualSummary {
        t_grid: t_grid.to_vec(),
        passed: reports.iter().all(|r| r.strictly_decreasing),
        reports,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficiencyBudget {
    /// `(index, deficiency)` of points above the noise floor.
    pub flagged: Vec<(usize, f64)>,
    pub sum: f64,
    pub total_abs_curvature: f64,
    pub bound: f64,
    pub margin: f64,
    pub noise_floor: f64,
    pub holds: bool,
}

/// Sum of deficiencies above `noise_floor` against `½(∫|K| + 2π)`.
pub fn deficiency_sum_bound(
    surface: &Surface,
    curve: &MediatrixCurve,
    noise_floor: f64,
    resolution: usize,
) -> DeficiencyBudget {
    let flagged: Vec<(usize, f64)> = curve
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.deficiency > noise_floor)
        .map(|(i, p)| (i, p.deficiency))
        .collect();
    let sum = flagged.iter().map(|f| f.1).sum();
    let total_abs_curvature = surface.total_abs_curvature(resolution);
    let bound = 0.5 * (total_abs_curvature + TAU);
    DeficiencyBudget {
        flagged,
        sum,
        total_abs_curvature,
        bound,
        margin: bound - sum,
        noise_floor,
        holds: sum <= bound,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSample {
    pub start: ChartPoint,
    pub f_start: f64,
    pub moved: f64,
    pub beta_measured: f64,
    pub bound: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub samples: Vec<ProjectionSample>,
    pub violations: usize,
    pub max_ratio: f64,
    pub slack: f64,
    pub passed: bool,
}

/// Perturbs traced points by geodesic offsets up to `max_offset`, projects
/// them back and checks the travel against `|f_pq| / (1 − cos β)`.
#[allow(clippy::too_many_arguments)]
pub fn projection_bound_check(
    surface: &Surface,
    field_p: &DistanceField,
    field_q: &DistanceField,
    curve: &MediatrixCurve,
    count: usize,
    seed: u64,
    max_offset: f64,
    beta_floor: f64,
    tol_f: f64,
    slack: f64,
) -> Result<ProjectionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let i = rng.gen_range(0..curve.points.len());
        let angle = rng.gen_range(0.0..TAU);
        let r = rng.gen_range(0.05 * max_offset..max_offset);
        let x = &curve.points[i];
        let z = geodesic::exp_map_with_step(surface, &x.position, TangentDirection::new(angle), r, field_p.step)?;
        let z = surface.canonical(&z);
        let proj = project_to_mediatrix(surface, field_p, field_q, &z, beta_floor, tol_f)?;
        let beta = proj.beta_measured();
        let bound = proj.f_start.abs() / (1.0 - beta.cos()) + slack;
        samples.push(ProjectionSample {
            start: z,
            f_start: proj.f_start,
            moved: proj.moved,
            beta_measured: beta,
            bound,
            violated: proj.moved > bound,
        });
    }
    let violations = samples.iter().filter(|s| s.violated).count();
    let max_ratio = samples
        .iter()
        .filter(|s| s.bound > slack)
        .map(|s| s.moved / (s.bound - slack))
        .fold(0.0, f64::max);
    Ok(ProjectionReport {
        passed: violations == 0 && !samples.is_empty(),
        samples,
        violations,
        max_ratio,
        slack,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WedgeContainmentReport {
    pub rho: f64,
    pub slack: f64,
    pub checked: usize,
    pub failures: Vec<usize>,
    pub passed: bool,
}

pub fn wedge_containment_report(
    surface: &Surface,
    curve: &MediatrixCurve,
    rho: f64,
    slack: f64,
) -> Result<WedgeContainmentReport> {
    let results = (0..curve.points.len())
        .into_par_iter()
        .map(|i| wedge_containment_check(surface, curve, i, rho, slack).map(|ok| (i, ok)))
        .collect::<Result<Vec<_>>>()?;
    let failures: Vec<usize> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    Ok(WedgeContainmentReport {
        rho,
        slack,
        checked: results.len(),
        passed: failures.is_empty(),
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereOracleReport {
    pub hausdorff: f64,
    pub length: f64,
    pub expected_length: f64,
    pub hausdorff_tol: f64,
    pub length_tol: f64,
    pub passed: bool,
}

fn segment_distance(x: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let ab = b - a;
    let s = ((x - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (x - (a + ab * s)).norm()
}

/// Hausdorff distance between the traced curve and the great circle
/// bisecting `p` and `q` on a round sphere.
pub fn sphere_oracle(
    surface: &Surface,
    curve: &MediatrixCurve,
    hausdorff_tol: f64,
    length_tol: f64,
) -> Result<SphereOracleReport> {
    let SurfaceKind::RoundSphere { radius } = surface.spec().kind else {
        return Err(Error::InvalidSurface("the sphere oracle needs a round sphere".into()));
    };
    let p3 = surface.embed(&curve.p);
    let q3 = surface.embed(&curve.q);
    let normal = (p3 - q3).normalize();
    let pts: Vec<Vector3<f64>> = curve.points.iter().map(|p| Vector3::from(p.embedded)).collect();
    let to_circle = pts
        .iter()
        .map(|x| radius * (x.dot(&normal) / radius).clamp(-1.0, 1.0).asin().abs())
        .fold(0.0, f64::max);
    let e1 = normal
        .cross(&Vector3::z())
        .try_normalize(1e-12)
        .unwrap_or_else(|| normal.cross(&Vector3::x()).normalize());
    let e2 = normal.cross(&e1);
    let n = pts.len();
    let segments = if curve.closed { n } else { n - 1 };
    let from_circle = (0..4000)
        .map(|k| {
            let a = TAU * k as f64 / 4000.0;
            let c = (e1 * a.cos() + e2 * a.sin()) * radius;
            (0..segments)
                .map(|i| segment_distance(&c, &pts[i], &pts[(i + 1) % n]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let hausdorff = to_circle.max(from_circle);
    let length = curve.length();
    let expected_length = TAU * radius;
    Ok(SphereOracleReport {
        hausdorff,
        length,
        expected_length,
        hausdorff_tol,
        length_tol,
        passed: curve.closed && hausdorff <= hausdorff_tol && (length - expected_length).abs() <= length_tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveStructureReport {
    pub closed: bool,
    pub min_spacing: f64,
    pub max_spacing: f64,
    pub closing_gap: f64,
    pub min_nonadjacent_distance: f64,
    pub max_turning_angle: f64,
    pub max_residual: f64,
    pub min_beta: f64,
    pub passed: bool,
}

/// Spacing, simplicity and chord-turning checks on a traced curve. Turning
/// angles next to singular points (above `threshold`) are exempt.
pub fn curve_structure(curve: &MediatrixCurve, tol_f: f64, beta_min: f64, threshold: f64) -> CurveStructureReport {
    let pts: Vec<Vector3<f64>> = curve.points.iter().map(|p| Vector3::from(p.embedded)).collect();
    let n = pts.len();
    let spacings: Vec<f64> = pts.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let closing_gap = if n > 1 { (pts[0] - pts[n - 1]).norm() } else { 0.0 };
    let mut min_nonadjacent = f64::INFINITY;
    for i in 0..n {
        for j in i + 2..n {
            if curve.closed && i == 0 && j == n - 1 {
                continue;
            }
            min_nonadjacent = min_nonadjacent.min((pts[i] - pts[j]).norm());
        }
    }
    let singular = curve.singular_points(threshold);
    let mut max_turning: f64 = 0.0;
    let m = if curve.closed { n } else { n.saturating_sub(2) };
    for k in 0..m {
        let (a, b, c) = (k, (k + 1) % n, (k + 2) % n);
        if singular.contains(&b) {
            continue;
        }
        let u = pts[b] - pts[a];
        let v = pts[c] - pts[b];
        let cos = (u.dot(&v) / (u.norm() * v.norm())).clamp(-1.0, 1.0);
        max_turning = max_turning.max(cos.acos());
    }
    let step = curve.step;
    let min_spacing = spacings.iter().copied().fold(f64::INFINITY, f64::min);
    let max_spacing = spacings.iter().copied().fold(0.0, f64::max);
    let max_residual = curve.points.iter().map(|p| p.residual).fold(0.0, f64::max);
    let min_beta = curve.points.iter().map(|p| p.beta).fold(PI, f64::min);
    let passed = curve.closed
        && min_spacing >= 0.5 * step
        && max_spacing <= 2.0 * step
        && closing_gap <= 2.0 * step
        && min_nonadjacent >= 0.5 * step
        && max_turning <= 0.5 * PI
        && max_residual <= tol_f
        && min_beta >= beta_min;
    CurveStructureReport {
        closed: curve.closed,
        min_spacing,
        max_spacing,
        closing_gap,
        min_nonadjacent_distance: min_nonadjacent,
        max_turning_angle: max_turning,
        max_residual,
        min_beta,
        passed,
    }
}
