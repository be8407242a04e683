//! The mediatrix `L_pq`: pre-wedges and bisector directions at a point,
//! projection onto `L_pq` along a minimizing geodesic, and closed-curve
//! tracing by bisector prediction and projection correction.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::circle;
use crate::distance::{self, anchored, DistanceField, DistanceResult, Launch};
use crate::error::{Error, Result};
use crate::geodesic::{self, polar_coordinates, TangentDirection};
use crate::surface::{ChartPoint, Surface};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TracerSettings {
    pub step: f64,
    pub max_points: usize,
    pub tol_f: f64,
    pub beta_min: f64,
    pub deficiency_threshold: f64,
    pub wedge_slack: f64,
}

impl Default for TracerSettings {
    fn default() -> Self {
        TracerSettings {
            step: 0.02,
            max_points: 2000,
            tol_f: 1e-6,
            beta_min: 1e-2,
            deficiency_threshold: 5e-2,
            wedge_slack: 2e-2,
        }
    }
}

/// A closed arc `[start, start + opening]` (counter-clockwise) of the unit
/// tangent circle whose endpoints are minimizing directions to `p` and `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreWedge {
    pub endpoint_p: TangentDirection,
    pub endpoint_q: TangentDirection,
    pub midpoint: TangentDirection,
    pub opening: f64,
    /// Counter-clockwise start of the arc; one of the two endpoints.
    pub start: f64,
}

impl PreWedge {
    pub fn contains(&self, angle: f64, slack: f64) -> bool {
        circle::in_arc(angle, self.start, self.opening, slack)
    }
}

/// Pre-wedges formed by two direction sets, in counter-clockwise order of
/// their start angle. Every circularly adjacent pair of directions from
/// different sets bounds one pre-wedge.
pub fn prewedges_from_sets(theta_p: &[f64], theta_q: &[f64]) -> Vec<PreWedge> {
    let mut all: Vec<(f64, bool)> = theta_p
        .iter()
        .map(|&a| (circle::normalize(a), true))
        .chain(theta_q.iter().map(|&a| (circle::normalize(a), false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = all.len();
    let mut out = Vec::new();
    for i in 0..n {
        let (a, a_is_p) = all[i];
        let (b, b_is_p) = all[(i + 1) % n];
        if a_is_p == b_is_p {
            continue;
        }
        let opening = circle::ccw_gap(a, b);
        let (ep, eq) = if a_is_p { (a, b) } else { (b, a) };
        out.push(PreWedge {
            endpoint_p: TangentDirection::new(ep),
            endpoint_q: TangentDirection::new(eq),
            midpoint: TangentDirection::new(a + 0.5 * opening),
            opening,
            start: a,
        });
    }
    out
}

/// `|π − arc(θ̂₁, θ̂₂)|` for a point with exactly two pre-wedges.
pub fn deficiency_of(prewedges: &[PreWedge]) -> Option<f64> {
    match prewedges {
        [a, b] => Some((PI - circle::arc_distance(a.midpoint.angle, b.midpoint.angle)).abs()),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediatrixPoint {
    pub position: ChartPoint,
    pub embedded: [f64; 3],
    pub prewedges: Vec<PreWedge>,
    /// Separation between the two minimizing direction sets.
    pub beta: f64,
    /// Zero unless the point has exactly two pre-wedges with non-opposite
    /// midpoints; branch points report 0 and are listed separately.
    pub deficiency: f64,
    pub residual: f64,
    pub distance_p: f64,
    pub distance_q: f64,
    pub launches_p: Vec<Launch>,
    pub launches_q: Vec<Launch>,
}

impl MediatrixPoint {
    pub fn is_branch(&self) -> bool {
        self.prewedges.len() > 2
    }

    pub fn directions_p(&self) -> Vec<f64> {
        self.launches_p.iter().map(|l| l.arrival).collect()
    }

    pub fn directions_q(&self) -> Vec<f64> {
        self.launches_q.iter().map(|l| l.arrival).collect()
    }

    /// Index of the pre-wedge whose midpoint is closest to `angle`.
    pub fn closest_prewedge(&self, angle: f64) -> usize {
        (0..self.prewedges.len())
            .min_by(|&i, &j| {
                let di = circle::arc_distance(self.prewedges[i].midpoint.angle, angle);
                let dj = circle::arc_distance(self.prewedges[j].midpoint.angle, angle);
                di.total_cmp(&dj)
            })
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediatrixCurve {
    pub p: ChartPoint,
    pub q: ChartPoint,
    pub points: Vec<MediatrixPoint>,
    pub step: f64,
    pub closed: bool,
    pub branch_points: Vec<usize>,
}

impl MediatrixCurve {
    /// Polyline length through the embedded points, including the closing
    /// segment for closed curves.
    pub fn length(&self) -> f64 {
        let pts: Vec<Vector3<f64>> = self.points.iter().map(|p| Vector3::from(p.embedded)).collect();
        let mut len: f64 = pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        if self.closed && pts.len() > 1 {
            len += (pts[0] - pts[pts.len() - 1]).norm();
        }
        len
    }

    /// Indices of points whose deficiency exceeds `threshold`.
    pub fn singular_points(&self, threshold: f64) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&i| self.points[i].deficiency > threshold)
            .collect()
    }
}

/// The two distance fields of a point pair on a surface.
#[derive(Clone, Copy)]
pub struct Pair<'a> {
    pub surface: &'a Surface,
    pub field_p: &'a DistanceField,
    pub field_q: &'a DistanceField,
}

/// Distances and minimizing launches to both sources.
#[derive(Debug, Clone)]
pub(crate) struct Eval {
    pub dp: f64,
    pub dq: f64,
    pub launches_p: Vec<Launch>,
    pub launches_q: Vec<Launch>,
}

impl Eval {
    pub fn f(&self) -> f64 {
        self.dq - self.dp
    }

    pub fn separation(&self) -> f64 {
        let q: Vec<f64> = self.launches_q.iter().map(|l| l.arrival).collect();
        self.launches_p
            .iter()
            .map(|l| circle::distance_to_set(l.arrival, &q))
            .fold(PI, f64::min)
    }
}

fn check_result(x: &ChartPoint, r: &DistanceResult) -> Result<()> {
    if r.degenerate || r.directions.is_empty() {
        Err(Error::Degenerate(*x))
    } else {
        Ok(())
    }
}

impl<'a> Pair<'a> {
    pub fn new(surface: &'a Surface, field_p: &'a DistanceField, field_q: &'a DistanceField) -> Self {
        Pair {
            surface,
            field_p,
            field_q,
        }
    }

    pub fn global(&self, x: &ChartPoint) -> Result<(DistanceResult, DistanceResult)> {
        let rp = distance::distance_and_directions(self.surface, self.field_p, x)?;
        let rq = distance::distance_and_directions(self.surface, self.field_q, x)?;
        Ok((rp, rq))
    }

    pub(crate) fn global_eval(&self, x: &ChartPoint) -> Result<Eval> {
        let (rp, rq) = self.global(x)?;
        check_result(x, &rp)?;
        check_result(x, &rq)?;
        Ok(Eval {
            dp: rp.distance,
            dq: rq.distance,
            launches_p: rp.launches,
            launches_q: rq.launches,
        })
    }

    /// Local continuation of known routes to a nearby point: each launch is
    /// refined toward `x`; the shortest ones (within `rel_tol_min`) are kept.
    pub(crate) fn anchored_side(&self, field: &DistanceField, x: &ChartPoint, from: &[Launch]) -> Result<Vec<Launch>> {
        let mut out: Vec<Launch> = Vec::with_capacity(from.len());
        let mut err = None;
        for l in from {
            match anchored(self.surface, field, x, l.angle, l.length) {
                Ok(r) => out.push(r),
                Err(e) => err = Some(e),
            }
        }
        let min = out.iter().map(|l| l.length).fold(f64::INFINITY, f64::min);
        if !min.is_finite() {
            return Err(err.unwrap_or_else(|| Error::Solver("no route to continue".into())));
        }
        let cutoff = min * (1.0 + field.settings.rel_tol_min);
        out.retain(|l| l.length <= cutoff);
        // Distinct routes may have converged onto the same geodesic.
        out.sort_by(|a, b| a.arrival.total_cmp(&b.arrival));
        out.dedup_by(|a, b| circle::arc_distance(a.arrival, b.arrival) < field.settings.cluster_gap);
        Ok(out)
    }

    pub(crate) fn anchored_eval(&self, x: &ChartPoint, from_p: &[Launch], from_q: &[Launch]) -> Result<Eval> {
        let lp = self.anchored_side(self.field_p, x, from_p)?;
        let lq = self.anchored_side(self.field_q, x, from_q)?;
        let min = |v: &[Launch]| v.iter().map(|l| l.length).fold(f64::INFINITY, f64::min);
        Ok(Eval {
            dp: min(&lp),
            dq: min(&lq),
            launches_p: lp,
            launches_q: lq,
        })
    }

    pub(crate) fn make_point(&self, x: &ChartPoint, e: &Eval, settings: &TracerSettings) -> Result<MediatrixPoint> {
        let dirs_p: Vec<f64> = e.launches_p.iter().map(|l| l.arrival).collect();
        let dirs_q: Vec<f64> = e.launches_q.iter().map(|l| l.arrival).collect();
        let beta = e.separation();
        if beta < settings.beta_min {
            return Err(Error::Separation {
                point: *x,
                separation: beta,
                floor: settings.beta_min,
            });
        }
        let prewedges = prewedges_from_sets(&dirs_p, &dirs_q);
        if prewedges.len() < 2 {
            return Err(Error::Degenerate(*x));
        }
        let e3 = self.surface.embed(x);
        Ok(MediatrixPoint {
            position: *x,
            embedded: [e3.x, e3.y, e3.z],
            deficiency: deficiency_of(&prewedges).unwrap_or(0.0),
            prewedges,
            beta,
            residual: e.f().abs(),
            distance_p: e.dp,
            distance_q: e.dq,
            launches_p: e.launches_p.clone(),
            launches_q: e.launches_q.clone(),
        })
    }
}

/// Pre-wedges at `x` from globally computed direction sets.
pub fn prewedges_at(
    surface: &Surface,
    field_p: &DistanceField,
    field_q: &DistanceField,
    x: &ChartPoint,
    settings: &TracerSettings,
) -> Result<Vec<PreWedge>> {
    let pair = Pair::new(surface, field_p, field_q);
    let e = pair.global_eval(x)?;
    Ok(pair.make_point(x, &e, settings)?.prewedges)
}

/// Outcome of a projection onto the mediatrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub point: ChartPoint,
    /// Geodesic travel length from the start to `point`.
    pub moved: f64,
    pub f_start: f64,
    pub f_end: f64,
    pub beta_start: f64,
    pub beta_end: f64,
}

impl Projection {
    /// `min(β_start, β_end)`, the separation used to evaluate the travel bound.
    pub fn beta_measured(&self) -> f64 {
        self.beta_start.min(self.beta_end)
    }
}

/// One projection pass: follows the minimizing geodesic toward the farther
/// source until `f_pq` changes sign, evaluating the nearer distance by route
/// continuation. Returns the crossing and the travel length.
pub(crate) fn project_pass(
    pair: &Pair,
    z: &ChartPoint,
    e0: &Eval,
    beta_floor: f64,
    tol: f64,
) -> Result<(ChartPoint, f64)> {
    let f0 = e0.f();
    if f0.abs() <= tol {
        return Ok((*z, 0.0));
    }
    let beta = e0.separation();
    if beta < beta_floor {
        return Err(Error::Separation {
            point: *z,
            separation: beta,
            floor: beta_floor,
        });
    }
    let toward_q = f0 > 0.0;
    let (far, near, near_field, d_far) = if toward_q {
        (&e0.launches_q, &e0.launches_p, pair.field_p, e0.dq)
    } else {
        (&e0.launches_p, &e0.launches_q, pair.field_q, e0.dp)
    };
    let heading = far
        .iter()
        .min_by(|a, b| a.length.total_cmp(&b.length))
        .expect("nonempty route set")
        .arrival;
    let near_dirs: Vec<f64> = near.iter().map(|l| l.arrival).collect();
    let delta = circle::distance_to_set(heading, &near_dirs).max(beta_floor);
    let budget = f0.abs() / (1.0 - beta_floor.cos());
    let step = pair.field_p.step;
    let sign = f0.signum();
    // Signed f along the path, normalized so it starts positive.
    let g = |tau: f64| -> Result<(f64, ChartPoint)> {
        let y = if tau == 0.0 {
            *z
        } else {
            geodesic::shoot(pair.surface, z, heading, tau, step)?.0
        };
        let routes = pair.anchored_side(near_field, &y, near)?;
        let d_near = routes.iter().map(|l| l.length).fold(f64::INFINITY, f64::min);
        let f = if toward_q {
            (d_far - tau) - d_near
        } else {
            d_near - (d_far - tau)
        };
        Ok((sign * f, y))
    };
    let guess = (f0.abs() / (1.0 - delta.cos())).min(budget);
    let (mut a, mut ga) = (0.0, f0.abs());
    let mut bracket = None;
    for tau in [guess * 1.25, budget] {
        let tau = tau.min(budget);
        let (gt, y) = g(tau)?;
        if gt.abs() <= tol {
            return Ok((y, tau));
        }
        if gt < 0.0 {
            bracket = Some((tau, gt));
            break;
        }
        a = tau;
        ga = gt;
    }
    let Some((mut b, mut gb)) = bracket else {
        return Err(Error::Projection(format!(
            "no sign change of f_pq within the travel budget {budget:.3e} from {z:?} (|f| = {:.3e})",
            f0.abs()
        )));
    };
    // Illinois regula falsi.
    let mut side = 0;
    for _ in 0..100 {
        let c = (a * gb - b * ga) / (gb - ga);
        let (gc, y) = g(c)?;
        if gc.abs() <= tol || (b - a).abs() < 1e-15 {
            return Ok((y, c));
        }
        if gc > 0.0 {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        } else {
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        }
    }
    Err(Error::Projection(format!("root finding did not converge from {z:?}")))
}

/// Projection with global distance evaluation at every pass.
pub(crate) fn project_global(
    pair: &Pair,
    z: &ChartPoint,
    e0: Eval,
    beta_floor: f64,
    tol: f64,
) -> Result<(ChartPoint, Eval, Projection)> {
    let f_start = e0.f();
    let beta_start = e0.separation();
    let mut point = *z;
    let mut e = e0;
    let mut moved = 0.0;
    for _ in 0..6 {
        if e.f().abs() <= tol {
            let beta_end = e.separation();
            return Ok((
                point,
                e.clone(),
                Projection {
                    point,
                    moved,
                    f_start,
                    f_end: e.f(),
                    beta_start,
                    beta_end,
                },
            ));
        }
        let (next, travel) = project_pass(pair, &point, &e, beta_floor, 0.25 * tol)?;
        moved += travel;
        point = pair.surface.canonical(&next);
        e = pair.global_eval(&point)?;
    }
    Err(Error::Projection(format!(
        "residual {:.3e} persists after repeated passes from {z:?}",
        e.f().abs()
    )))
}

/// Moves `z` onto `L_pq` along a minimizing geodesic toward the farther of
/// `p`, `q`. The travel must respect `|f_pq(z)| / (1 − cos β_floor)`.
pub fn project_to_mediatrix(
    surface: &Surface,
    field_p: &DistanceField,
    field_q: &DistanceField,
    z: &ChartPoint,
    beta_floor: f64,
    tol_f: f64,
) -> Result<Projection> {
    let pair = Pair::new(surface, field_p, field_q);
    let e0 = pair.global_eval(z)?;
    let beta = e0.separation();
    let rho = 0.5 * surface.injectivity_bound();
    let epsilon = 0.5 * rho * (1.0 - beta.cos());
    if e0.f().abs() > epsilon {
        return Err(Error::Projection(format!(
            "|f_pq| = {:.3e} exceeds ε = {epsilon:.3e} at {z:?}",
            e0.f().abs()
        )));
    }
    let (_, _, proj) = project_global(&pair, z, e0, beta_floor, tol_f)?;
    let bound = proj.f_start.abs() / (1.0 - beta_floor.cos()) + tol_f;
    if proj.moved > bound {
        return Err(Error::Projection(format!(
            "travel {:.3e} exceeds the bound {bound:.3e}",
            proj.moved
        )));
    }
    Ok(proj)
}

/// A point of `L_pq` halfway along a minimizing geodesic from `p` to `q`.
pub fn seed_point(
    surface: &Surface,
    field_p: &DistanceField,
    field_q: &DistanceField,
    tol_f: f64,
) -> Result<ChartPoint> {
    let pair = Pair::new(surface, field_p, field_q);
    let r = distance::distance_and_directions(surface, field_p, &field_q.source)?;
    let launch = r
        .launches
        .iter()
        .min_by(|a, b| a.length.total_cmp(&b.length))
        .copied()
        .ok_or_else(|| Error::Solver("no geodesic from p to q".into()))?;
    let mid = geodesic::shoot(
        surface,
        &field_p.source,
        launch.angle,
        0.5 * launch.length,
        field_p.step,
    )?
    .0;
    let mid = surface.canonical(&mid);
    let e = pair.global_eval(&mid)?;
    if e.f().abs() <= tol_f {
        return Ok(mid);
    }
    let (z, _, _) = project_global(&pair, &mid, e, 1e-3, tol_f)?;
    Ok(z)
}

fn chord(a: &MediatrixPoint, b: &MediatrixPoint) -> f64 {
    (Vector3::from(a.embedded) - Vector3::from(b.embedded)).norm()
}

struct Tracer<'a> {
    pair: Pair<'a>,
    settings: &'a TracerSettings,
}

impl Tracer<'_> {
    /// Anchored projection of the point at distance `s` along `heading` from `x`.
    fn corrected(
        &self,
        x: &MediatrixPoint,
        heading: f64,
        s: f64,
        lp: &[Launch],
        lq: &[Launch],
    ) -> Result<(ChartPoint, Eval)> {
        let surf = self.pair.surface;
        let y = geodesic::shoot(surf, &x.position, heading, s, self.pair.field_p.step)?.0;
        let y = surf.canonical(&y);
        let e = self.pair.anchored_eval(&y, lp, lq)?;
        let (z, _) = project_pass(&self.pair, &y, &e, self.settings.beta_min, 0.25 * self.settings.tol_f)?;
        let z = surf.canonical(&z);
        let e = self.pair.anchored_eval(&z, lp, lq)?;
        Ok((z, e))
    }

    /// Finds where an old route `a` and a new route `b` to the same source tie
    /// along the spoke from `x`.
    fn localize(
        &self,
        x: &MediatrixPoint,
        heading: f64,
        side_p: bool,
        old: &[Launch],
        new: &[Launch],
    ) -> Result<MediatrixPoint> {
        let (lp, lq): (Vec<Launch>, Vec<Launch>) = if side_p {
            (old.iter().chain(new).copied().collect(), x.launches_q.clone())
        } else {
            (x.launches_p.clone(), old.iter().chain(new).copied().collect())
        };
        let field = if side_p { self.pair.field_p } else { self.pair.field_q };
        let h = |s: f64| -> Result<(f64, ChartPoint)> {
            let (z, _) = self.corrected(x, heading, s, &lp, &lq)?;
            let la = self.pair.anchored_side(field, &z, old)?;
            let lb = self.pair.anchored_side(field, &z, new)?;
            let shortest = |v: &[Launch]| v.iter().map(|l| l.length).fold(f64::INFINITY, f64::min);
            Ok((shortest(&la) - shortest(&lb), z))
        };
        let step = self.settings.step;
        let (mut a, mut b) = (0.0, step);
        let (mut ha, _) = h(a)?;
        let (mut hb, mut zb) = h(b)?;
        if ha > 1e-9 || hb < -1e-9 {
            return Err(Error::Trace {
                reason: format!("route switch near {:?} could not be bracketed", x.position),
                partial: Box::new(MediatrixCurve {
                    p: self.pair.field_p.source,
                    q: self.pair.field_q.source,
                    points: vec![x.clone()],
                    step,
                    closed: false,
                    branch_points: vec![],
                }),
            });
        }
        let mut side = 0;
        for _ in 0..80 {
            let c = if hb - ha > 0.0 {
                (a * hb - b * ha) / (hb - ha)
            } else {
                0.5 * (a + b)
            };
            let (hc, zc) = h(c)?;
            zb = zc;
            if hc.abs() < 1e-11 || b - a < 1e-12 {
                break;
            }
            if hc < 0.0 {
                a = c;
                ha = hc;
                if side == -1 {
                    hb *= 0.5;
                }
                side = -1;
            } else {
                b = c;
                hb = hc;
                if side == 1 {
                    ha *= 0.5;
                }
                side = 1;
            }
        }
        let e = self.pair.global_eval(&zb)?;
        let (z, e, _) = project_global(&self.pair, &zb, e, self.settings.beta_min, self.settings.tol_f)?;
        self.pair.make_point(&z, &e, self.settings)
    }

    fn abort(&self, points: &[MediatrixPoint], branch: &[usize], reason: String) -> Error {
        Error::Trace {
            reason,
            partial: Box::new(MediatrixCurve {
                p: self.pair.field_p.source,
                q: self.pair.field_q.source,
                points: points.to_vec(),
                step: self.settings.step,
                closed: false,
                branch_points: branch.to_vec(),
            }),
        }
    }

    fn run(&self) -> Result<MediatrixCurve> {
        let st = self.settings;
        let surf = self.pair.surface;
        let seed = seed_point(surf, self.pair.field_p, self.pair.field_q, st.tol_f)?;
        let e = self.pair.global_eval(&seed)?;
        let mut points = vec![self.pair.make_point(&seed, &e, st)?];
        let mut branch = Vec::new();
        if points[0].is_branch() {
            branch.push(0);
        }
        let mut travel: Option<Vector3<f64>> = None;
        let mut closed = false;
        while points.len() < st.max_points {
            let x = points.last().expect("nonempty").clone();
            let k = match travel {
                Some(t) => x.closest_prewedge(surf.tangent_angle(&x.position, &t)),
                None => 0,
            };
            let heading = x.prewedges[k].midpoint.angle;
            let step_result = self.corrected(&x, heading, st.step, &x.launches_p, &x.launches_q);
            let (z, anchored_e) = match step_result {
                Ok(v) => v,
                Err(e) => return Err(self.abort(&points, &branch, format!("corrector failed: {e}"))),
            };
            let global = match self.pair.global_eval(&z) {
                Ok(g) => g,
                Err(e) => return Err(self.abort(&points, &branch, format!("distance query failed: {e}"))),
            };
            let switch_tol = 1e-8;
            let switched_p = global.dp < anchored_e.dp - switch_tol;
            let switched_q = global.dq < anchored_e.dq - switch_tol;
            let next = if switched_p || switched_q {
                let (old, new) = if switched_p {
                    (&x.launches_p, &global.launches_p)
                } else {
                    (&x.launches_q, &global.launches_q)
                };
                match self.localize(&x, heading, switched_p, old, new) {
                    Ok(sp) => {
                        let last = points.len() - 1;
                        if chord(&x, &sp) < 0.5 * st.step {
                            let behind = if last > 0 { &points[last - 1] } else { &x };
                            let dir = Vector3::from(sp.embedded) - Vector3::from(behind.embedded);
                            if dir.norm() > 0.0 {
                                travel = Some(dir.normalize());
                            }
                            points[last] = sp;
                            branch.retain(|&b| b != last);
                            if points[last].is_branch() {
                                branch.push(last);
                            }
                            continue;
                        }
                        sp
                    }
                    Err(e) => {
                        return Err(self.abort(&points, &branch, format!("singular point localization failed: {e}")))
                    }
                }
            } else {
                let projected = if global.f().abs() > st.tol_f {
                    project_global(&self.pair, &z, global, st.beta_min, st.tol_f).map(|(z, e, _)| (z, e))
                } else {
                    Ok((z, global))
                };
                match projected.and_then(|(z, e)| self.pair.make_point(&z, &e, st)) {
                    Ok(p) => p,
                    Err(e) => return Err(self.abort(&points, &branch, format!("corrector failed: {e}"))),
                }
            };
            let d_seed = chord(&next, &points[0]);
            travel = Some((Vector3::from(next.embedded) - Vector3::from(x.embedded)).normalize());
            if points.len() >= 10 && d_seed <= 1.5 * st.step {
                if d_seed >= 0.5 * st.step {
                    if next.is_branch() {
                        branch.push(points.len());
                    }
                    points.push(next);
                }
                closed = true;
                break;
            }
            if next.is_branch() {
                branch.push(points.len());
            }
            points.push(next);
        }
        let curve = MediatrixCurve {
            p: self.pair.field_p.source,
            q: self.pair.field_q.source,
            points,
            step: st.step,
            closed,
            branch_points: branch,
        };
        if closed {
            Ok(curve)
        } else {
            Err(Error::NonClosure {
                partial: Box::new(curve),
            })
        }
    }
}

/// Traces `L_pq` from a seed point as a closed polyline with spacing `step`.
pub fn trace_mediatrix(
    surface: &Surface,
    field_p: &DistanceField,
    field_q: &DistanceField,
    settings: &TracerSettings,
) -> Result<MediatrixCurve> {
    if settings.step > surface.injectivity_bound() / 20.0 {
        return Err(Error::config(
            "tracer.step",
            format!(
                "must not exceed injectivity_bound/20 = {}",
                surface.injectivity_bound() / 20.0
            ),
        ));
    }
    Tracer {
        pair: Pair::new(surface, field_p, field_q),
        settings,
    }
    .run()
}

/// Whether every curve point within distance `rho` of point `x_index` lies,
/// in polar coordinates about that point, inside one of its pre-wedges.
pub fn wedge_containment_check(
    surface: &Surface,
    curve: &MediatrixCurve,
    x_index: usize,
    rho: f64,
    slack: f64,
) -> Result<bool> {
    let x = &curve.points[x_index];
    let x3 = Vector3::from(x.embedded);
    for (j, z) in curve.points.iter().enumerate() {
        if j == x_index || (Vector3::from(z.embedded) - x3).norm() >= rho {
            continue;
        }
        let (theta, d) = polar_coordinates(surface, &x.position, &z.position)?;
        if d >= rho || d == 0.0 {
            continue;
        }
        if !x.prewedges.iter().any(|w| w.contains(theta.angle, slack)) {
            return Ok(false);
        }
    }
    Ok(true)
}
