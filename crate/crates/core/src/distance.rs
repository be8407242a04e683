//! Global distance `d(x, p)` and the set of minimizing directions at `x`.
//!
//! A fan of geodesics is shot from `p` once. Queries harvest fan samples near
//! `x`, keep one representative per family of neighbouring rays, refine each
//! into an exact connecting geodesic, and cluster the shortest ones by their
//! arrival direction at `x`.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle;
use crate::error::{Error, Result};
use crate::geodesic::{self, refine_shot, Integrator, TangentDirection};
use crate::surface::{ChartPoint, Surface};

/// Below this chord length a query is answered by a single direct shot: the
/// minimizing geodesic is unique well inside the injectivity bound.
const DIRECT_RANGE: f64 = 0.05;
const TARGET_SAMPLE_SPACING: f64 = 5e-3;
const REFINE_TOL: f64 = 1e-11;
/// Rounds of gap bisection after the uniform fan.
const REFINE_LEVELS: usize = 4;
/// Gap width, relative to `h_cover`, that calls for an extra ray.
const GAP_TRIGGER: f64 = 0.75;
const MIN_RAY_SPACING: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceSettings {
    pub n_fan: usize,
    /// Fan ray length; `1.1 × diameter estimate` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_length: Option<f64>,
    pub rel_tol_min: f64,
    pub tol_hit: f64,
    pub cluster_gap: f64,
    /// Coverage radius for fan samples.
    pub h_cover: f64,
    /// Integration step; the surface default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl Default for DistanceSettings {
    fn default() -> Self {
        DistanceSettings {
            n_fan: 2048,
            max_length: None,
            rel_tol_min: 1e-4,
            tol_hit: 1e-6,
            cluster_gap: 1e-2,
            h_cover: 4.0 * PI / 2048.0,
            step: None,
        }
    }
}

/// Launch data of one minimizing geodesic from the source to a query point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Launch {
    /// Direction at the source.
    pub angle: f64,
    pub length: f64,
    /// Direction at the query point, pointing back toward the source.
    pub arrival: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub ray: usize,
    pub sample_length: f64,
    pub sample_gap: f64,
    pub launch: Option<Launch>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub base: ChartPoint,
    pub distance: f64,
    /// The minimizing direction set `Θ_{x,p}` in circular order.
    pub directions: Vec<TangentDirection>,
    /// One launch per direction, same order.
    pub launches: Vec<Launch>,
    /// Minimizers saturate the fan (or `x` is the source); `directions` is
    /// then not a faithful description of `Θ`.
    pub degenerate: bool,
    #[serde(skip)]
    pub candidates: Vec<Candidate>,
}

impl DistanceResult {
    pub fn angles(&self) -> Vec<f64> {
        self.directions.iter().map(|d| d.angle).collect()
    }

    /// Writes the refined candidate list as CSV.
    pub fn write_candidates_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "ray",
            "sample_length",
            "sample_gap",
            "launch_angle",
            "length",
            "arrival",
            "accepted",
        ])?;
        for c in &self.candidates {
            let (a, l, r) = c
                .launch
                .map(|l| (l.angle.to_string(), l.length.to_string(), l.arrival.to_string()))
                .unwrap_or_default();
            w.write_record([
                c.ray.to_string(),
                c.sample_length.to_string(),
                c.sample_gap.to_string(),
                a,
                l,
                r,
                c.accepted.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sorted 3D cell index over fan samples.
#[derive(Debug, Clone)]
struct CellIndex {
    cell: f64,
    origin: Vector3<f64>,
    dims: [u64; 3],
    entries: Vec<(u64, u32)>,
}

impl CellIndex {
    fn build(points: &[[f32; 3]], valid: impl Fn(usize) -> bool, cell: f64) -> Self {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for (i, p) in points.iter().enumerate() {
            if valid(i) {
                let v = Vector3::new(p[0] as f64, p[1] as f64, p[2] as f64);
                lo = lo.inf(&v);
                hi = hi.sup(&v);
            }
        }
        let origin = lo - Vector3::repeat(2.0 * cell);
        let span = hi - origin + Vector3::repeat(2.0 * cell);
        let dims = [
            (span.x / cell).ceil().max(1.0) as u64 + 1,
            (span.y / cell).ceil().max(1.0) as u64 + 1,
            (span.z / cell).ceil().max(1.0) as u64 + 1,
        ];
        let mut index = CellIndex {
            cell,
            origin,
            dims,
            entries: Vec::new(),
        };
        let mut entries: Vec<(u64, u32)> = points
            .iter()
            .enumerate()
            .filter(|(i, _)| valid(*i))
            .map(|(i, p)| {
                let c = index.cell_of(&Vector3::new(p[0] as f64, p[1] as f64, p[2] as f64));
                (index.key(c), i as u32)
            })
            .collect();
        entries.sort_unstable();
        index.entries = entries;
        index
    }

    fn cell_of(&self, x: &Vector3<f64>) -> [i64; 3] {
        let r = (x - self.origin) / self.cell;
        [r.x.floor() as i64, r.y.floor() as i64, r.z.floor() as i64]
    }

    fn key(&self, c: [i64; 3]) -> u64 {
        c[0] as u64 + self.dims[0] * (c[1] as u64 + self.dims[1] * c[2] as u64)
    }

    /// Sample indices in the 27 cells around `x`.
    fn near(&self, x: &Vector3<f64>, mut f: impl FnMut(u32)) {
        self.any_near(x, |i| {
            f(i);
            false
        });
    }

    /// Like `near`, stopping at the first index for which `f` holds.
    fn any_near(&self, x: &Vector3<f64>, mut f: impl FnMut(u32) -> bool) -> bool {
        let c = self.cell_of(x);
        // Centre cell first: most early exits happen there.
        let offsets = std::iter::once([0, 0, 0]).chain(
            (0..27)
                .map(|k| [k % 3 - 1, k / 3 % 3 - 1, k / 9 - 1])
                .filter(|o| *o != [0, 0, 0]),
        );
        for o in offsets {
            let cc = [c[0] + o[0], c[1] + o[1], c[2] + o[2]];
            if (0..3).any(|i| cc[i] < 0 || cc[i] as u64 >= self.dims[i]) {
                continue;
            }
            let key = self.key(cc);
            let start = self.entries.partition_point(|e| e.0 < key);
            for e in &self.entries[start..] {
                if e.0 != key {
                    break;
                }
                if f(e.1) {
                    return true;
                }
            }
        }
        false
    }
}

/// A fan of `n_fan` geodesics from `source`, stored as embedded samples.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub source: ChartPoint,
    pub settings: DistanceSettings,
    pub max_length: f64,
    pub step: f64,
    pub h_sample: f64,
    source3: Vector3<f64>,
    per_ray: usize,
    /// Launch angles in increasing order; neighbouring rays are adjacent.
    angles: Vec<f64>,
    positions: Vec<[f32; 3]>,
    index: CellIndex,
}

impl DistanceField {
    /// Number of rays, refinement included.
    pub fn n_fan(&self) -> usize {
        self.angles.len()
    }

    pub fn launch_angle(&self, ray: usize) -> f64 {
        self.angles[ray]
    }

    /// Re-integrates fan ray `ray` as a full trace.
    pub fn fan_trace(&self, surface: &Surface, ray: usize) -> Result<geodesic::GeodesicTrace> {
        geodesic::integrate_geodesic(
            surface,
            &self.source,
            TangentDirection::new(self.launch_angle(ray)),
            self.max_length,
            self.step,
        )
    }

    fn sample(&self, idx: u32) -> (usize, usize, Vector3<f64>) {
        let i = idx as usize;
        let p = self.positions[i];
        (
            i / self.per_ray,
            i % self.per_ray,
            Vector3::new(p[0] as f64, p[1] as f64, p[2] as f64),
        )
    }

    /// Distance from `x` to the nearest fan sample, if one lies within the
    /// harvest radius.
    pub fn nearest_sample_gap(&self, x: &Vector3<f64>) -> Option<f64> {
        let mut best: Option<f64> = None;
        self.index.near(x, |idx| {
            let d = (self.sample(idx).2 - x).norm();
            if best.is_none_or(|b| d < b) {
                best = Some(d);
            }
        });
        best
    }
}

fn harvest_radius(settings: &DistanceSettings) -> f64 {
    3.0 * settings.h_cover
}

pub fn build_field(surface: &Surface, p: &ChartPoint, settings: &DistanceSettings) -> Result<DistanceField> {
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::config(format!("distance.{name}"), "must be positive"))
        }
    };
    positive("rel_tol_min", settings.rel_tol_min)?;
    positive("tol_hit", settings.tol_hit)?;
    positive("cluster_gap", settings.cluster_gap)?;
    positive("h_cover", settings.h_cover)?;
    if settings.n_fan < 3 {
        return Err(Error::config("distance.n_fan", "at least 3 rays are required"));
    }
    if !surface.in_domain(p) {
        return Err(Error::Domain {
            point: *p,
            chart: p.chart.name(),
        });
    }
    let max_length = settings.max_length.unwrap_or(1.1 * surface.diameter_estimate());
    positive("max_length", max_length)?;
    let step = settings.step.unwrap_or_else(|| geodesic::default_step(surface));
    positive("step", step)?;
    let stride = ((TARGET_SAMPLE_SPACING / step).round() as usize).max(1);
    let h_sample = stride as f64 * step;
    let per_ray = (max_length / h_sample).floor() as usize + 1;
    let trace = |angle: f64| -> Ray {
        let mut out = Vec::with_capacity(per_ray);
        let Ok(mut it) = Integrator::new(surface, p, angle) else {
            return Ray {
                angle,
                points: vec![[0.0; 3]; per_ray],
                valid: 0,
            };
        };
        let push = |out: &mut Vec<[f32; 3]>, it: &Integrator| {
            let x = it.position3();
            out.push([x.x as f32, x.y as f32, x.z as f32]);
        };
        push(&mut out, &it);
        'outer: while out.len() < per_ray {
            for _ in 0..stride {
                if it.step(step).is_err() {
                    break 'outer;
                }
            }
            push(&mut out, &it);
        }
        let valid = out.len();
        out.resize(per_ray, [0.0; 3]);
        Ray {
            angle,
            points: out,
            valid,
        }
    };
    let n = settings.n_fan;
    let mut rays: Vec<Ray> = (0..n)
        .into_par_iter()
        .map(|i| trace(TAU * i as f64 / n as f64))
        .collect();
    let mut index = index_rays(&rays, per_ray, settings);
    for _ in 0..REFINE_LEVELS {
        let inserted: Vec<Ray> = thin_gaps(&rays, &index, per_ray, settings)
            .into_par_iter()
            .map(&trace)
            .collect();
        if inserted.is_empty() {
            break;
        }
        rays.extend(inserted);
        rays.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        index = index_rays(&rays, per_ray, settings);
    }
    let angles = rays.iter().map(|r| r.angle).collect();
    let mut positions = Vec::with_capacity(rays.len() * per_ray);
    for r in rays {
        positions.extend_from_slice(&r.points);
    }
    let field = DistanceField {
        source: *p,
        settings: settings.clone(),
        max_length,
        step,
        h_sample,
        source3: surface.embed(p),
        per_ray,
        angles,
        positions,
        index,
    };
    check_coverage(surface, &field)?;
    Ok(field)
}

struct Ray {
    angle: f64,
    points: Vec<[f32; 3]>,
    valid: usize,
}

fn index_rays(rays: &[Ray], per_ray: usize, settings: &DistanceSettings) -> CellIndex {
    let points: Vec<[f32; 3]> = rays.iter().flat_map(|r| r.points.iter().copied()).collect();
    CellIndex::build(
        &points,
        |i| (i % per_ray) < rays[i / per_ray].valid,
        harvest_radius(settings),
    )
}

/// Launch angles bisecting neighbouring rays that drift apart where no other
/// part of the fan fills the gap between them.
fn thin_gaps(rays: &[Ray], index: &CellIndex, per_ray: usize, settings: &DistanceSettings) -> Vec<f64> {
    let m = rays.len();
    let point = |k: usize| {
        let p = index_point(rays, per_ray, k);
        Vector3::new(p[0] as f64, p[1] as f64, p[2] as f64)
    };
    let trigger = GAP_TRIGGER * settings.h_cover;
    (0..m)
        .into_par_iter()
        .filter_map(|k| {
            let (a, b) = (&rays[k], &rays[(k + 1) % m]);
            let span = if k + 1 == m {
                b.angle + TAU - a.angle
            } else {
                b.angle - a.angle
            };
            if span < MIN_RAY_SPACING {
                return None;
            }
            let open = (0..a.valid.min(b.valid)).step_by(2).any(|j| {
                let pa = point(k * per_ray + j);
                let pb = point(((k + 1) % m) * per_ray + j);
                let mid = 0.5 * (pa + pb);
                (pa - pb).norm() > trigger && !index.any_near(&mid, |idx| (point(idx as usize) - mid).norm() <= trigger)
            });
            open.then(|| (a.angle + 0.5 * span).rem_euclid(TAU))
        })
        .collect()
}

fn index_point(rays: &[Ray], per_ray: usize, k: usize) -> [f32; 3] {
    rays[k / per_ray].points[k % per_ray]
}

/// Verifies that every point of a 100 × 100 parameter grid has a fan sample
/// within `h_cover`.
fn check_coverage(surface: &Surface, field: &DistanceField) -> Result<()> {
    let n = 100;
    let t_len = surface.param_length();
    let h_cover = field.settings.h_cover;
    let failures: Vec<(ChartPoint, f64)> = (0..n * n)
        .into_par_iter()
        .filter_map(|k| {
            let (i, j) = (k / n, k % n);
            let x = surface.point_at(t_len * (i as f64 + 0.5) / n as f64, TAU * j as f64 / n as f64);
            let gap = field.nearest_sample_gap(&surface.embed(&x)).unwrap_or(f64::INFINITY);
            (gap > h_cover).then_some((x, gap))
        })
        .collect();
    match failures.first() {
        Some(&(point, gap)) => Err(Error::Coverage { point, gap, h_cover }),
        None => Ok(()),
    }
}

/// Refines a launch guess into a geodesic from the field source to `x`.
pub(crate) fn anchored(
    surface: &Surface,
    field: &DistanceField,
    x: &ChartPoint,
    angle: f64,
    length: f64,
) -> Result<Launch> {
    let target = surface.embed(x);
    let shot = refine_shot(surface, &field.source, angle, length, &target, field.step, REFINE_TOL)?;
    let w = -surface.push_forward(&shot.end, shot.end_vel);
    Ok(Launch {
        angle: shot.angle,
        length: shot.length,
        arrival: surface.tangent_angle(x, &w),
    })
}

/// Harvested candidate: one per family of neighbouring rays.
#[derive(Debug, Clone, Copy)]
struct Harvested {
    ray: usize,
    j: usize,
    gap: f64,
}

fn harvest(field: &DistanceField, x3: &Vector3<f64>) -> (Vec<Harvested>, usize) {
    let radius = harvest_radius(&field.settings);
    let n = field.n_fan();
    let mut per_ray: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    field.index.near(x3, |idx| {
        let (ray, j, pos) = field.sample(idx);
        let gap = (pos - x3).norm();
        if gap <= radius {
            per_ray[ray].push((j, gap));
        }
    });
    let mut hit_rays = 0;
    // Local minima along each ray.
    let mut minima: Vec<Vec<Harvested>> = vec![Vec::new(); n];
    for (ray, samples) in per_ray.iter_mut().enumerate() {
        if samples.is_empty() {
            continue;
        }
        if samples.iter().any(|s| s.1 <= field.settings.h_cover) {
            hit_rays += 1;
        }
        samples.sort_unstable_by_key(|s| s.0);
        let mut k = 0;
        while k < samples.len() {
            let mut end = k;
            while end + 1 < samples.len() && samples[end + 1].0 == samples[end].0 + 1 {
                end += 1;
            }
            let run = &samples[k..=end];
            for (m, s) in run.iter().enumerate() {
                let left = m == 0 || run[m - 1].1 > s.1;
                let right = m + 1 == run.len() || run[m + 1].1 >= s.1;
                if left && right {
                    minima[ray].push(Harvested { ray, j: s.0, gap: s.1 });
                }
            }
            k = end + 1;
        }
    }
    // Keep only minima that are not beaten by a neighbouring ray at a similar
    // arc length.
    let window = (4.0 * radius / field.h_sample).ceil() as usize + 1;
    let mut out = Vec::new();
    for ray in 0..n {
        for c in &minima[ray] {
            let beaten = [(ray + n - 1) % n, (ray + 1) % n].iter().any(|&nb| {
                minima[nb]
                    .iter()
                    .any(|o| o.j.abs_diff(c.j) <= window && (o.gap < c.gap || (o.gap == c.gap && nb < ray)))
            });
            if !beaten {
                out.push(*c);
            }
        }
    }
    (out, hit_rays)
}

/// Global distance from the field source to `x` with its minimizing
/// directions at `x`.
pub fn distance_and_directions(surface: &Surface, field: &DistanceField, x: &ChartPoint) -> Result<DistanceResult> {
    let settings = &field.settings;
    let x3 = surface.embed(x);
    let chord = (x3 - field.source3).norm();
    if chord < 1e-13 {
        return Ok(DistanceResult {
            base: *x,
            distance: 0.0,
            directions: Vec::new(),
            launches: Vec::new(),
            degenerate: true,
            candidates: Vec::new(),
        });
    }
    if chord < DIRECT_RANGE {
        let angle = surface.tangent_angle(&field.source, &(x3 - field.source3));
        let launch = anchored(surface, field, x, angle, chord)?;
        return Ok(DistanceResult {
            base: *x,
            distance: launch.length,
            directions: vec![TangentDirection::new(launch.arrival)],
            launches: vec![launch],
            degenerate: false,
            candidates: Vec::new(),
        });
    }
    let (mut found, hit_rays) = harvest(field, &x3);
    let nearest = found.iter().map(|h| h.gap).fold(f64::INFINITY, f64::min);
    if found.is_empty() || nearest > settings.h_cover {
        return Err(Error::Coverage {
            point: *x,
            gap: nearest,
            h_cover: settings.h_cover,
        });
    }
    let degenerate = hit_rays >= settings.n_fan / 4;
    let s_of = |h: &Harvested| h.j as f64 * field.h_sample;
    let upper = found
        .iter()
        .map(|h| s_of(h) + 2.0 * h.gap)
        .fold(f64::INFINITY, f64::min);
    found.retain(|h| s_of(h) - 2.0 * h.gap <= upper * (1.0 + settings.rel_tol_min));
    found.sort_by(|a, b| (s_of(a) - a.gap).total_cmp(&(s_of(b) - b.gap)));
    if degenerate {
        found.truncate(1);
    }
    let refined: Vec<Result<Launch>> = found
        .par_iter()
        .map(|h| anchored(surface, field, x, field.launch_angle(h.ray), s_of(h)))
        .collect();
    let mut candidates: Vec<Candidate> = Vec::with_capacity(found.len());
    let mut first_error = None;
    for (h, r) in found.iter().zip(refined) {
        let launch = match r {
            Ok(l) => Some(l),
            Err(e) => {
                first_error.get_or_insert(e);
                None
            }
        };
        candidates.push(Candidate {
            ray: h.ray,
            sample_length: s_of(h),
            sample_gap: h.gap,
            launch,
            accepted: false,
        });
    }
    let min_len = candidates
        .iter()
        .filter_map(|c| c.launch.map(|l| l.length))
        .fold(f64::INFINITY, f64::min);
    if !min_len.is_finite() {
        return Err(first_error.unwrap_or_else(|| Error::Solver("no candidate converged".into())));
    }
    // A failed candidate whose sample could have been shorter than the minimum
    // leaves the answer uncertain.
    if let Some(e) = first_error {
        let shadowed = candidates
            .iter()
            .any(|c| c.launch.is_none() && c.sample_length - 2.0 * c.sample_gap < min_len);
        if shadowed {
            return Err(e);
        }
    }
    let cutoff = min_len * (1.0 + settings.rel_tol_min);
    let mut accepted: Vec<Launch> = Vec::new();
    for c in candidates.iter_mut() {
        if let Some(l) = c.launch {
            if l.length <= cutoff {
                c.accepted = true;
                accepted.push(l);
            }
        }
    }
    let launches = cluster(accepted, settings.cluster_gap);
    Ok(DistanceResult {
        base: *x,
        distance: min_len,
        directions: launches.iter().map(|l| TangentDirection::new(l.arrival)).collect(),
        launches,
        degenerate,
        candidates,
    })
}

/// Merges launches whose arrival directions are within `gap` (transitively,
/// around the circle); the shortest member represents each cluster.
fn cluster(mut launches: Vec<Launch>, gap: f64) -> Vec<Launch> {
    if launches.len() <= 1 {
        return launches;
    }
    launches.sort_by(|a, b| a.arrival.total_cmp(&b.arrival));
    let n = launches.len();
    // Start after the widest circular gap so no cluster straddles the cut.
    let start = (0..n)
        .max_by(|&i, &j| {
            let gi = circle::ccw_gap(launches[i].arrival, launches[(i + 1) % n].arrival);
            let gj = circle::ccw_gap(launches[j].arrival, launches[(j + 1) % n].arrival);
            gi.total_cmp(&gj)
        })
        .map(|i| (i + 1) % n)
        .unwrap_or(0);
    let mut clusters: Vec<Launch> = Vec::new();
    let mut prev: Option<f64> = None;
    for k in 0..n {
        let l = launches[(start + k) % n];
        match prev {
            Some(p) if circle::ccw_gap(p, l.arrival) < gap => {
                let rep = clusters.last_mut().expect("cluster open");
                if l.length < rep.length {
                    *rep = l;
                }
            }
            _ => clusters.push(l),
        }
        prev = Some(l.arrival);
    }
    clusters.sort_by(|a, b| a.arrival.total_cmp(&b.arrival));
    clusters
}

/// `f_pq(x) = d(x, q) − d(x, p)`.
pub fn f_pq(surface: &Surface, field_p: &DistanceField, field_q: &DistanceField, x: &ChartPoint) -> Result<f64> {
    let dq = distance_and_directions(surface, field_q, x)?.distance;
    let dp = distance_and_directions(surface, field_p, x)?.distance;
    Ok(dq - dp)
}

/// Smallest circle distance between `Θ_{x,p}` and `Θ_{x,q}`; 0 if either set
/// is empty.
pub fn direction_separation(result_p: &DistanceResult, result_q: &DistanceResult) -> f64 {
    if result_p.directions.is_empty() || result_q.directions.is_empty() {
        return 0.0;
    }
    result_p
        .directions
        .iter()
        .map(|a| circle::distance_to_set(a.angle, &result_q.angles()))
        .fold(PI, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clustering_merges_close_arrivals_across_zero() {
        let l = |arrival: f64, length: f64| Launch {
            angle: 0.0,
            length,
            arrival,
        };
        let out = cluster(vec![l(TAU - 0.002, 1.0), l(0.003, 0.9), l(PI, 1.0)], 1e-2);
        assert_eq!(out.len(), 2);
        assert!(out.iter().any(|c| c.length == 0.9 && c.arrival == 0.003));
    }

    #[test]
    fn separation_of_opposite_singletons_is_pi() {
        let r = |a: f64| DistanceResult {
            base: ChartPoint::north_pole(),
            distance: 1.0,
            directions: vec![TangentDirection::new(a)],
            launches: vec![],
            degenerate: false,
            candidates: vec![],
        };
        assert!((direction_separation(&r(0.5), &r(0.5 + PI)) - PI).abs() < 1e-12);
        assert_eq!(direction_separation(&r(1.0), &r(1.0)), 0.0);
    }
}
