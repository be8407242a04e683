mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::OnceLock;

use common::{cigar, pinned, sphere};
use mediatrix_core::circle::{arc_distance, normalize};
use mediatrix_core::distance::{build_field, f_pq, DistanceField, DistanceSettings};
use mediatrix_core::geodesic::{exp_map, TangentDirection};
use mediatrix_core::mediatrix::{
    deficiency_of, prewedges_from_sets, project_to_mediatrix, seed_point, trace_mediatrix, wedge_containment_check,
    MediatrixCurve, TracerSettings,
};
use mediatrix_core::surface::{ChartPoint, Surface};
use nalgebra::Vector3;
use proptest::prelude::*;

struct Pair {
    surface: Surface,
    fp: DistanceField,
    fq: DistanceField,
    curve: MediatrixCurve,
}

fn settings() -> TracerSettings {
    TracerSettings {
        step: 0.01,
        ..TracerSettings::default()
    }
}

fn pair(surface: Surface, p: ChartPoint, q: ChartPoint) -> Pair {
    let d = DistanceSettings::default();
    let fp = build_field(&surface, &p, &d).unwrap();
    let fq = build_field(&surface, &q, &d).unwrap();
    let curve = trace_mediatrix(&surface, &fp, &fq, &settings()).unwrap();
    Pair { surface, fp, fq, curve }
}

fn sphere_poles() -> &'static Pair {
    static P: OnceLock<Pair> = OnceLock::new();
    P.get_or_init(|| pair(sphere(1.0), ChartPoint::north_pole(), ChartPoint::south_pole()))
}

fn sphere_generic() -> &'static Pair {
    static P: OnceLock<Pair> = OnceLock::new();
    P.get_or_init(|| pair(sphere(1.0), ChartPoint::body(1.2, 0.4), ChartPoint::body(2.2, 0.4)))
}

fn cigar_poles() -> &'static Pair {
    static P: OnceLock<Pair> = OnceLock::new();
    P.get_or_init(|| pair(cigar(), ChartPoint::north_pole(), ChartPoint::south_pole()))
}

/// Unit normal of the plane of points equidistant from `p` and `q` on the
/// unit sphere.
fn bisector_normal(pr: &Pair) -> Vector3<f64> {
    (pr.surface.embed(&pr.fp.source) - pr.surface.embed(&pr.fq.source)).normalize()
}

#[test]
fn opposite_singletons_give_two_half_circles() {
    let w = prewedges_from_sets(&[0.0], &[PI]);
    assert_eq!(w.len(), 2);
    for x in &w {
        assert!((x.opening - PI).abs() <= 1e-12);
    }
    let mids: Vec<f64> = w.iter().map(|x| x.midpoint.angle).collect();
    assert!(mids.iter().any(|&m| arc_distance(m, FRAC_PI_2) <= 1e-12));
    assert!(mids.iter().any(|&m| arc_distance(m, 3.0 * FRAC_PI_2) <= 1e-12));
    assert!(deficiency_of(&w).unwrap() <= 1e-12);
}

#[test]
fn adjacent_directions_of_one_source_bound_no_prewedge() {
    let w = prewedges_from_sets(&[0.0], &[2.0, 4.0]);
    assert_eq!(w.len(), 2);
    let openings: Vec<f64> = w.iter().map(|x| x.opening).collect();
    assert!(openings.iter().any(|&o| (o - 2.0).abs() <= 1e-12));
    assert!(openings.iter().any(|&o| (o - (TAU - 4.0)).abs() <= 1e-12));
    assert!(!w.iter().any(|x| x.contains(3.0, 0.0)));
    let mid_a = 1.0;
    let mid_b = normalize(4.0 + 0.5 * (TAU - 4.0));
    let expected = (PI - arc_distance(mid_a, mid_b)).abs();
    assert!((deficiency_of(&w).unwrap() - expected).abs() <= 1e-12);
    assert_eq!(prewedges_from_sets(&[0.0, 1.0], &[2.0, 3.0, 4.0]).len(), 2);
    assert_eq!(prewedges_from_sets(&[0.0, 2.0, 4.0], &[1.0, 3.0, 5.0]).len(), 6);
}

#[test]
fn cigar_projection_moves_half_the_residual() {
    let pr = cigar_poles();
    let z = ChartPoint::body(0.5 * pr.surface.param_length() - 0.05, 1.0);
    assert!((pr.surface.embed(&z).z - 0.05).abs() <= 1e-12);
    let proj = project_to_mediatrix(&pr.surface, &pr.fp, &pr.fq, &z, 1e-2, 1e-9).unwrap();
    assert!((proj.f_start.abs() - 0.10).abs() <= 1e-4, "{}", proj.f_start);
    assert!((proj.moved - 0.05).abs() <= 1e-3, "{}", proj.moved);
    assert!(proj.f_end.abs() <= 1e-9);
    assert!(pr.surface.embed(&proj.point).z.abs() <= 1e-6);
}

#[test]
fn seeds_lie_halfway() {
    let poles = sphere_poles();
    let s = seed_point(&poles.surface, &poles.fp, &poles.fq, 1e-9).unwrap();
    assert!(poles.surface.embed(&s).z.abs() <= 1e-6);

    let g = sphere_generic();
    let expected = g.surface.embed(&ChartPoint::body(1.7, 0.4));
    let s = seed_point(&g.surface, &g.fp, &g.fq, 1e-9).unwrap();
    assert!((g.surface.embed(&s) - expected).norm() <= 1e-6);
    let swapped = seed_point(&g.surface, &g.fq, &g.fp, 1e-9).unwrap();
    assert!((g.surface.embed(&swapped) - expected).norm() <= 1e-6);
}

#[test]
fn pole_pair_traces_are_the_equator() {
    for pr in [sphere_poles(), cigar_poles()] {
        let c = &pr.curve;
        assert!(c.closed);
        assert!((c.length() - TAU).abs() <= 1e-3, "{}", c.length());
        for p in &c.points {
            assert!(p.embedded[2].abs() <= 1e-6);
            assert!(p.residual.abs() <= 1e-6);
            assert!(p.deficiency <= 1e-6);
        }
    }
}

#[test]
fn swapping_the_sources_traces_the_same_circle() {
    let g = sphere_generic();
    let n = bisector_normal(g);
    let swapped = trace_mediatrix(&g.surface, &g.fq, &g.fp, &settings()).unwrap();
    assert!(swapped.closed);
    for c in [&g.curve, &swapped] {
        assert!((c.length() - TAU).abs() <= 1e-3);
        for p in &c.points {
            assert!(Vector3::from(p.embedded).dot(&n).abs() <= 1e-6);
        }
    }
}

#[test]
fn wedges_contain_nearby_curve_points() {
    let c = cigar_poles();
    for i in (0..c.curve.points.len()).step_by(37) {
        assert!(wedge_containment_check(&c.surface, &c.curve, i, 0.5, 2e-2).unwrap());
    }
    let s = sphere_generic();
    for i in (0..s.curve.points.len()).step_by(37) {
        assert!(wedge_containment_check(&s.surface, &s.curve, i, 0.3, 2e-2).unwrap());
    }
}

#[test]
fn wedge_violations_are_detected() {
    let pr = sphere_poles();
    let mut curve = pr.curve.clone();
    let x = curve.points[0].position;
    let east = pr.surface.velocity_angle(&x, [0.0, 1.0]);
    // two p-directions straddling the curve tangent leave it outside every pre-wedge
    curve.points[0].prewedges = prewedges_from_sets(&[east + 0.5, east - 0.5], &[east + PI]);
    assert!(!wedge_containment_check(&pr.surface, &curve, 0, 0.3, 2e-2).unwrap());
}

proptest! {
    #![proptest_config(pinned(100))]
    #[test]
    fn sphere_projections_land_on_the_bisector(k in 0..10_000usize, angle in 0.0..TAU, offset in 0.002..0.05f64) {
        let g = sphere_generic();
        let start = &g.curve.points[k % g.curve.points.len()];
        let z = exp_map(&g.surface, &start.position, TangentDirection::new(angle), offset).unwrap();
        let beta_floor = 1e-2;
        let proj = project_to_mediatrix(&g.surface, &g.fp, &g.fq, &z, beta_floor, 1e-9).unwrap();
        prop_assert!(proj.f_end.abs() <= 1e-9);
        prop_assert!(proj.moved <= proj.f_start.abs() / (1.0 - beta_floor.cos()) + 1e-9);
        prop_assert!(g.surface.embed(&proj.point).dot(&bisector_normal(g)).abs() <= 1e-6);
        let f = f_pq(&g.surface, &g.fp, &g.fq, &proj.point).unwrap();
        prop_assert!(f.abs() <= 1e-8);
    }
}
