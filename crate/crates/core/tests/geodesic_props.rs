mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use common::{all_surfaces, cigar, pinned, point_frac, sphere, spheroid};
use mediatrix_core::circle::{arc_distance, normalize};
use mediatrix_core::geodesic::{exp_map, integrate_geodesic, polar_coordinates, TangentDirection};
use mediatrix_core::surface::{ChartId, ChartPoint, Surface};
use nalgebra::Vector3;
use proptest::prelude::*;

fn end(surface: &Surface, x: &ChartPoint, angle: f64, length: f64, step: f64) -> Vector3<f64> {
    let tr = integrate_geodesic(surface, x, TangentDirection::new(angle), length, step).unwrap();
    surface.embed(&tr.terminal().position)
}

proptest! {
    #![proptest_config(pinned(24))]
    #[test]
    fn speed_stays_unit((i, s, phi) in (0..5usize, 0.05..0.95f64, 0.0..TAU), angle in 0.0..TAU, length in 1.0..10.0f64) {
        let (_, surface) = &all_surfaces()[i];
        let x = point_frac(surface, s, phi);
        let tr = integrate_geodesic(surface, &x, TangentDirection::new(angle), length, 1e-3).unwrap();
        prop_assert!(tr.max_renormalization <= 1e-8, "{}", tr.max_renormalization);
        for st in &tr.samples {
            let speed = surface.push_forward(&st.position, st.velocity).norm();
            prop_assert!((speed - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn clairaut_is_conserved((i, s, phi) in (0..4usize, 0.05..0.95f64, 0.0..TAU), angle in 0.0..TAU, length in 1.0..10.0f64) {
        // surfaces of revolution only: the bumped cigar is last in the list
        let (_, surface) = &all_surfaces()[i];
        let x = point_frac(surface, s, phi);
        let tr = integrate_geodesic(surface, &x, TangentDirection::new(angle), length, 1e-3).unwrap();
        let c0 = surface.clairaut(&tr.samples[0].position, tr.samples[0].velocity);
        for st in &tr.samples {
            let c = surface.clairaut(&st.position, st.velocity);
            prop_assert!((c - c0).abs() <= 1e-6 * st.arc_length.max(1e-3), "drift {} at {}", c - c0, st.arc_length);
        }
    }

    #[test]
    fn geodesics_are_reversible((i, s, phi) in (0..5usize, 0.05..0.95f64, 0.0..TAU), angle in 0.0..TAU, length in 0.5..4.0f64) {
        let (_, surface) = &all_surfaces()[i];
        let x = point_frac(surface, s, phi);
        let tr = integrate_geodesic(surface, &x, TangentDirection::new(angle), length, 1e-3).unwrap();
        let last = tr.terminal();
        let back = normalize(surface.velocity_angle(&last.position, last.velocity) + PI);
        let home = end(surface, &last.position, back, length, 1e-3);
        prop_assert!((home - surface.embed(&x)).norm() <= 1e-6);
    }

    #[test]
    fn polar_coordinates_invert_the_exponential_map(
        (i, s, phi) in (0..5usize, 0.05..0.95f64, 0.0..TAU),
        angle in 0.0..TAU,
        frac in 0.05..0.9f64,
    ) {
        let (_, surface) = &all_surfaces()[i];
        let x = point_frac(surface, s, phi);
        let d = frac * surface.injectivity_bound();
        let y = exp_map(surface, &x, TangentDirection::new(angle), d).unwrap();
        let (theta, r) = polar_coordinates(surface, &x, &y).unwrap();
        prop_assert!(arc_distance(theta.angle, angle) <= 1e-6, "{} vs {angle}", theta.angle);
        prop_assert!((r - d).abs() <= 1e-7, "{r} vs {d}");
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    for surface in [spheroid(), cigar(), sphere(1.0)] {
        let x = point_frac(&surface, 0.3, 0.3);
        let h = surface.injectivity_bound() / 100.0;
        let reference = end(&surface, &x, 0.9, 1.5, h / 16.0);
        let e1 = (end(&surface, &x, 0.9, 1.5, h) - reference).norm();
        let e2 = (end(&surface, &x, 0.9, 1.5, h / 2.0) - reference).norm();
        let order = (e1 / e2).log2();
        assert!(order >= 3.8, "order {order} ({e1:e}, {e2:e})");
    }
}

#[test]
fn chart_switches_are_continuous() {
    for (name, surface) in all_surfaces() {
        let x = point_frac(&surface, 0.5, 0.2);
        // heads north over the pole and back down the far side
        let tr = integrate_geodesic(&surface, &x, TangentDirection::new(PI), surface.param_length(), 1e-3).unwrap();
        let charts: Vec<ChartId> = tr.samples.iter().map(|s| s.position.chart).collect();
        assert!(charts.windows(2).any(|w| w[0] != w[1]), "{name}: no chart switch");
        for w in tr.samples.windows(2) {
            let gap = (surface.embed(&w[1].position) - surface.embed(&w[0].position)).norm();
            let ds = w[1].arc_length - w[0].arc_length;
            assert!(
                gap <= ds * (1.0 + 1e-9) + 1e-12 && gap >= ds * (1.0 - 1e-3),
                "{name}: jump {gap} over {ds}"
            );
        }
    }
}

#[test]
fn cigar_meridians_keep_their_longitude() {
    let c = cigar();
    for phi0 in [0.0, 1.0, 3.0, 5.5] {
        let x = ChartPoint::body(0.5 * c.param_length(), phi0);
        let south = c.velocity_angle(&x, [1.0, 0.0]);
        let tr = integrate_geodesic(&c, &x, TangentDirection::new(south), 0.5 * c.param_length() - 0.1, 1e-3).unwrap();
        for st in &tr.samples {
            let (_, phi) = c.param_of(&st.position);
            assert!(arc_distance(phi, phi0) <= 1e-9, "{phi} vs {phi0}");
        }
    }
}

#[test]
fn exponential_map_at_zero_is_identity() {
    for (_, surface) in all_surfaces() {
        for x in [
            ChartPoint::north_pole(),
            point_frac(&surface, 0.4, 1.0),
            ChartPoint::south_pole(),
        ] {
            assert_eq!(exp_map(&surface, &x, TangentDirection::new(1.3), 0.0).unwrap(), x);
        }
    }
}

#[test]
fn spheroid_equator_is_a_geodesic() {
    let s = spheroid();
    let x = ChartPoint::body(0.5 * s.param_length(), 0.0);
    let east = s.velocity_angle(&x, [0.0, 1.0]);
    let y = exp_map(&s, &x, TangentDirection::new(east), FRAC_PI_2).unwrap();
    assert!(
        (s.embed(&y) - Vector3::new(0.0, 1.0, 0.0)).norm() <= 1e-7,
        "{:?}",
        s.embed(&y)
    );
}

#[test]
fn oversized_steps_are_rejected() {
    let s = sphere(1.0);
    let step = 2.0 * s.injectivity_bound() / 100.0;
    assert!(integrate_geodesic(&s, &ChartPoint::north_pole(), TangentDirection::new(0.0), 1.0, step).is_err());
}
