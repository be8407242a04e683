mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::OnceLock;

use common::{cigar, pinned, point_frac, sphere};
use mediatrix_core::circle::arc_distance;
use mediatrix_core::distance::{
    build_field, direction_separation, distance_and_directions, f_pq, DistanceField, DistanceSettings,
};
use mediatrix_core::geodesic::{exp_map, TangentDirection};
use mediatrix_core::surface::{ChartPoint, Surface};
use mediatrix_core::Error;
use proptest::prelude::*;

struct Fixture {
    surface: Surface,
    fields: Vec<DistanceField>,
}

fn fixture(sources: &[ChartPoint], surface: Surface) -> Fixture {
    let fields = sources
        .iter()
        .map(|p| build_field(&surface, p, &DistanceSettings::default()).unwrap())
        .collect();
    Fixture { surface, fields }
}

/// Unit sphere with a generic source and the two poles.
fn sphere_fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        fixture(
            &[
                ChartPoint::body(1.2, 0.4),
                ChartPoint::north_pole(),
                ChartPoint::south_pole(),
            ],
            sphere(1.0),
        )
    })
}

fn cigar_fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let c = cigar();
        let generic = ChartPoint::body(0.5 * c.param_length() - 0.7, 2.0);
        fixture(&[ChartPoint::north_pole(), ChartPoint::south_pole(), generic], c)
    })
}

proptest! {
    #![proptest_config(pinned(1000))]
    #[test]
    fn sphere_distance_is_the_central_angle(src in 0..3usize, s in 0.0..1.0f64, phi in 0.0..TAU) {
        let f = sphere_fixture();
        let x = point_frac(&f.surface, s, phi);
        let field = &f.fields[src];
        let r = distance_and_directions(&f.surface, field, &x).unwrap();
        let expected = f.surface.embed(&field.source).dot(&f.surface.embed(&x)).clamp(-1.0, 1.0).acos();
        prop_assert!((r.distance - expected).abs() <= 1e-6, "{} vs {expected}", r.distance);
    }
}

proptest! {
    #![proptest_config(pinned(100))]
    #[test]
    fn directions_reach_the_source_and_are_minimal(src in 0..3usize, s in 0.02..0.98f64, phi in 0.0..TAU, on_cigar in any::<bool>()) {
        let f = if on_cigar { cigar_fixture() } else { sphere_fixture() };
        let x = point_frac(&f.surface, s, phi);
        let field = &f.fields[src];
        let r = distance_and_directions(&f.surface, field, &x).unwrap();
        prop_assume!(!r.degenerate && r.distance > 0.0);
        let settings = DistanceSettings::default();
        let target = f.surface.embed(&x);
        prop_assert!(!r.launches.is_empty());
        for l in &r.launches {
            let y = exp_map(&f.surface, &field.source, TangentDirection::new(l.angle), l.length).unwrap();
            prop_assert!((f.surface.embed(&y) - target).norm() <= settings.tol_hit);
            prop_assert!(l.length >= r.distance && l.length <= r.distance * (1.0 + settings.rel_tol_min));
            // arriving direction points back at the source along the geodesic
            let back = exp_map(&f.surface, &x, TangentDirection::new(l.arrival), l.length).unwrap();
            prop_assert!((f.surface.embed(&back) - f.surface.embed(&field.source)).norm() <= 1e-6);
        }
    }

    #[test]
    fn distance_is_one_lipschitz(src in 0..3usize, s in 0.02..0.98f64, phi in 0.0..TAU, angle in 0.0..TAU, delta in 1e-3..0.2f64, on_cigar in any::<bool>()) {
        let f = if on_cigar { cigar_fixture() } else { sphere_fixture() };
        let field = &f.fields[src];
        let x = point_frac(&f.surface, s, phi);
        let y = exp_map(&f.surface, &x, TangentDirection::new(angle), delta).unwrap();
        let dx = distance_and_directions(&f.surface, field, &x).unwrap().distance;
        let dy = distance_and_directions(&f.surface, field, &y).unwrap().distance;
        prop_assert!((dx - dy).abs() <= delta + 1e-5, "{dx} {dy} {delta}");
    }
}

#[test]
fn antipode_is_degenerate() {
    let f = sphere_fixture();
    let r = distance_and_directions(&f.surface, &f.fields[0], &ChartPoint::body(PI - 1.2, 0.4 + PI)).unwrap();
    assert!(r.degenerate);
    assert!((r.distance - PI).abs() <= 1e-6);
    let pole = distance_and_directions(&f.surface, &f.fields[1], &ChartPoint::south_pole()).unwrap();
    assert!(pole.degenerate);
}

#[test]
fn cigar_poles_are_a_profile_length_apart() {
    let f = cigar_fixture();
    let r = distance_and_directions(&f.surface, &f.fields[0], &ChartPoint::south_pole()).unwrap();
    assert!(r.degenerate);
    assert!((r.distance - f.surface.param_length()).abs() <= 1e-6, "{}", r.distance);
}

#[test]
fn source_has_distance_zero() {
    let f = sphere_fixture();
    let r = distance_and_directions(&f.surface, &f.fields[0], &ChartPoint::body(1.2, 0.4)).unwrap();
    assert_eq!(r.distance, 0.0);
    assert!(r.directions.is_empty());
}

#[test]
fn sparse_fans_fail_coverage() {
    let s = sphere(1.0);
    let sparse = DistanceSettings {
        n_fan: 8,
        ..DistanceSettings::default()
    };
    assert!(matches!(
        build_field(&s, &ChartPoint::north_pole(), &sparse),
        Err(Error::Coverage { .. })
    ));
    let enough = DistanceSettings {
        n_fan: 1024,
        ..DistanceSettings::default()
    };
    assert!(build_field(&s, &ChartPoint::body(1.0, 0.0), &enough).is_ok());
}

#[test]
fn invalid_settings_name_the_field() {
    let s = sphere(1.0);
    let bad = DistanceSettings {
        tol_hit: 0.0,
        ..DistanceSettings::default()
    };
    let err = build_field(&s, &ChartPoint::north_pole(), &bad).unwrap_err();
    assert!(err.to_string().contains("distance.tol_hit"), "{err}");
}

#[test]
fn pole_pair_difference_examples() {
    let f = sphere_fixture();
    let (fp, fq) = (&f.fields[1], &f.fields[2]);
    for phi in [0.0, 1.0, 4.0] {
        let eq = f_pq(&f.surface, fp, fq, &ChartPoint::body(FRAC_PI_2, phi)).unwrap();
        assert!(eq.abs() <= 1e-6);
        for t in [0.3, 1.0, 2.5] {
            let v = f_pq(&f.surface, fp, fq, &f.surface.point_at(t, phi)).unwrap();
            assert!((v - (PI - 2.0 * t)).abs() <= 1e-6, "t={t}: {v}");
        }
    }
}

#[test]
fn separation_on_the_equator_is_pi() {
    let f = sphere_fixture();
    for phi in [0.2, 2.0, 5.0] {
        let x = ChartPoint::body(FRAC_PI_2, phi);
        let rp = distance_and_directions(&f.surface, &f.fields[1], &x).unwrap();
        let rq = distance_and_directions(&f.surface, &f.fields[2], &x).unwrap();
        assert!((direction_separation(&rp, &rq) - PI).abs() <= 1e-6);
        let north = f.surface.velocity_angle(&x, [-1.0, 0.0]);
        assert!(arc_distance(rp.directions[0].angle, north) <= 1e-6);
    }
}

#[test]
fn metric_axioms_on_a_pinned_pool() {
    for (name, surface) in [("sphere", sphere(1.0)), ("cigar", cigar())] {
        let pool: Vec<ChartPoint> = (0..6)
            .map(|i| point_frac(&surface, 0.08 + 0.16 * i as f64, 1.1 * i as f64))
            .collect();
        let f = fixture(&pool, surface);
        let d = |i: usize, j: usize| {
            distance_and_directions(&f.surface, &f.fields[i], &pool[j])
                .unwrap()
                .distance
        };
        let n = pool.len();
        let table: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| d(i, j)).collect()).collect();
        for i in 0..n {
            assert_eq!(table[i][i], 0.0);
            for j in 0..n {
                assert!((table[i][j] - table[j][i]).abs() <= 1e-6, "{name}: d({i},{j})");
                if i != j {
                    assert!(table[i][j] > 0.0);
                }
                for k in 0..n {
                    assert!(
                        table[i][k] <= table[i][j] + table[j][k] + 1e-9,
                        "{name}: triangle {i}{j}{k}"
                    );
                }
            }
        }
    }
}
