#![allow(dead_code)]

use std::f64::consts::TAU;

use mediatrix_core::surface::{BumpProfile, BumpSpec, ChartId, ChartPoint, Surface, SurfaceSpec};
use nalgebra::{Matrix2, Matrix3};
use proptest::test_runner::{Config, RngSeed};

pub fn sphere(radius: f64) -> Surface {
    Surface::new(SurfaceSpec::round_sphere(radius)).unwrap()
}

pub fn spheroid() -> Surface {
    Surface::new(SurfaceSpec::spheroid(1.0, 2.0)).unwrap()
}

pub fn cigar() -> Surface {
    Surface::new(SurfaceSpec::cigar(1.0, 0.2)).unwrap()
}

pub fn bump(z: f64, phi: f64) -> BumpSpec {
    BumpSpec {
        z,
        phi,
        radius: 0.3,
        height: 0.2,
        profile: BumpProfile::Quartic,
    }
}

pub fn bumped_cigar() -> Surface {
    Surface::new(SurfaceSpec::bumped_cigar(1.0, 0.2, vec![bump(0.5, 0.0)])).unwrap()
}

pub fn all_surfaces() -> Vec<(&'static str, Surface)> {
    vec![
        ("sphere", sphere(1.0)),
        ("sphere_r2", sphere(2.0)),
        ("spheroid", spheroid()),
        ("cigar", cigar()),
        ("bumped_cigar", bumped_cigar()),
    ]
}

/// Point with profile parameter a fraction `s ∈ [0, 1]` of the way from the
/// north to the south pole.
pub fn point_frac(surface: &Surface, s: f64, phi: f64) -> ChartPoint {
    surface.point_at(s * surface.param_length(), phi.rem_euclid(TAU))
}

pub fn pinned(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed_2024),
        failure_persistence: None,
        ..Config::default()
    }
}

fn metric(s: &Surface, chart: ChartId, u: f64, v: f64) -> Matrix2<f64> {
    s.metric_at(&ChartPoint::new(chart, u, v)).unwrap()
}

/// Γ^k_ij from central differences of the metric (Koszul formula).
pub fn christoffel_fd(s: &Surface, x: &ChartPoint) -> [[[f64; 2]; 2]; 2] {
    let h = 1e-5;
    let dg = |i: usize| {
        let (du, dv) = if i == 0 { (h, 0.0) } else { (0.0, h) };
        (metric(s, x.chart, x.u + du, x.v + dv) - metric(s, x.chart, x.u - du, x.v - dv)) / (2.0 * h)
    };
    let d = [dg(0), dg(1)];
    let inv = metric(s, x.chart, x.u, x.v).try_inverse().unwrap();
    let mut out = [[[0.0; 2]; 2]; 2];
    for (k, out_k) in out.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                out_k[i][j] = (0..2)
                    .map(|l| 0.5 * inv[(k, l)] * (d[i][(j, l)] + d[j][(i, l)] - d[l][(i, j)]))
                    .sum();
            }
        }
    }
    out
}

/// Gaussian curvature from the metric alone (Brioschi formula), with
/// Richardson-extrapolated central differences.
pub fn brioschi(s: &Surface, x: &ChartPoint) -> f64 {
    let efg = |u: f64, v: f64| {
        let g = metric(s, x.chart, u, v);
        [g[(0, 0)], g[(0, 1)], g[(1, 1)]]
    };
    let (u, v) = (x.u, x.v);
    let derivs = |h: f64| {
        let c = efg(u, v);
        let (pu, mu) = (efg(u + h, v), efg(u - h, v));
        let (pv, mv) = (efg(u, v + h), efg(u, v - h));
        let (pp, pm) = (efg(u + h, v + h), efg(u + h, v - h));
        let (mp, mm) = (efg(u - h, v + h), efg(u - h, v - h));
        let mut out = [[0.0; 3]; 5];
        for i in 0..3 {
            out[0][i] = (pu[i] - mu[i]) / (2.0 * h);
            out[1][i] = (pv[i] - mv[i]) / (2.0 * h);
            out[2][i] = (pu[i] - 2.0 * c[i] + mu[i]) / (h * h);
            out[3][i] = (pv[i] - 2.0 * c[i] + mv[i]) / (h * h);
            out[4][i] = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h);
        }
        out
    };
    let h = 2e-4;
    let (a, b) = (derivs(h), derivs(2.0 * h));
    let mut d = [[0.0; 3]; 5];
    for r in 0..5 {
        for i in 0..3 {
            d[r][i] = (4.0 * a[r][i] - b[r][i]) / 3.0;
        }
    }
    let [e, f, g] = efg(u, v);
    let [du, dv, duu, dvv, duv] = d;
    let (e_u, f_u, g_u) = (du[0], du[1], du[2]);
    let (e_v, f_v, g_v) = (dv[0], dv[1], dv[2]);
    let m1 = Matrix3::new(
        -0.5 * dvv[0] + duv[1] - 0.5 * duu[2],
        0.5 * e_u,
        f_u - 0.5 * e_v,
        f_v - 0.5 * g_u,
        e,
        f,
        0.5 * g_v,
        f,
        g,
    );
    let m2 = Matrix3::new(0.0, 0.5 * e_v, 0.5 * g_u, 0.5 * e_v, e, f, 0.5 * g_u, f, g);
    (m1.determinant() - m2.determinant()) / (e * g - f * f).powi(2)
}
