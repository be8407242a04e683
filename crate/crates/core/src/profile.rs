//! Meridian profiles of the built-in surfaces of revolution.
//!
//! A profile is a planar curve `t ↦ (r(t), h(t))` swept around the vertical
//! axis, with `t` running from the north pole (`t = 0`) to the south pole
//! (`t = T`). Near each pole the profile is a circular or elliptical arc,
//! described by a [`CapModel`] so that the polar charts have closed forms.

use std::f64::consts::{FRAC_PI_2, PI};

/// Profile value with first and second derivatives in the profile parameter.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ProfileJet {
    pub r: f64,
    pub dr: f64,
    pub ddr: f64,
    pub h: f64,
    pub dh: f64,
    pub ddh: f64,
}

/// Near-pole profile `r = a·sin(ρ/k)`, `h = h0 + b·cos(ρ/k)` where `ρ` is the
/// profile parameter measured from the pole.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CapModel {
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub h0: f64,
}

#[derive(Debug, Clone)]
pub(crate) enum Profile {
    Sphere { radius: f64 },
    Spheroid { a: f64, c: f64 },
    Cigar(CigarProfile),
}

impl Profile {
    pub fn param_length(&self) -> f64 {
        match self {
            Profile::Sphere { radius } => PI * radius,
            Profile::Spheroid { .. } => PI,
            Profile::Cigar(c) => c.total_length,
        }
    }

    pub fn eval(&self, t: f64) -> ProfileJet {
        match *self {
            Profile::Sphere { radius } => {
                let (s, c) = (t / radius).sin_cos();
                ProfileJet {
                    r: radius * s,
                    dr: c,
                    ddr: -s / radius,
                    h: radius * c,
                    dh: -s,
                    ddh: -c / radius,
                }
            }
            Profile::Spheroid { a, c } => {
                let (st, ct) = t.sin_cos();
                ProfileJet {
                    r: a * st,
                    dr: a * ct,
                    ddr: -a * st,
                    h: c * ct,
                    dh: -c * st,
                    ddh: -c * ct,
                }
            }
            Profile::Cigar(ref cigar) => cigar.eval(t),
        }
    }

    pub fn north_cap(&self) -> CapModel {
        match *self {
            Profile::Sphere { radius } => CapModel {
                a: radius,
                b: radius,
                k: radius,
                h0: 0.0,
            },
            Profile::Spheroid { a, c } => CapModel {
                a,
                b: c,
                k: 1.0,
                h0: 0.0,
            },
            Profile::Cigar(ref cigar) => CapModel {
                a: cigar.scale,
                b: cigar.scale,
                k: cigar.scale,
                h0: cigar.h_top - cigar.scale,
            },
        }
    }

    pub fn south_cap(&self) -> CapModel {
        let n = self.north_cap();
        CapModel {
            a: n.a,
            b: -n.b,
            k: n.k,
            h0: -n.h0,
        }
    }

    /// Flat cylindrical stretch `[t_start, t_end]` where `r = 1`, if any.
    pub fn flat_range(&self) -> Option<(f64, f64)> {
        match self {
            Profile::Cigar(c) => Some((c.flat_start, c.flat_start + c.flat_length)),
            _ => None,
        }
    }
}

const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

pub(crate) fn gauss_legendre8(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL8_NODES
        .iter()
        .zip(GL8_WEIGHTS.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

const BLEND_INTERVALS: usize = 64;

/// Smoothed cigar: unit hemispherical caps joined to a unit-radius
/// cylinder, with the meridian curvature blended from 1 to 0 by a quintic
/// smoothstep over `smoothing_width`. The blended cap is scaled so that the
/// cylinder radius stays exactly 1.
#[derive(Debug, Clone)]
pub(crate) struct CigarProfile {
    width: f64,
    blend_start: f64,
    scale: f64,
    flat_start: f64,
    flat_length: f64,
    total_length: f64,
    h_top: f64,
    // unit-cap profile values at the blend table nodes
    nodes_r: Vec<f64>,
    nodes_h: Vec<f64>,
}

impl CigarProfile {
    pub fn new(half_height: f64, width: f64) -> Self {
        let blend_start = FRAC_PI_2 - 0.5 * width;
        let mut profile = CigarProfile {
            width,
            blend_start,
            scale: 1.0,
            flat_start: 0.0,
            flat_length: 2.0 * half_height - width,
            total_length: 0.0,
            h_top: 0.0,
            nodes_r: Vec::with_capacity(BLEND_INTERVALS + 1),
            nodes_h: Vec::with_capacity(BLEND_INTERVALS + 1),
        };
        let (mut r, mut h) = (blend_start.sin(), blend_start.cos() - 1.0);
        profile.nodes_r.push(r);
        profile.nodes_h.push(h);
        let dx = width / BLEND_INTERVALS as f64;
        for i in 0..BLEND_INTERVALS {
            let a = blend_start + i as f64 * dx;
            r += gauss_legendre8(a, a + dx, |s| profile.unit_psi(s).cos());
            h -= gauss_legendre8(a, a + dx, |s| profile.unit_psi(s).sin());
            profile.nodes_r.push(r);
            profile.nodes_h.push(h);
        }
        let unit_radius = r;
        profile.scale = 1.0 / unit_radius;
        let cap_length = profile.scale * (blend_start + width);
        profile.flat_start = cap_length;
        profile.total_length = 2.0 * cap_length + profile.flat_length;
        profile.h_top = 0.5 * profile.flat_length - profile.scale * h;
        profile
    }

    #[cfg(test)]
    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn smoothstep(tau: f64) -> f64 {
        tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau))
    }

    fn smoothstep_integral(tau: f64) -> f64 {
        tau.powi(4) * (2.5 + tau * (-3.0 + tau))
    }

    /// Tangent turning angle of the unit-cap profile.
    fn unit_psi(&self, s: f64) -> f64 {
        if s <= self.blend_start {
            s
        } else if s >= self.blend_start + self.width {
            FRAC_PI_2
        } else {
            let tau = (s - self.blend_start) / self.width;
            s - self.width * Self::smoothstep_integral(tau)
        }
    }

    /// Meridian curvature of the unit-cap profile.
    fn unit_kappa(&self, s: f64) -> f64 {
        if s <= self.blend_start {
            1.0
        } else if s >= self.blend_start + self.width {
            0.0
        } else {
            1.0 - Self::smoothstep((s - self.blend_start) / self.width)
        }
    }

    /// Unit-cap `(r, h)` with `h` measured from the pole.
    fn unit_rh(&self, s: f64) -> (f64, f64) {
        if s <= self.blend_start {
            return (s.sin(), s.cos() - 1.0);
        }
        let dx = self.width / BLEND_INTERVALS as f64;
        let i = (((s - self.blend_start) / dx) as usize).min(BLEND_INTERVALS);
        let a = self.blend_start + i as f64 * dx;
        if i == BLEND_INTERVALS {
            let (r, h) = (self.nodes_r[i], self.nodes_h[i]);
            return (r, h - (s - a));
        }
        let r = self.nodes_r[i] + gauss_legendre8(a, s, |x| self.unit_psi(x).cos());
        let h = self.nodes_h[i] - gauss_legendre8(a, s, |x| self.unit_psi(x).sin());
        (r, h)
    }

    fn north_eval(&self, s: f64) -> ProfileJet {
        let c = self.scale;
        let x = s / c;
        let psi = self.unit_psi(x);
        let kappa = self.unit_kappa(x);
        let (sp, cp) = psi.sin_cos();
        let (r, h) = self.unit_rh(x);
        ProfileJet {
            r: c * r,
            dr: cp,
            ddr: -sp * kappa / c,
            h: self.h_top + c * h,
            dh: -sp,
            ddh: -cp * kappa / c,
        }
    }

    pub fn eval(&self, t: f64) -> ProfileJet {
        let flat_end = self.flat_start + self.flat_length;
        if t < self.flat_start {
            self.north_eval(t)
        } else if t <= flat_end {
            ProfileJet {
                r: 1.0,
                dr: 0.0,
                ddr: 0.0,
                h: 0.5 * self.flat_length - (t - self.flat_start),
                dh: -1.0,
                ddh: 0.0,
            }
        } else {
            let n = self.north_eval(self.total_length - t);
            ProfileJet {
                r: n.r,
                dr: -n.dr,
                ddr: n.ddr,
                h: -n.h,
                dh: n.dh,
                ddh: -n.ddh,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let v = gauss_legendre8(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
    }

    #[test]
    fn cigar_profile_is_continuous_and_unit_speed() {
        let cigar = CigarProfile::new(1.0, 0.2);
        assert!((cigar.scale() - 1.0).abs() < 5e-3);
        let t_len = cigar.total_length;
        let mut prev = cigar.eval(0.0);
        assert!(prev.r.abs() < 1e-15);
        let n = 20_000;
        for i in 1..=n {
            let t = t_len * i as f64 / n as f64;
            let j = cigar.eval(t);
            assert!((j.dr.hypot(j.dh) - 1.0).abs() < 1e-12);
            let dt = t_len / n as f64;
            // chord of a unit-speed curve is at most the arc
            let chord = (j.r - prev.r).hypot(j.h - prev.h);
            assert!(chord <= dt * (1.0 + 1e-9) && chord > dt * (1.0 - 1e-3));
            prev = j;
        }
        assert!(prev.r.abs() < 1e-12);
        let mid = cigar.eval(0.5 * t_len);
        assert!((mid.r - 1.0).abs() < 1e-14 && mid.h.abs() < 1e-14);
    }

    #[test]
    fn cigar_derivatives_match_finite_differences() {
        let cigar = CigarProfile::new(1.0, 0.3);
        let e = 1e-5;
        for &t in &[0.3, 1.45, 1.5, 1.55, 1.6, 1.62, 2.0, 3.5, 4.6] {
            let (a, b, c) = (cigar.eval(t - e), cigar.eval(t), cigar.eval(t + e));
            assert!(((c.r - a.r) / (2.0 * e) - b.dr).abs() < 1e-8, "dr at {t}");
            assert!(((c.h - a.h) / (2.0 * e) - b.dh).abs() < 1e-8, "dh at {t}");
            assert!(((c.dr - a.dr) / (2.0 * e) - b.ddr).abs() < 1e-6, "ddr at {t}");
            assert!(((c.dh - a.dh) / (2.0 * e) - b.ddh).abs() < 1e-6, "ddh at {t}");
        }
    }

    #[test]
    fn cap_models_match_profiles_near_poles() {
        let profiles = [
            Profile::Sphere { radius: 2.0 },
            Profile::Spheroid { a: 1.0, c: 2.0 },
            Profile::Cigar(CigarProfile::new(1.0, 0.2)),
        ];
        for p in &profiles {
            let t_len = p.param_length();
            for &rho in &[0.05, 0.3, 0.55] {
                let n = p.north_cap();
                let j = p.eval(rho);
                assert!((n.a * (rho / n.k).sin() - j.r).abs() < 1e-12);
                assert!((n.h0 + n.b * (rho / n.k).cos() - j.h).abs() < 1e-12);
                let s = p.south_cap();
                let j = p.eval(t_len - rho);
                assert!((s.a * (rho / s.k).sin() - j.r).abs() < 1e-12);
                assert!((s.h0 + s.b * (rho / s.k).cos() - j.h).abs() < 1e-12);
            }
        }
    }
}
