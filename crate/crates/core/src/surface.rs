//! Built-in surfaces of revolution, their three-chart atlas, and the local
//! differential geometry (metric, Christoffel symbols, Gaussian curvature).
//!
//! Every surface is covered by a `Body` chart `(t, φ)` where `t` is the
//! meridian profile parameter measured from the north pole and `φ` the
//! longitude, plus two polar cap charts `(u, v) = (ρ cos φ, ±ρ sin φ)` with `ρ`
//! the profile parameter measured from the respective pole. All charts are
//! positively oriented with respect to the outward normal.
//!
//! All geometric quantities are derived from the second-order jet of the
//! embedding, so a single code path serves metric, Christoffel symbols and
//! curvature in every chart.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::circle;
use crate::error::{Error, Result};
use crate::profile::{gauss_legendre8, CapModel, CigarProfile, Profile};

/// Cap charts extend to `ρ ≤ CAP_LIMIT·k`; the body chart starts at `BODY_LIMIT·k`.
pub(crate) const CAP_LIMIT: f64 = 0.6;
pub(crate) const BODY_LIMIT: f64 = 0.4;
/// Chart-switch thresholds inside the overlap band (hysteresis).
pub(crate) const SWITCH_TO_BODY: f64 = 0.55;
pub(crate) const SWITCH_TO_CAP: f64 = 0.45;
const PREFERRED_CAP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartId {
    Body,
    NorthCap,
    SouthCap,
}

impl ChartId {
    pub fn name(self) -> &'static str {
        match self {
            ChartId::Body => "body",
            ChartId::NorthCap => "north_cap",
            ChartId::SouthCap => "south_cap",
        }
    }
}

/// A point in one of the atlas charts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartPoint {
    pub chart: ChartId,
    pub u: f64,
    pub v: f64,
}

impl ChartPoint {
    pub fn new(chart: ChartId, u: f64, v: f64) -> Self {
        ChartPoint { chart, u, v }
    }

    pub fn body(t: f64, phi: f64) -> Self {
        ChartPoint::new(ChartId::Body, t, circle::normalize(phi))
    }

    pub fn north_pole() -> Self {
        ChartPoint::new(ChartId::NorthCap, 0.0, 0.0)
    }

    pub fn south_pole() -> Self {
        ChartPoint::new(ChartId::SouthCap, 0.0, 0.0)
    }
}

/// Compactly supported radial bump profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpProfile {
    /// `height·(1 − (ρ/radius)²)⁴`, C³ across the support boundary.
    #[default]
    Quartic,
}

/// A normal displacement of the flat cylinder of a cigar, centered at height
/// `z` and longitude `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub z: f64,
    pub phi: f64,
    pub radius: f64,
    pub height: f64,
    #[serde(default)]
    pub profile: BumpProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceKind {
    RoundSphere {
        radius: f64,
    },
    SpheroidOfRevolution {
        a: f64,
        c: f64,
    },
    Cigar {
        cylinder_half_height: f64,
        smoothing_width: f64,
    },
    BumpedCigar {
        cylinder_half_height: f64,
        smoothing_width: f64,
        bumps: Vec<BumpSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    #[serde(flatten)]
    pub kind: SurfaceKind,
    /// Safe radius for polar charts and wedges; a per-kind default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injectivity_bound: Option<f64>,
}

impl SurfaceSpec {
    pub fn round_sphere(radius: f64) -> Self {
        SurfaceSpec {
            kind: SurfaceKind::RoundSphere { radius },
            injectivity_bound: None,
        }
    }

    pub fn spheroid(a: f64, c: f64) -> Self {
        SurfaceSpec {
            kind: SurfaceKind::SpheroidOfRevolution { a, c },
            injectivity_bound: None,
        }
    }

    pub fn cigar(cylinder_half_height: f64, smoothing_width: f64) -> Self {
        SurfaceSpec {
            kind: SurfaceKind::Cigar {
                cylinder_half_height,
                smoothing_width,
            },
            injectivity_bound: None,
        }
    }

    pub fn bumped_cigar(cylinder_half_height: f64, smoothing_width: f64, bumps: Vec<BumpSpec>) -> Self {
        SurfaceSpec {
            kind: SurfaceKind::BumpedCigar {
                cylinder_half_height,
                smoothing_width,
                bumps,
            },
            injectivity_bound: None,
        }
    }
}

/// Second-order jet of the embedding at a chart point.
#[derive(Debug, Clone, Copy)]
pub struct Jet {
    pub x: Vector3<f64>,
    pub xu: Vector3<f64>,
    pub xv: Vector3<f64>,
    pub xuu: Vector3<f64>,
    pub xuv: Vector3<f64>,
    pub xvv: Vector3<f64>,
}

impl Jet {
    pub fn metric(&self) -> Matrix2<f64> {
        let f = self.xu.dot(&self.xv);
        Matrix2::new(self.xu.norm_squared(), f, f, self.xv.norm_squared())
    }

    pub fn normal(&self) -> Vector3<f64> {
        self.xu.cross(&self.xv).normalize()
    }

    /// Christoffel symbols `Γ[k][i][j]` of the induced metric.
    pub fn christoffel(&self) -> [[[f64; 2]; 2]; 2] {
        let inv = self.metric().try_inverse().unwrap_or_else(Matrix2::zeros);
        let second = [[self.xuu, self.xuv], [self.xuv, self.xvv]];
        let first = [self.xu, self.xv];
        let mut gamma = [[[0.0; 2]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let lowered = [second[i][j].dot(&first[0]), second[i][j].dot(&first[1])];
                for (k, g) in gamma.iter_mut().enumerate() {
                    g[i][j] = inv[(k, 0)] * lowered[0] + inv[(k, 1)] * lowered[1];
                }
            }
        }
        gamma
    }

    pub fn gaussian_curvature(&self) -> f64 {
        let n = self.normal();
        let (l, m, nn) = (self.xuu.dot(&n), self.xuv.dot(&n), self.xvv.dot(&n));
        (l * nn - m * m) / self.metric().determinant()
    }

    /// Geodesic acceleration `−Γ^k_ij ẋ^i ẋ^j`, computed as the tangential
    /// part of the coordinate acceleration.
    pub fn geodesic_acceleration(&self, du: f64, dv: f64) -> [f64; 2] {
        let a = self.xuu * (du * du) + self.xuv * (2.0 * du * dv) + self.xvv * (dv * dv);
        let (b0, b1) = (a.dot(&self.xu), a.dot(&self.xv));
        let e = self.xu.norm_squared();
        let f = self.xu.dot(&self.xv);
        let g = self.xv.norm_squared();
        let det = e * g - f * f;
        [-(g * b0 - f * b1) / det, -(e * b1 - f * b0) / det]
    }
}

/// Orthonormal frame at a point: `e1 = ∂_u/|∂_u|`, `e2 = n × e1`.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
    pub normal: Vector3<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Bump {
    s0: f64,
    phi0: f64,
    radius: f64,
    height: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct BumpJet {
    b: f64,
    bt: f64,
    bp: f64,
    btt: f64,
    btp: f64,
    bpp: f64,
}

impl Bump {
    fn accumulate(&self, t: f64, phi: f64, acc: &mut BumpJet) {
        let dt = t - self.s0;
        if dt.abs() >= self.radius {
            return;
        }
        let dp = circle::signed_diff(self.phi0, phi);
        let r2 = self.radius * self.radius;
        let q = (dt * dt + dp * dp) / r2;
        if q >= 1.0 {
            return;
        }
        let w = 1.0 - q;
        let w2 = w * w;
        let w3 = w2 * w;
        let h = self.height;
        let (qt, qp, qtt) = (2.0 * dt / r2, 2.0 * dp / r2, 2.0 / r2);
        acc.b += h * w2 * w2;
        acc.bt += -4.0 * h * w3 * qt;
        acc.bp += -4.0 * h * w3 * qp;
        acc.btt += 12.0 * h * w2 * qt * qt - 4.0 * h * w3 * qtt;
        acc.btp += 12.0 * h * w2 * qt * qp;
        acc.bpp += 12.0 * h * w2 * qp * qp - 4.0 * h * w3 * qtt;
    }
}

const SERIES_TERMS: usize = 18;

const fn sinc_coefficients() -> [f64; SERIES_TERMS] {
    let mut c = [0.0; SERIES_TERMS];
    let mut fact = 1.0;
    let mut k = 0;
    while k < SERIES_TERMS {
        if k > 0 {
            fact *= ((2 * k) * (2 * k + 1)) as f64;
        }
        c[k] = if k % 2 == 0 { 1.0 / fact } else { -1.0 / fact };
        k += 1;
    }
    c
}

const fn cos_coefficients() -> [f64; SERIES_TERMS] {
    let mut c = [0.0; SERIES_TERMS];
    let mut fact = 1.0;
    let mut k = 0;
    while k < SERIES_TERMS {
        if k > 0 {
            fact *= ((2 * k - 1) * (2 * k)) as f64;
        }
        c[k] = if k % 2 == 0 { 1.0 / fact } else { -1.0 / fact };
        k += 1;
    }
    c
}

const SINC: [f64; SERIES_TERMS] = sinc_coefficients();
const COSR: [f64; SERIES_TERMS] = cos_coefficients();

/// `S(σ) = sin(√σ)/√σ` with two derivatives, and `C(σ) = cos(√σ)`.
fn sinc_sqrt(sigma: f64) -> (f64, f64, f64, f64) {
    let (mut s, mut s1, mut s2, mut c) = (0.0, 0.0, 0.0, 0.0);
    for k in (0..SERIES_TERMS).rev() {
        let kf = k as f64;
        s = s * sigma + SINC[k];
        c = c * sigma + COSR[k];
        if k >= 1 {
            s1 = s1 * sigma + kf * SINC[k];
        }
        if k >= 2 {
            s2 = s2 * sigma + kf * (kf - 1.0) * SINC[k];
        }
    }
    (s, s1, s2, c)
}

/// Runtime surface built from a validated [`SurfaceSpec`].
#[derive(Debug, Clone)]
pub struct Surface {
    spec: SurfaceSpec,
    profile: Profile,
    bumps: Vec<Bump>,
    north: CapModel,
    south: CapModel,
    t_len: f64,
    injectivity_bound: f64,
}

impl Surface {
    pub fn new(spec: SurfaceSpec) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidSurface(m));
        let positive = |name: &str, x: f64| -> Result<()> {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSurface(format!("{name} must be positive, got {x}")))
            }
        };
        let (profile, bump_specs, default_inj) = match &spec.kind {
            SurfaceKind::RoundSphere { radius } => {
                positive("radius", *radius)?;
                (Profile::Sphere { radius: *radius }, &[][..], 0.9 * PI * radius)
            }
            SurfaceKind::SpheroidOfRevolution { a, c } => {
                positive("a", *a)?;
                positive("c", *c)?;
                let k_max = (c * c / a.powi(4)).max(1.0 / (c * c));
                (Profile::Spheroid { a: *a, c: *c }, &[][..], 0.9 * PI / k_max.sqrt())
            }
            SurfaceKind::Cigar {
                cylinder_half_height,
                smoothing_width,
            }
            | SurfaceKind::BumpedCigar {
                cylinder_half_height,
                smoothing_width,
                ..
            } => {
                positive("cylinder_half_height", *cylinder_half_height)?;
                positive("smoothing_width", *smoothing_width)?;
                if smoothing_width >= cylinder_half_height {
                    return invalid(format!(
                        "smoothing_width {smoothing_width} must be below cylinder_half_height {cylinder_half_height}"
                    ));
                }
                if *smoothing_width >= 1.0 {
                    return invalid("smoothing_width must be below 1".into());
                }
                let bumps = match &spec.kind {
                    SurfaceKind::BumpedCigar { bumps, .. } => &bumps[..],
                    _ => &[][..],
                };
                (
                    Profile::Cigar(CigarProfile::new(*cylinder_half_height, *smoothing_width)),
                    bumps,
                    0.9 * PI,
                )
            }
        };
        let injectivity_bound = spec.injectivity_bound.unwrap_or(default_inj);
        positive("injectivity_bound", injectivity_bound)?;
        if let SurfaceKind::RoundSphere { radius } = spec.kind {
            if injectivity_bound > PI * radius {
                return invalid(format!("injectivity_bound {injectivity_bound} exceeds π·radius"));
            }
        }
        let t_len = profile.param_length();
        let mut bumps = Vec::with_capacity(bump_specs.len());
        for (i, b) in bump_specs.iter().enumerate() {
            positive("bump radius", b.radius)?;
            if b.height.is_nan() || b.height < 0.0 {
                return invalid(format!("bump {i}: height must be nonnegative"));
            }
            if b.radius >= PI {
                return invalid(format!("bump {i}: radius must be below π"));
            }
            let (flat_a, flat_b) = profile.flat_range().expect("cigar profile");
            let h_flat = 0.5 * (flat_b - flat_a);
            let s0 = flat_a + (h_flat - b.z);
            if s0 - b.radius <= flat_a || s0 + b.radius >= flat_b {
                return invalid(format!(
                    "bump {i}: support must lie strictly inside the flat cylinder |z| < {h_flat:.6}"
                ));
            }
            bumps.push(Bump {
                s0,
                phi0: circle::normalize(b.phi),
                radius: b.radius,
                height: b.height,
            });
        }
        for i in 0..bumps.len() {
            for j in 0..i {
                let (a, b) = (&bumps[i], &bumps[j]);
                let gap = (a.s0 - b.s0).hypot(circle::arc_distance(a.phi0, b.phi0));
                if gap < a.radius + b.radius {
                    return invalid(format!("bumps {j} and {i} have overlapping supports"));
                }
            }
        }
        let north = profile.north_cap();
        let south = profile.south_cap();
        Ok(Surface {
            spec,
            profile,
            bumps,
            north,
            south,
            t_len,
            injectivity_bound,
        })
    }

    pub fn spec(&self) -> &SurfaceSpec {
        &self.spec
    }

    pub fn injectivity_bound(&self) -> f64 {
        self.injectivity_bound
    }

    /// Length of the profile parameter range `[0, T]`.
    pub fn param_length(&self) -> f64 {
        self.t_len
    }

    pub fn has_bumps(&self) -> bool {
        !self.bumps.is_empty()
    }

    /// Chart-coordinate position of bump `i` as `(t, φ)`.
    pub fn bump_center(&self, i: usize) -> Option<(f64, f64)> {
        self.bumps.get(i).map(|b| (b.s0, b.phi0))
    }

    /// Upper estimate of the surface diameter.
    pub fn diameter_estimate(&self) -> f64 {
        let meridian = match self.profile {
            Profile::Spheroid { .. } => {
                let n = 64;
                (0..n)
                    .map(|i| {
                        let a = PI * i as f64 / n as f64;
                        gauss_legendre8(a, a + PI / n as f64, |t| {
                            let j = self.profile.eval(t);
                            j.dr.hypot(j.dh)
                        })
                    })
                    .sum()
            }
            _ => self.t_len,
        };
        let bump_extra: f64 = self.bumps.iter().map(|b| 2.0 * b.height).sum();
        meridian + bump_extra
    }

    fn cap(&self, chart: ChartId) -> (&CapModel, f64) {
        match chart {
            ChartId::SouthCap => (&self.south, -1.0),
            _ => (&self.north, 1.0),
        }
    }

    pub fn in_domain(&self, x: &ChartPoint) -> bool {
        if !(x.u.is_finite() && x.v.is_finite()) {
            return false;
        }
        match x.chart {
            ChartId::Body => x.u >= BODY_LIMIT * self.north.k && x.u <= self.t_len - BODY_LIMIT * self.south.k,
            c => x.u.hypot(x.v) <= CAP_LIMIT * self.cap(c).0.k,
        }
    }

    fn check(&self, x: &ChartPoint) -> Result<()> {
        if self.in_domain(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                point: *x,
                chart: x.chart.name(),
            })
        }
    }

    /// Profile parameter and longitude of a point.
    pub fn param_of(&self, x: &ChartPoint) -> (f64, f64) {
        match x.chart {
            ChartId::Body => (x.u, circle::normalize(x.v)),
            ChartId::NorthCap => (x.u.hypot(x.v), circle::normalize(x.v.atan2(x.u))),
            ChartId::SouthCap => (self.t_len - x.u.hypot(x.v), circle::normalize((-x.v).atan2(x.u))),
        }
    }

    /// The point with profile parameter `t` and longitude `phi`, in the chart
    /// that covers it most comfortably.
    pub fn point_at(&self, t: f64, phi: f64) -> ChartPoint {
        if t < PREFERRED_CAP * self.north.k {
            ChartPoint::new(ChartId::NorthCap, t * phi.cos(), t * phi.sin())
        } else if self.t_len - t < PREFERRED_CAP * self.south.k {
            let rho = self.t_len - t;
            ChartPoint::new(ChartId::SouthCap, rho * phi.cos(), -rho * phi.sin())
        } else {
            ChartPoint::body(t, phi)
        }
    }

    pub fn canonical(&self, x: &ChartPoint) -> ChartPoint {
        let (t, phi) = self.param_of(x);
        self.point_at(t, phi)
    }

    /// Embedding jet without a domain check.
    pub fn jet(&self, x: &ChartPoint) -> Jet {
        match x.chart {
            ChartId::Body => self.body_jet(x.u, x.v),
            c => {
                let (cap, sign) = self.cap(c);
                cap_jet(cap, sign, x.u, x.v)
            }
        }
    }

    fn body_jet(&self, t: f64, phi: f64) -> Jet {
        let p = self.profile.eval(t);
        let mut bj = BumpJet::default();
        for b in &self.bumps {
            b.accumulate(t, phi, &mut bj);
        }
        let (r, rt, rp) = (p.r + bj.b, p.dr + bj.bt, bj.bp);
        let (rtt, rtp, rpp) = (p.ddr + bj.btt, bj.btp, bj.bpp);
        let (s, c) = phi.sin_cos();
        Jet {
            x: Vector3::new(r * c, r * s, p.h),
            xu: Vector3::new(rt * c, rt * s, p.dh),
            xv: Vector3::new(rp * c - r * s, rp * s + r * c, 0.0),
            xuu: Vector3::new(rtt * c, rtt * s, p.ddh),
            xuv: Vector3::new(rtp * c - rt * s, rtp * s + rt * c, 0.0),
            xvv: Vector3::new(rpp * c - 2.0 * rp * s - r * c, rpp * s + 2.0 * rp * c - r * s, 0.0),
        }
    }

    pub fn embed(&self, x: &ChartPoint) -> Vector3<f64> {
        match x.chart {
            ChartId::Body => {
                let p = self.profile.eval(x.u);
                let mut bj = BumpJet::default();
                for b in &self.bumps {
                    b.accumulate(x.u, x.v, &mut bj);
                }
                let r = p.r + bj.b;
                let (s, c) = x.v.sin_cos();
                Vector3::new(r * c, r * s, p.h)
            }
            _ => self.jet(x).x,
        }
    }

    pub fn metric_at(&self, x: &ChartPoint) -> Result<Matrix2<f64>> {
        self.check(x)?;
        Ok(self.jet(x).metric())
    }

    pub fn christoffel_at(&self, x: &ChartPoint) -> Result<[[[f64; 2]; 2]; 2]> {
        self.check(x)?;
        Ok(self.jet(x).christoffel())
    }

    pub fn gaussian_curvature_at(&self, x: &ChartPoint) -> Result<f64> {
        self.check(x)?;
        Ok(self.jet(x).gaussian_curvature())
    }

    pub fn frame(&self, x: &ChartPoint) -> Frame {
        frame_of(&self.jet(x))
    }

    /// Frame angle of a 3D vector projected onto the tangent plane at `x`.
    pub fn tangent_angle(&self, x: &ChartPoint, w: &Vector3<f64>) -> f64 {
        let f = self.frame(x);
        circle::normalize(w.dot(&f.e2).atan2(w.dot(&f.e1)))
    }

    /// Unit 3D tangent vector at `x` with the given frame angle.
    pub fn direction_vector(&self, x: &ChartPoint, angle: f64) -> Vector3<f64> {
        let f = self.frame(x);
        let (s, c) = angle.sin_cos();
        f.e1 * c + f.e2 * s
    }

    /// Chart components of the unit tangent vector with the given frame angle.
    pub fn chart_velocity(&self, x: &ChartPoint, angle: f64) -> [f64; 2] {
        let jet = self.jet(x);
        let f = frame_of(&jet);
        let (s, c) = angle.sin_cos();
        chart_components(&jet, &(f.e1 * c + f.e2 * s))
    }

    /// Frame angle of the chart-coordinate tangent vector `vel` at `x`.
    pub fn velocity_angle(&self, x: &ChartPoint, vel: [f64; 2]) -> f64 {
        let jet = self.jet(x);
        let w = jet.xu * vel[0] + jet.xv * vel[1];
        let f = frame_of(&jet);
        circle::normalize(w.dot(&f.e2).atan2(w.dot(&f.e1)))
    }

    /// Velocity in 3D for chart components `vel` at `x`.
    pub fn push_forward(&self, x: &ChartPoint, vel: [f64; 2]) -> Vector3<f64> {
        let jet = self.jet(x);
        jet.xu * vel[0] + jet.xv * vel[1]
    }

    /// Clairaut quantity: the axial component of `X × Ẋ`, which equals
    /// `r·sin ψ` for a unit-speed curve on a surface of revolution.
    pub fn clairaut(&self, x: &ChartPoint, vel: [f64; 2]) -> f64 {
        let jet = self.jet(x);
        let w = jet.xu * vel[0] + jet.xv * vel[1];
        jet.x.x * w.y - jet.x.y * w.x
    }

    /// Changes chart, failing when the point is outside the target chart.
    pub fn transition(&self, x: &ChartPoint, target: ChartId) -> Result<ChartPoint> {
        self.check(x)?;
        let y = self.transition_unchecked(x, target).ok_or(Error::Domain {
            point: *x,
            chart: target.name(),
        })?;
        let y = if y.chart == ChartId::Body {
            ChartPoint::body(y.u, y.v)
        } else {
            y
        };
        self.check(&y).map(|_| y)
    }

    /// Changes chart of a position and velocity; `None` when the charts do not
    /// overlap at this point (poles in the body chart, opposite caps).
    pub(crate) fn transition_state(
        &self,
        x: &ChartPoint,
        vel: [f64; 2],
        target: ChartId,
    ) -> Option<(ChartPoint, [f64; 2])> {
        use ChartId::*;
        let t_len = self.t_len;
        match (x.chart, target) {
            (a, b) if a == b => Some((*x, vel)),
            (Body, NorthCap) | (Body, SouthCap) => {
                let (t, phi) = (x.u, x.v);
                let (s, c) = phi.sin_cos();
                if target == NorthCap {
                    let (dt, dp) = (vel[0], vel[1]);
                    Some((
                        ChartPoint::new(NorthCap, t * c, t * s),
                        [dt * c - t * s * dp, dt * s + t * c * dp],
                    ))
                } else {
                    let rho = t_len - t;
                    let (dr, dp) = (-vel[0], vel[1]);
                    Some((
                        ChartPoint::new(SouthCap, rho * c, -rho * s),
                        [dr * c - rho * s * dp, -dr * s - rho * c * dp],
                    ))
                }
            }
            (NorthCap, Body) | (SouthCap, Body) => {
                let (u, v) = (x.u, x.v);
                let rho = u.hypot(v);
                if rho == 0.0 {
                    return None;
                }
                let rad = (u * vel[0] + v * vel[1]) / rho;
                if x.chart == NorthCap {
                    let dp = (u * vel[1] - v * vel[0]) / (rho * rho);
                    Some((ChartPoint::new(Body, rho, v.atan2(u)), [rad, dp]))
                } else {
                    let dp = (v * vel[0] - u * vel[1]) / (rho * rho);
                    Some((ChartPoint::new(Body, t_len - rho, (-v).atan2(u)), [-rad, dp]))
                }
            }
            _ => None,
        }
    }

    fn transition_unchecked(&self, x: &ChartPoint, target: ChartId) -> Option<ChartPoint> {
        if x.chart != target && x.chart != ChartId::Body && target != ChartId::Body {
            return None;
        }
        self.transition_state(x, [0.0, 0.0], target).map(|(p, _)| p)
    }

    /// Chart-switch rule used by the geodesic integrator: leave a cap once
    /// past `SWITCH_TO_BODY·k`, leave the body once within `SWITCH_TO_CAP·k`
    /// of a pole.
    pub(crate) fn switch_target(&self, x: &ChartPoint) -> Option<ChartId> {
        match x.chart {
            ChartId::Body => {
                if x.u < SWITCH_TO_CAP * self.north.k {
                    Some(ChartId::NorthCap)
                } else if self.t_len - x.u < SWITCH_TO_CAP * self.south.k {
                    Some(ChartId::SouthCap)
                } else {
                    None
                }
            }
            c => {
                if x.u.hypot(x.v) > SWITCH_TO_BODY * self.cap(c).0.k {
                    Some(ChartId::Body)
                } else {
                    None
                }
            }
        }
    }

    /// ∫|K| dA over the whole surface, by Gauss-Legendre panels in every chart
    /// (`resolution` panels per chart dimension).
    pub fn total_abs_curvature(&self, resolution: usize) -> f64 {
        let n = resolution.max(16);
        const GL2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];
        let t_a = PREFERRED_CAP * self.north.k;
        let t_b = self.t_len - PREFERRED_CAP * self.south.k;
        let phi_count = if self.has_bumps() { n } else { 1 };
        let area_abs_k = |x: &ChartPoint| {
            let jet = self.jet(x);
            jet.gaussian_curvature().abs() * jet.metric().determinant().sqrt()
        };
        let mut total = 0.0;
        // body band
        let dt = (t_b - t_a) / n as f64;
        let dphi = TAU / phi_count as f64;
        for i in 0..n {
            for gi in GL2 {
                let t = t_a + dt * (i as f64 + 0.5 + 0.5 * gi);
                let mut ring = 0.0;
                for j in 0..phi_count {
                    if phi_count == 1 {
                        ring += TAU * area_abs_k(&ChartPoint::new(ChartId::Body, t, 0.0));
                        continue;
                    }
                    for gj in GL2 {
                        let phi = dphi * (j as f64 + 0.5 + 0.5 * gj);
                        ring += 0.5 * dphi * area_abs_k(&ChartPoint::new(ChartId::Body, t, phi));
                    }
                }
                total += 0.5 * dt * ring;
            }
        }
        // caps, in polar substitution over ρ ≤ PREFERRED_CAP·k
        for chart in [ChartId::NorthCap, ChartId::SouthCap] {
            let rho_max = PREFERRED_CAP * self.cap(chart).0.k;
            let dr = rho_max / n as f64;
            let cap_phi = if self.has_bumps() { n } else { 8 };
            let dp = TAU / cap_phi as f64;
            for i in 0..n {
                for gi in GL2 {
                    let rho = dr * (i as f64 + 0.5 + 0.5 * gi);
                    for j in 0..cap_phi {
                        for gj in GL2 {
                            let phi = dp * (j as f64 + 0.5 + 0.5 * gj);
                            let x = ChartPoint::new(chart, rho * phi.cos(), rho * phi.sin());
                            total += 0.25 * dr * dp * rho * area_abs_k(&x);
                        }
                    }
                }
            }
        }
        total
    }
}

fn frame_of(jet: &Jet) -> Frame {
    let normal = jet.normal();
    let e1 = jet.xu.normalize();
    Frame {
        e1,
        e2: normal.cross(&e1),
        normal,
    }
}

/// Chart components `c` of the tangent vector `w` (least squares in `X_u, X_v`).
pub(crate) fn chart_components(jet: &Jet, w: &Vector3<f64>) -> [f64; 2] {
    let g = jet.metric();
    let rhs = Vector2::new(w.dot(&jet.xu), w.dot(&jet.xv));
    let det = g.determinant();
    [
        (g[(1, 1)] * rhs[0] - g[(0, 1)] * rhs[1]) / det,
        (g[(0, 0)] * rhs[1] - g[(0, 1)] * rhs[0]) / det,
    ]
}

fn cap_jet(cap: &CapModel, sign: f64, u: f64, v: f64) -> Jet {
    let k = cap.k;
    let (uu, vv) = (u / k, v / k);
    let sigma = uu * uu + vv * vv;
    let (s, s1, s2, c) = sinc_sqrt(sigma);
    let (c1, c2) = (-0.5 * s, -0.5 * s1);
    let (su, sv, s_uu) = (2.0 * uu / k, 2.0 * vv / k, 2.0 / (k * k));
    let a = cap.a;
    let b = cap.b;
    let x = Vector3::new(a * s * uu, sign * a * s * vv, cap.h0 + b * c);
    let xu = Vector3::new(a * (s1 * su * uu + s / k), sign * a * s1 * su * vv, b * c1 * su);
    let xv = Vector3::new(a * s1 * sv * uu, sign * a * (s1 * sv * vv + s / k), b * c1 * sv);
    let xuu = Vector3::new(
        a * (s2 * su * su * uu + s1 * s_uu * uu + 2.0 * s1 * su / k),
        sign * a * (s2 * su * su * vv + s1 * s_uu * vv),
        b * (c2 * su * su + c1 * s_uu),
    );
    let xuv = Vector3::new(
        a * (s2 * su * sv * uu + s1 * sv / k),
        sign * a * (s2 * su * sv * vv + s1 * su / k),
        b * c2 * su * sv,
    );
    let xvv = Vector3::new(
        a * (s2 * sv * sv * uu + s1 * s_uu * uu),
        sign * a * (s2 * sv * sv * vv + s1 * s_uu * vv + 2.0 * s1 * sv / k),
        b * (c2 * sv * sv + c1 * s_uu),
    );
    Jet {
        x,
        xu,
        xv,
        xuu,
        xuv,
        xvv,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces() -> Vec<Surface> {
        vec![
            Surface::new(SurfaceSpec::round_sphere(1.0)).unwrap(),
            Surface::new(SurfaceSpec::spheroid(1.0, 2.0)).unwrap(),
            Surface::new(SurfaceSpec::cigar(1.0, 0.2)).unwrap(),
            Surface::new(SurfaceSpec::bumped_cigar(
                1.0,
                0.2,
                vec![BumpSpec {
                    z: 0.5,
                    phi: 0.0,
                    radius: 0.3,
                    height: 0.2,
                    profile: BumpProfile::Quartic,
                }],
            ))
            .unwrap(),
        ]
    }

    #[test]
    fn sinc_series_matches_closed_form() {
        for &rho in &[1e-3, 0.1, 0.5, 0.9] {
            let (s, s1, s2, c) = sinc_sqrt(rho * rho);
            assert!((s - rho.sin() / rho).abs() < 1e-15);
            assert!((c - rho.cos()).abs() < 1e-15);
            let closed1 = (rho * rho.cos() - rho.sin()) / (2.0 * rho.powi(3));
            let closed2 = (3.0 * rho.sin() - 3.0 * rho * rho.cos() - rho * rho * rho.sin()) / (4.0 * rho.powi(5));
            if rho > 0.05 {
                assert!((s1 - closed1).abs() < 1e-12);
                assert!((s2 - closed2).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn jets_match_embedding_finite_differences() {
        let e = 1e-5;
        for surf in surfaces() {
            let t_len = surf.param_length();
            let points = [
                ChartPoint::body(0.3 * t_len, 0.2),
                ChartPoint::body(0.55 * t_len, 6.1),
                ChartPoint::new(ChartId::NorthCap, 0.2, -0.1),
                ChartPoint::new(ChartId::SouthCap, -0.05, 0.3),
                ChartPoint::new(ChartId::NorthCap, 0.0, 0.0),
            ];
            for x in points {
                let j = surf.jet(&x);
                let at = |du: f64, dv: f64| surf.jet(&ChartPoint::new(x.chart, x.u + du, x.v + dv));
                let (up, um, vp, vm) = (at(e, 0.0), at(-e, 0.0), at(0.0, e), at(0.0, -e));
                assert!(((up.x - um.x) / (2.0 * e) - j.xu).norm() < 1e-8);
                assert!(((vp.x - vm.x) / (2.0 * e) - j.xv).norm() < 1e-8);
                assert!(((up.xu - um.xu) / (2.0 * e) - j.xuu).norm() < 1e-7);
                assert!(((vp.xu - vm.xu) / (2.0 * e) - j.xuv).norm() < 1e-7);
                assert!(((vp.xv - vm.xv) / (2.0 * e) - j.xvv).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn charts_are_outward_oriented_and_agree() {
        for surf in surfaces() {
            for x in [
                ChartPoint::north_pole(),
                ChartPoint::south_pole(),
                ChartPoint::new(ChartId::NorthCap, 0.3, 0.2),
                ChartPoint::body(1.0, 2.0),
            ] {
                let j = surf.jet(&x);
                assert!(j.xu.cross(&j.xv).dot(&j.x) > 0.0, "{x:?}");
            }
            let k = surf.north.k;
            let b = ChartPoint::body(0.5 * k, 1.1);
            let n = surf.transition(&b, ChartId::NorthCap).unwrap();
            assert!((surf.embed(&b) - surf.embed(&n)).norm() < 1e-13);
            let back = surf.transition(&n, ChartId::Body).unwrap();
            assert!((back.u - b.u).abs() < 1e-12 && (back.v - b.v).abs() < 1e-12);
            let t_len = surf.param_length();
            let b = ChartPoint::body(t_len - 0.5 * surf.south.k, 4.0);
            let s = surf.transition(&b, ChartId::SouthCap).unwrap();
            assert!((surf.embed(&b) - surf.embed(&s)).norm() < 1e-13);
        }
    }

    #[test]
    fn transitions_carry_velocities() {
        let surf = &surfaces()[1];
        let x = ChartPoint::body(0.5, 0.7);
        let vel = [0.3, -0.8];
        {
            let target = ChartId::NorthCap;
            let (y, w) = surf.transition_state(&x, vel, target).unwrap();
            let a = surf.push_forward(&x, vel);
            let b = surf.push_forward(&y, w);
            assert!((a - b).norm() < 1e-12);
            let (z, w2) = surf.transition_state(&y, w, ChartId::Body).unwrap();
            assert!((z.u - x.u).abs() < 1e-13 && (w2[0] - vel[0]).abs() < 1e-12);
        }
        let x = ChartPoint::body(PI - 0.5, 5.0);
        let (y, w) = surf.transition_state(&x, vel, ChartId::SouthCap).unwrap();
        assert!((surf.push_forward(&x, vel) - surf.push_forward(&y, w)).norm() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        let surf = &surfaces()[2];
        assert!(matches!(
            surf.transition(&ChartPoint::north_pole(), ChartId::Body),
            Err(Error::Domain { .. })
        ));
        let equator = ChartPoint::body(0.5 * surf.param_length(), 0.0);
        assert!(matches!(
            surf.transition(&equator, ChartId::NorthCap),
            Err(Error::Domain { .. })
        ));
        assert!(surf.metric_at(&ChartPoint::body(0.01, 0.0)).is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(Surface::new(SurfaceSpec::round_sphere(-1.0)).is_err());
        assert!(Surface::new(SurfaceSpec::cigar(0.2, 0.3)).is_err());
        let mut s = SurfaceSpec::round_sphere(1.0);
        s.injectivity_bound = Some(4.0);
        assert!(Surface::new(s).is_err());
        let bump = |phi: f64, z: f64| BumpSpec {
            z,
            phi,
            radius: 0.3,
            height: 0.1,
            profile: BumpProfile::Quartic,
        };
        assert!(Surface::new(SurfaceSpec::bumped_cigar(
            1.0,
            0.2,
            vec![bump(0.0, 0.5), bump(0.4, 0.5)]
        ))
        .is_err());
        assert!(Surface::new(SurfaceSpec::bumped_cigar(1.0, 0.2, vec![bump(0.0, 0.75)])).is_err());
        assert!(Surface::new(SurfaceSpec::bumped_cigar(
            1.0,
            0.2,
            vec![bump(0.0, 0.5), bump(2.0, 0.5)]
        ))
        .is_ok());
    }
}
