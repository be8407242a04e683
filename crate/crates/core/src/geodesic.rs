//! Unit-speed geodesics: fixed-step RK4 on `(u, v, u̇, v̇)` with chart
//! switching, the exponential map, and geodesic polar coordinates.

use std::io::Write;

use nalgebra::{Matrix2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::circle;
use crate::error::{Error, Result};
use crate::surface::{ChartId, ChartPoint, Surface};

const RENORMALIZE_EVERY: usize = 100;

/// A unit tangent direction, as an angle against the frame
/// `e1 = ∂_u/|∂_u|`, `e2 = n × e1` of the base point's chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentDirection {
    pub angle: f64,
}

impl TangentDirection {
    pub fn new(angle: f64) -> Self {
        TangentDirection {
            angle: circle::normalize(angle),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub position: ChartPoint,
    /// Velocity in the coordinates of `position.chart`.
    pub velocity: [f64; 2],
    pub arc_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicTrace {
    pub initial: (ChartPoint, TangentDirection),
    pub samples: Vec<GeodesicState>,
    pub terminal_length: f64,
    /// Largest relative speed correction applied by renormalization.
    pub max_renormalization: f64,
}

impl GeodesicTrace {
    pub fn terminal(&self) -> &GeodesicState {
        self.samples.last().expect("trace has at least the initial sample")
    }

    /// Writes `arc_length, chart_id, u, v, x, y, z` rows.
    pub fn write_csv<W: Write>(&self, surface: &Surface, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["arc_length", "chart_id", "u", "v", "x", "y", "z"])?;
        for s in &self.samples {
            let e = surface.embed(&s.position);
            w.write_record([
                format!("{:.12e}", s.arc_length),
                s.position.chart.name().to_string(),
                format!("{:.12e}", s.position.u),
                format!("{:.12e}", s.position.v),
                format!("{:.12e}", e.x),
                format!("{:.12e}", e.y),
                format!("{:.12e}", e.z),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Stepper for a single geodesic. Keeps the state in whichever chart
/// currently covers it best.
#[derive(Debug, Clone)]
pub(crate) struct Integrator<'a> {
    surface: &'a Surface,
    pub pos: ChartPoint,
    pub vel: [f64; 2],
    pub arc_length: f64,
    steps: usize,
    pub max_renormalization: f64,
}

impl<'a> Integrator<'a> {
    pub fn new(surface: &'a Surface, x: &ChartPoint, angle: f64) -> Result<Self> {
        if !surface.in_domain(x) {
            return Err(Error::Domain {
                point: *x,
                chart: x.chart.name(),
            });
        }
        Ok(Integrator {
            surface,
            pos: *x,
            vel: surface.chart_velocity(x, angle),
            arc_length: 0.0,
            steps: 0,
            max_renormalization: 0.0,
        })
    }

    pub fn state(&self) -> GeodesicState {
        GeodesicState {
            position: self.pos,
            velocity: self.vel,
            arc_length: self.arc_length,
        }
    }

    pub fn position3(&self) -> Vector3<f64> {
        self.surface.embed(&self.pos)
    }

    fn rhs(&self, chart: ChartId, y: &[f64; 4]) -> [f64; 4] {
        let jet = self.surface.jet(&ChartPoint::new(chart, y[0], y[1]));
        let a = jet.geodesic_acceleration(y[2], y[3]);
        [y[2], y[3], a[0], a[1]]
    }

    pub fn step(&mut self, h: f64) -> std::result::Result<(), String> {
        let chart = self.pos.chart;
        let y = [self.pos.u, self.pos.v, self.vel[0], self.vel[1]];
        let add =
            |a: &[f64; 4], b: &[f64; 4], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]];
        let k1 = self.rhs(chart, &y);
        let k2 = self.rhs(chart, &add(&y, &k1, 0.5 * h));
        let k3 = self.rhs(chart, &add(&y, &k2, 0.5 * h));
        let k4 = self.rhs(chart, &add(&y, &k3, h));
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if out.iter().any(|c| !c.is_finite()) {
            return Err("state became non-finite".into());
        }
        self.pos = ChartPoint::new(chart, out[0], out[1]);
        if chart == ChartId::Body {
            self.pos.v = circle::normalize(self.pos.v);
        }
        self.vel = [out[2], out[3]];
        self.arc_length += h;
        self.steps += 1;
        if self.steps.is_multiple_of(RENORMALIZE_EVERY) {
            let g = self.surface.jet(&self.pos).metric();
            let v = Vector2::new(self.vel[0], self.vel[1]);
            let speed = (v.transpose() * g * v)[(0, 0)].sqrt();
            self.max_renormalization = self.max_renormalization.max((speed - 1.0).abs());
            self.vel = [self.vel[0] / speed, self.vel[1] / speed];
        }
        if let Some(target) = self.surface.switch_target(&self.pos) {
            let (p, v) = self
                .surface
                .transition_state(&self.pos, self.vel, target)
                .ok_or_else(|| format!("no chart transition from {:?}", self.pos))?;
            self.pos = if target == ChartId::Body {
                ChartPoint::body(p.u, p.v)
            } else {
                p
            };
            self.vel = v;
        }
        if !self.surface.in_domain(&self.pos) {
            return Err(format!("left every chart at {:?}", self.pos));
        }
        Ok(())
    }

    /// Advances by exactly `length`, using full steps of size `h` and one
    /// final partial step.
    pub fn advance(&mut self, length: f64, h: f64) -> std::result::Result<(), String> {
        let n = (length / h).floor() as usize;
        for _ in 0..n {
            self.step(h)?;
        }
        let rest = length - n as f64 * h;
        if rest > 1e-14 {
            self.step(rest)?;
        }
        Ok(())
    }
}

fn check_step(surface: &Surface, length: f64, step: f64) -> Result<()> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::config("step", format!("must be positive, got {step}")));
    }
    if step > surface.injectivity_bound() / 100.0 + 1e-15 {
        return Err(Error::config(
            "step",
            format!(
                "{step} exceeds injectivity_bound/100 = {}",
                surface.injectivity_bound() / 100.0
            ),
        ));
    }
    if !(length >= 0.0 && length.is_finite()) {
        return Err(Error::config("length", format!("must be nonnegative, got {length}")));
    }
    Ok(())
}

/// The default integration step for a surface: fine enough for sub-1e-9
/// shooting accuracy on the built-ins, capped by `injectivity_bound/100`.
pub fn default_step(surface: &Surface) -> f64 {
    let base: f64 = if surface.has_bumps() { 2.5e-3 } else { 5e-3 };
    base.min(surface.injectivity_bound() / 100.0)
}

/// Integrates the unit-speed geodesic from `x` in direction `theta`,
/// sampling every `step`.
pub fn integrate_geodesic(
    surface: &Surface,
    x: &ChartPoint,
    theta: TangentDirection,
    length: f64,
    step: f64,
) -> Result<GeodesicTrace> {
    check_step(surface, length, step)?;
    let mut it = Integrator::new(surface, x, theta.angle)?;
    let n = (length / step).floor() as usize;
    let mut trace = GeodesicTrace {
        initial: (*x, theta),
        samples: Vec::with_capacity(n + 2),
        terminal_length: length,
        max_renormalization: 0.0,
    };
    trace.samples.push(it.state());
    let fail = |it: &Integrator, mut trace: GeodesicTrace, reason: String| {
        trace.max_renormalization = it.max_renormalization;
        trace.terminal_length = it.arc_length;
        Error::Integration {
            arc_length: it.arc_length,
            reason,
            partial: Box::new(trace),
        }
    };
    for _ in 0..n {
        if let Err(reason) = it.step(step) {
            return Err(fail(&it, trace, reason));
        }
        trace.samples.push(it.state());
    }
    let rest = length - n as f64 * step;
    if rest > 1e-14 {
        if let Err(reason) = it.step(rest) {
            return Err(fail(&it, trace, reason));
        }
        trace.samples.push(it.state());
    }
    if let Some(last) = trace.samples.last_mut() {
        last.arc_length = length;
    }
    trace.max_renormalization = it.max_renormalization;
    Ok(trace)
}

/// `exp_x(t·θ)` at the default step.
pub fn exp_map(surface: &Surface, x: &ChartPoint, theta: TangentDirection, t: f64) -> Result<ChartPoint> {
    exp_map_with_step(surface, x, theta, t, default_step(surface))
}

pub fn exp_map_with_step(
    surface: &Surface,
    x: &ChartPoint,
    theta: TangentDirection,
    t: f64,
    step: f64,
) -> Result<ChartPoint> {
    check_step(surface, t, step)?;
    if t == 0.0 {
        return Ok(*x);
    }
    Ok(shoot(surface, x, theta.angle, t, step)?.0)
}

/// End point and chart velocity of the geodesic of length `t`.
pub(crate) fn shoot(
    surface: &Surface,
    x: &ChartPoint,
    angle: f64,
    t: f64,
    step: f64,
) -> Result<(ChartPoint, [f64; 2])> {
    let mut it = Integrator::new(surface, x, angle)?;
    it.advance(t, step).map_err(|reason| Error::Integration {
        arc_length: it.arc_length,
        reason,
        partial: Box::new(GeodesicTrace {
            initial: (*x, TangentDirection::new(angle)),
            samples: vec![it.state()],
            terminal_length: it.arc_length,
            max_renormalization: it.max_renormalization,
        }),
    })?;
    Ok((it.pos, it.vel))
}

/// Result of a converged two-point shot.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Shot {
    pub angle: f64,
    pub length: f64,
    pub end: ChartPoint,
    pub end_vel: [f64; 2],
    pub miss: f64,
}

/// Gauss-Newton on `(launch angle, length)` minimizing the 3D miss
/// `|exp_x(t·θ) − target|`. The angle column of the Jacobian is a forward
/// difference; the length column is the arriving unit velocity.
pub(crate) fn refine_shot(
    surface: &Surface,
    x: &ChartPoint,
    angle0: f64,
    length0: f64,
    target: &Vector3<f64>,
    step: f64,
    tol: f64,
) -> Result<Shot> {
    const MAX_ITER: usize = 30;
    const DELTA: f64 = 1e-7;
    let (mut angle, mut length) = (angle0, length0.max(0.0));
    let mut best: Option<Shot> = None;
    for _ in 0..MAX_ITER {
        let (end, end_vel) = shoot(surface, x, angle, length, step)?;
        let pos = surface.embed(&end);
        let miss_vec = pos - target;
        let miss = miss_vec.norm();
        let shot = Shot {
            angle: circle::normalize(angle),
            length,
            end,
            end_vel,
            miss,
        };
        if best.is_none_or(|b| miss < b.miss) {
            best = Some(shot);
        }
        if miss <= tol {
            return Ok(shot);
        }
        let (end2, _) = shoot(surface, x, angle + DELTA, length, step)?;
        let col_a = (surface.embed(&end2) - pos) / DELTA;
        let col_t = surface.push_forward(&end, end_vel);
        let jtj = Matrix2::new(
            col_a.dot(&col_a),
            col_a.dot(&col_t),
            col_a.dot(&col_t),
            col_t.dot(&col_t),
        );
        let jtr = Vector2::new(col_a.dot(&miss_vec), col_t.dot(&miss_vec));
        let damped = jtj + Matrix2::identity() * (1e-14 * jtj.trace());
        let Some(delta) = damped.lu().solve(&jtr) else {
            break;
        };
        // Trust region: never move the endpoint much more than the miss.
        let predicted = (col_a * delta[0] + col_t * delta[1]).norm();
        let scale = if predicted > 2.0 * miss + 1e-3 {
            (2.0 * miss + 1e-3) / predicted
        } else {
            1.0
        };
        angle -= scale * delta[0];
        length = (length - scale * delta[1]).max(0.0);
        if (scale * delta[0]).abs() < 1e-15 && (scale * delta[1]).abs() < 1e-15 {
            break;
        }
    }
    let b = best.expect("at least one iteration");
    if b.miss <= tol {
        Ok(b)
    } else {
        Err(Error::Solver(format!(
            "shot from {x:?} missed its target by {:.3e} (launch angle {:.6}, length {:.6})",
            b.miss, b.angle, b.length
        )))
    }
}

/// Geodesic polar coordinates `(θ, d)` of `z` about `center`, valid within
/// the injectivity bound.
pub fn polar_coordinates(surface: &Surface, center: &ChartPoint, z: &ChartPoint) -> Result<(TangentDirection, f64)> {
    polar_coordinates_with_step(surface, center, z, default_step(surface))
}

pub fn polar_coordinates_with_step(
    surface: &Surface,
    center: &ChartPoint,
    z: &ChartPoint,
    step: f64,
) -> Result<(TangentDirection, f64)> {
    let inj = surface.injectivity_bound();
    check_step(surface, inj, step)?;
    let c3 = surface.embed(center);
    let target = surface.embed(z);
    let chord = target - c3;
    if chord.norm() == 0.0 {
        return Ok((TangentDirection::new(0.0), 0.0));
    }
    let tol = 1e-11;
    // The chord points along the geodesic to first order; try it before scanning.
    if chord.norm() < inj {
        let angle = surface.tangent_angle(center, &chord);
        if let Ok(shot) = refine_shot(surface, center, angle, chord.norm(), &target, step, tol) {
            if shot.length < inj {
                return Ok((TangentDirection::new(shot.angle), shot.length));
            }
        }
    }
    // Coarse scan of 64 rays out to the injectivity bound.
    let rays = 64;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..rays {
        let angle = std::f64::consts::TAU * i as f64 / rays as f64;
        let mut it = Integrator::new(surface, center, angle)?;
        let mut s = 0.0;
        let coarse = 4.0 * step;
        while s < inj {
            let h = coarse.min(inj - s);
            if it.step(h).is_err() {
                break;
            }
            s += h;
            let gap = (it.position3() - target).norm();
            if gap < best.0 {
                best = (gap, angle, s);
            }
        }
    }
    let shot = refine_shot(surface, center, best.1, best.2, &target, step, tol)?;
    if shot.length >= inj {
        return Err(Error::Domain {
            point: *z,
            chart: "polar ball",
        });
    }
    Ok((TangentDirection::new(shot.angle), shot.length))
}
