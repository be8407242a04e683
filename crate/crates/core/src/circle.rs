//! Arithmetic on the unit circle of tangent directions.

use std::f64::consts::{PI, TAU};

/// Normalizes an angle into `[0, 2π)`.
pub fn normalize(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Signed difference `b - a` wrapped into `(-π, π]`.
pub fn signed_diff(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Arc distance on the unit circle, in `[0, π]`.
pub fn arc_distance(a: f64, b: f64) -> f64 {
    signed_diff(a, b).abs()
}

/// Counter-clockwise gap from `a` to `b`, in `[0, 2π)`.
pub fn ccw_gap(a: f64, b: f64) -> f64 {
    normalize(b - a)
}

/// Distance from `angle` to the closest member of `set`; `π` for an empty set.
pub fn distance_to_set(angle: f64, set: &[f64]) -> f64 {
    set.iter().map(|&s| arc_distance(angle, s)).fold(PI, f64::min)
}

/// Whether `angle` lies on the counter-clockwise arc from `start` spanning `span`,
/// widened by `slack` on both ends.
pub fn in_arc(angle: f64, start: f64, span: f64, slack: f64) -> bool {
    let offset = ccw_gap(start - slack, angle);
    offset <= span + 2.0 * slack
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_distance_wraps() {
        assert!((arc_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-15);
        assert!((arc_distance(0.0, PI) - PI).abs() < 1e-15);
        assert_eq!(normalize(TAU), 0.0);
        assert!((normalize(-0.5) - (TAU - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn arcs_and_sets() {
        assert!(in_arc(0.05, TAU - 0.1, 0.2, 0.0));
        assert!(!in_arc(PI, TAU - 0.1, 0.2, 0.0));
        assert!(in_arc(0.11, TAU - 0.1, 0.2, 0.02));
        assert!((distance_to_set(1.0, &[0.0, 2.5]) - 1.0).abs() < 1e-15);
        assert_eq!(distance_to_set(1.0, &[]), PI);
    }
}
