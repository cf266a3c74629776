//! Angle arithmetic on the circle. All stored angles live in `[0, 2π)`.

use std::f64::consts::{PI, TAU};

/// Wraps an angle into `[0, 2π)`.
pub fn wrap(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Signed difference `b - a` taken along the smaller arc, in `(-π, π]`.
///
/// An exact half-turn resolves to `+π`, i.e. the counter-clockwise sweep from `a`.
pub fn signed_diff(a: f64, b: f64) -> f64 {
    let d = wrap(b - a);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Unsigned circular distance between two angles, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    signed_diff(a, b).abs()
}

/// Convex combination `(1 - t)·a1 + t·a2` taken along the smaller angular sector.
pub fn mix(t: f64, a1: f64, a2: f64) -> f64 {
    wrap(a1 + t * signed_diff(a1, a2))
}
