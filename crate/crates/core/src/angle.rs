//! Ring arithmetic shared by every module.

use num_traits::Float;

pub use core::f64::consts::{PI, TAU};

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_tau(x: f64) -> f64 {
    let r = x - TAU * Float::floor(x / TAU);
    if r >= TAU || r < 0.0 {
        0.0
    } else {
        r
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let r = wrap_tau(x);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Shortest distance between two points on the unit circle, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    Float::abs(wrap_pi(a - b))
}

/// `atan2` with the result mapped into `(-π, π]`.
pub fn atan2_pi(y: f64, x: f64) -> f64 {
    let t = Float::atan2(y, x);
    if t <= -PI {
        t + TAU
    } else {
        t
    }
}
