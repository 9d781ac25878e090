//! Small fixed-size vector helpers for photon momenta and polarization vectors.
//!
//! Plain `[f64; 3]` is used everywhere instead of a linear-algebra crate: the
//! hot paths only ever need dot/cross products and these stay trivially inlinable.

pub type V3 = [f64; 3];

pub fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// `a / |a|`. Caller must guarantee `|a| > 0`.
pub fn unit(a: V3) -> V3 {
    let n = norm(a);
    debug_assert!(n > 0.0, "unit() of zero vector");
    scale(a, 1.0 / n)
}
