//! Halton points and the radius-squared disk mapping used for kernel offsets.

use crate::num::Real;

/// Radical inverse of `index` in the given base.
pub fn radical_inverse<T: Real>(mut index: u64, base: u64) -> T {
    let inv_base = T::one() / T::lit(base as f64);
    let mut inv = inv_base;
    let mut acc = T::zero();
    while index > 0 {
        let digit = index % base;
        acc += T::lit(digit as f64) * inv;
        inv *= inv_base;
        index /= base;
    }
    acc
}

/// The `index`-th point of the 2D Halton sequence with bases 2 and 3.
pub fn ld_point<T: Real>(index: u64) -> (T, T) {
    (radical_inverse(index, 2), radical_inverse(index, 3))
}

/// Maps `(u, v)` to an integer pixel shift with `r = u^2 * radius`,
/// `theta = 2 pi v`.
///
/// Components are rounded to the nearest pixel. When rounding would push the
/// shift outside the disk, both components are truncated toward zero instead,
/// which keeps the Euclidean norm at or below `r`.
pub fn map_to_disk_offset<T: Real>(u: T, v: T, radius: T) -> (i32, i32) {
    debug_assert!(radius >= T::one());
    let r = u * u * radius;
    let theta = T::TAU() * v;
    let (x, y) = (r * theta.cos(), r * theta.sin());
    let (rx, ry) = (x.round(), y.round());
    let (ox, oy) = if rx * rx + ry * ry <= radius * radius {
        (rx, ry)
    } else {
        (x.trunc(), y.trunc())
    };
    (
        ox.to_i32().expect("offset fits i32"),
        oy.to_i32().expect("offset fits i32"),
    )
}
