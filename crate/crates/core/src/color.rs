//! Linear RGB radiance triples and the scalar contribution used as the MCMC target.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign};

use crate::num::Real;

/// Rec.709 luminance weights.
pub const LUMINANCE_WEIGHTS: [f64; 3] = [0.2126, 0.7152, 0.0722];

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Rgb<T> {
    pub r: T,
    pub g: T,
    pub b: T,
}

impl<T: Real> Rgb<T> {
    #[inline]
    pub const fn new(r: T, g: T, b: T) -> Self {
        Self { r, g, b }
    }

    /// Builds a colour from physical quantities, clamping negative round-off to zero.
    #[inline]
    pub fn clamped(r: T, g: T, b: T) -> Self {
        Self::new(r.max(T::zero()), g.max(T::zero()), b.max(T::zero()))
    }

    #[inline]
    pub fn black() -> Self {
        Self::splat(T::zero())
    }

    #[inline]
    pub fn splat(v: T) -> Self {
        Self::new(v, v, v)
    }

    #[inline]
    pub fn is_black(self) -> bool {
        self.r == T::zero() && self.g == T::zero() && self.b == T::zero()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.r.is_finite() && self.g.is_finite() && self.b.is_finite()
    }

    #[inline]
    pub fn max_channel(self) -> T {
        self.r.max(self.g).max(self.b)
    }

    #[inline]
    pub fn min_channel(self) -> T {
        self.r.min(self.g).min(self.b)
    }

    #[inline]
    pub fn channels(self) -> [T; 3] {
        [self.r, self.g, self.b]
    }

    #[inline]
    pub fn from_channels(c: [T; 3]) -> Self {
        Self::new(c[0], c[1], c[2])
    }

    #[inline]
    pub fn map(self, f: impl Fn(T) -> T) -> Self {
        Self::new(f(self.r), f(self.g), f(self.b))
    }

    #[inline]
    pub fn luminance(self) -> T {
        scalar_contribution(self)
    }

    /// Lossless widening/narrowing between scalar types (up to the target precision).
    #[inline]
    pub fn cast<U: Real>(self) -> Rgb<U> {
        Rgb::new(U::lit(self.r.as_f64()), U::lit(self.g.as_f64()), U::lit(self.b.as_f64()))
    }
}

/// Scalar contribution of an RGB path contribution: its Rec.709 luminance.
#[inline]
pub fn scalar_contribution<T: Real>(c: Rgb<T>) -> T {
    debug_assert!(
        !(c.r.is_nan() || c.g.is_nan() || c.b.is_nan()),
        "NaN contribution"
    );
    T::lit(LUMINANCE_WEIGHTS[0]) * c.r
        + T::lit(LUMINANCE_WEIGHTS[1]) * c.g
        + T::lit(LUMINANCE_WEIGHTS[2]) * c.b
}

impl<T: Real> Add for Rgb<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.r + o.r, self.g + o.g, self.b + o.b)
    }
}

impl<T: Real> AddAssign for Rgb<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Mul for Rgb<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(self.r * o.r, self.g * o.g, self.b * o.b)
    }
}

impl<T: Real> MulAssign for Rgb<T> {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Real> Mul<T> for Rgb<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.r * s, self.g * s, self.b * s)
    }
}

impl<T: Real> MulAssign<T> for Rgb<T> {
    #[inline]
    fn mul_assign(&mut self, s: T) {
        *self = *self * s;
    }
}

impl<T: Real> Div<T> for Rgb<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.r / s, self.g / s, self.b / s)
    }
}
