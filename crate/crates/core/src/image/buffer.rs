use crate::color::Rgb;
use crate::num::Real;

/// Row-major RGB image with a per-pixel accumulation weight.
///
/// Pixel `(0, 0)` is the top-left corner.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer<T> {
    width: usize,
    height: usize,
    pixels: Vec<Rgb<T>>,
    weight: Vec<T>,
}

impl<T: Real> ImageBuffer<T> {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![Rgb::black(); width * height],
            weight: vec![T::zero(); width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<Rgb<T>>) -> Self {
        assert_eq!(width * height, pixels.len(), "pixel count mismatch");
        Self {
            width,
            height,
            weight: vec![T::zero(); pixels.len()],
            pixels,
        }
    }

    pub fn filled(width: usize, height: usize, value: Rgb<T>) -> Self {
        Self::from_pixels(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    #[inline]
    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Rgb<T> {
        self.pixels[self.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: Rgb<T>) {
        let i = self.index(x, y);
        self.pixels[i] = c;
    }

    /// Adds `c` to a pixel and bumps its accumulation weight by `w`.
    #[inline]
    pub fn splat(&mut self, x: usize, y: usize, c: Rgb<T>, w: T) {
        let i = self.index(x, y);
        self.pixels[i] += c;
        self.weight[i] += w;
    }

    #[inline]
    pub fn pixels(&self) -> &[Rgb<T>] {
        &self.pixels
    }

    #[inline]
    pub fn pixels_mut(&mut self) -> &mut [Rgb<T>] {
        &mut self.pixels
    }

    #[inline]
    pub fn weights(&self) -> &[T] {
        &self.weight
    }

    /// Sums another buffer of the same size into this one.
    pub fn merge(&mut self, other: &ImageBuffer<T>) {
        assert_eq!((self.width, self.height), (other.width, other.height));
        for (a, b) in self.pixels.iter_mut().zip(&other.pixels) {
            *a += *b;
        }
        for (a, b) in self.weight.iter_mut().zip(&other.weight) {
            *a += *b;
        }
    }

    pub fn scale(&mut self, s: T) {
        for p in &mut self.pixels {
            *p *= s;
        }
    }

    pub fn map(&self, f: impl Fn(Rgb<T>) -> Rgb<T>) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&c| f(c)).collect(),
            weight: self.weight.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.pixels.iter().all(|p| p.is_finite())
    }

    pub fn cast<U: Real>(&self) -> ImageBuffer<U> {
        ImageBuffer {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|p| p.cast()).collect(),
            weight: self.weight.iter().map(|&w| U::lit(w.as_f64())).collect(),
        }
    }

    /// Largest per-pixel scalar contribution.
    pub fn max_luminance(&self) -> T {
        self.pixels
            .iter()
            .map(|p| p.luminance())
            .fold(T::zero(), |a, b| a.max(b))
    }
}
