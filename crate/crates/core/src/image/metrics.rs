use crate::color::Rgb;
use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::num::Real;

/// Root-mean-square difference over all pixels and the three channels.
pub fn rmse<T: Real>(a: &ImageBuffer<T>, b: &ImageBuffer<T>) -> Result<T> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch(a.width(), a.height(), b.width(), b.height()));
    }
    if a.is_empty() {
        return Ok(T::zero());
    }
    let sum: T = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(p, q)| {
            let (dr, dg, db) = (p.r - q.r, p.g - q.g, p.b - q.b);
            dr * dr + dg * dg + db * db
        })
        .sum();
    Ok((sum / T::lit(3.0 * a.len() as f64)).sqrt())
}

pub fn mean_color<T: Real>(a: &ImageBuffer<T>) -> Rgb<T> {
    let mut acc = Rgb::black();
    for &p in a.pixels() {
        acc += p;
    }
    acc / T::lit(a.len().max(1) as f64)
}

/// Structured-noise score: the variance, across `tile x tile` blocks, of the
/// per-block variance of the luminance error `a - reference`.
///
/// Blotchy, clumped error (some blocks badly over- or under-sampled) scores
/// much higher than the same amount of error spread evenly.
pub fn tile_variance_of_variance<T: Real>(
    a: &ImageBuffer<T>,
    reference: &ImageBuffer<T>,
    tile: usize,
) -> Result<T> {
    if a.width() != reference.width() || a.height() != reference.height() {
        return Err(Error::DimensionMismatch(
            a.width(),
            a.height(),
            reference.width(),
            reference.height(),
        ));
    }
    assert!(tile >= 2);
    let mut variances = Vec::new();
    for ty in (0..a.height()).step_by(tile) {
        for tx in (0..a.width()).step_by(tile) {
            let mut errs = Vec::with_capacity(tile * tile);
            for y in ty..(ty + tile).min(a.height()) {
                for x in tx..(tx + tile).min(a.width()) {
                    errs.push(a.get(x, y).luminance() - reference.get(x, y).luminance());
                }
            }
            if errs.len() >= 2 {
                variances.push(sample_variance(&errs));
            }
        }
    }
    Ok(if variances.len() >= 2 { sample_variance(&variances) } else { T::zero() })
}

fn sample_variance<T: Real>(v: &[T]) -> T {
    let n = T::lit(v.len() as f64);
    let mean = v.iter().copied().sum::<T>() / n;
    v.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / (n - T::one())
}
