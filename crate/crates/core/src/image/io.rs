use std::fs;
use std::path::Path;

use crate::color::Rgb;
use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::num::Real;

/// Serializes a buffer as little-endian PFM (`PF`, scale `-1.0`, bottom-up rows).
pub fn encode_pfm<T: Real>(image: &ImageBuffer<T>) -> Result<Vec<u8>> {
    let (w, h) = (image.width(), image.height());
    let header = format!("PF\n{w} {h}\n-1.0\n");
    let mut out = Vec::with_capacity(header.len() + w * h * 12);
    out.extend_from_slice(header.as_bytes());
    for y in (0..h).rev() {
        for x in 0..w {
            let c = image.get(x, y);
            for v in c.channels() {
                if !v.is_finite() {
                    return Err(Error::InvalidImage(format!("non-finite value at ({x}, {y})")));
                }
                if v < T::zero() {
                    return Err(Error::InvalidImage(format!("negative value at ({x}, {y})")));
                }
                let f = v.to_f32().expect("finite");
                out.extend_from_slice(&f.to_le_bytes());
            }
        }
    }
    Ok(out)
}

/// Parses a colour PFM. Both byte orders are accepted; grayscale `Pf` is not.
pub fn decode_pfm<T: Real>(bytes: &[u8]) -> Result<ImageBuffer<T>> {
    let mut pos = 0usize;
    let mut token = || -> Result<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::MalformedImage("truncated header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    if magic != "PF" {
        return Err(Error::MalformedImage(format!("expected `PF` header, found `{magic}`")));
    }
    let parse_dim = |s: String| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| Error::MalformedImage(format!("invalid dimension `{s}`")))
    };
    let w = parse_dim(token()?)?;
    let h = parse_dim(token()?)?;
    let scale_tok = token()?;
    let scale: f32 = scale_tok
        .parse()
        .map_err(|_| Error::MalformedImage(format!("invalid scale `{scale_tok}`")))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::MalformedImage(format!("invalid scale `{scale_tok}`")));
    }
    // exactly one whitespace byte separates the header from the raster
    let data = &bytes[(pos + 1).min(bytes.len())..];
    let expected = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(12))
        .ok_or_else(|| Error::MalformedImage("dimensions overflow".into()))?;
    if data.len() < expected {
        return Err(Error::MalformedImage(format!(
            "raster has {} bytes, expected {expected}",
            data.len()
        )));
    }
    let little = scale < 0.0;
    let mut image = ImageBuffer::new(w, h);
    let mut chunks = data[..expected].chunks_exact(4).map(|c| {
        let b = [c[0], c[1], c[2], c[3]];
        let f = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
        T::lit(f as f64)
    });
    for y in (0..h).rev() {
        for x in 0..w {
            let r = chunks.next().expect("length checked");
            let g = chunks.next().expect("length checked");
            let b = chunks.next().expect("length checked");
            image.set(x, y, Rgb::new(r, g, b));
        }
    }
    Ok(image)
}

pub fn write_pfm<T: Real>(image: &ImageBuffer<T>, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode_pfm(image)?;
    fs::write(path.as_ref(), bytes).map_err(|e| Error::io(path.as_ref(), e))
}

pub fn read_pfm<T: Real>(path: impl AsRef<Path>) -> Result<ImageBuffer<T>> {
    let bytes = fs::read(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    decode_pfm(&bytes)
}

#[inline]
fn encode_channel<T: Real>(v: T) -> u8 {
    let v = v.as_f64();
    let v = if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 };
    (255.0 * v.powf(1.0 / 2.2)).round() as u8
}

/// 8-bit binary PPM (`P6`) with gamma 2.2 encoding.
pub fn encode_ppm<T: Real>(image: &ImageBuffer<T>) -> Vec<u8> {
    let (w, h) = (image.width(), image.height());
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    for p in image.pixels() {
        out.extend(p.channels().map(encode_channel));
    }
    out
}

pub fn write_ppm<T: Real>(image: &ImageBuffer<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path.as_ref(), encode_ppm(image)).map_err(|e| Error::io(path.as_ref(), e))
}
