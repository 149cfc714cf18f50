//! Edge-avoiding à-trous wavelet filter guided by the GBuffer.

use crate::color::Rgb;
use crate::image::ImageBuffer;
use crate::path::GBuffer;
use crate::Vec3;

const KERNEL: [f32; 5] = [1.0 / 16.0, 1.0 / 4.0, 3.0 / 8.0, 1.0 / 4.0, 1.0 / 16.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenoiseParams {
    pub levels: usize,
    /// Normal edge stop, in cosine distance.
    pub sigma_normal: f64,
    pub sigma_albedo: f64,
    /// Relative camera-distance edge stop.
    pub sigma_depth: f64,
}

impl Default for DenoiseParams {
    fn default() -> Self {
        Self { levels: 5, sigma_normal: 0.1, sigma_albedo: 0.2, sigma_depth: 0.5 }
    }
}

impl DenoiseParams {
    /// Largest pixel distance any output pixel gathers from.
    pub fn footprint(&self) -> usize {
        (0..self.levels).map(|i| 2usize << i).sum()
    }
}

#[derive(Clone, Copy)]
struct Feature {
    normal: Vec3,
    albedo: Rgb<f64>,
    distance: f64,
}

fn edge_weight(p: &Option<Feature>, q: &Option<Feature>, params: &DenoiseParams) -> f32 {
    match (p, q) {
        (None, None) => 1.0,
        (Some(a), Some(b)) => {
            let dn = (1.0 - a.normal.dot(b.normal)).max(0.0) / params.sigma_normal;
            let da = (a.albedo + b.albedo * -1.0).channels().iter().map(|c| c * c).sum::<f64>()
                / (params.sigma_albedo * params.sigma_albedo);
            let dd = (a.distance - b.distance).abs() / (params.sigma_depth * a.distance.max(1e-9));
            (-(dn + da + dd)).exp() as f32
        }
        _ => 0.0,
    }
}

/// Filters `input` inside the dilation of its non-zero pixels by the filter
/// footprint; pixels outside that mask are zero in the output.
pub fn atrous_filter(input: &ImageBuffer<f32>, gbuffer: &GBuffer, camera: Vec3, params: &DenoiseParams) -> ImageBuffer<f32> {
    let (w, h) = (input.width(), input.height());
    assert_eq!((w, h), (gbuffer.width, gbuffer.height));
    let features: Vec<Option<Feature>> = gbuffer
        .samples
        .iter()
        .map(|s| {
            s.map(|s| Feature { normal: s.normal, albedo: s.albedo, distance: (s.position - camera).length() })
        })
        .collect();
    let mask = dilate(input, params.footprint());
    let mut cur: Vec<Rgb<f32>> = input.pixels().to_vec();
    let mut next = vec![Rgb::black(); w * h];
    for level in 0..params.levels {
        let step = 1i64 << level;
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if !mask[i] {
                    continue;
                }
                let mut acc = Rgb::<f32>::black();
                let mut wsum = 0.0f32;
                for (ky, kwy) in KERNEL.iter().enumerate() {
                    let qy = y as i64 + (ky as i64 - 2) * step;
                    if qy < 0 || qy >= h as i64 {
                        continue;
                    }
                    for (kx, kwx) in KERNEL.iter().enumerate() {
                        let qx = x as i64 + (kx as i64 - 2) * step;
                        if qx < 0 || qx >= w as i64 {
                            continue;
                        }
                        let j = qy as usize * w + qx as usize;
                        let wt = kwx * kwy * edge_weight(&features[i], &features[j], params);
                        acc += cur[j] * wt;
                        wsum += wt;
                    }
                }
                next[i] = if wsum > 0.0 { acc * (1.0 / wsum) } else { cur[i] };
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    for (c, m) in cur.iter_mut().zip(&mask) {
        if !*m {
            *c = Rgb::black();
        }
    }
    ImageBuffer::from_pixels(w, h, cur)
}

/// Pixels within Chebyshev distance `r` of a non-black pixel.
fn dilate(img: &ImageBuffer<f32>, r: usize) -> Vec<bool> {
    let (w, h) = (img.width(), img.height());
    let src: Vec<bool> = img.pixels().iter().map(|p| !p.is_black()).collect();
    let mut rows = vec![false; w * h];
    for y in 0..h {
        let mut last: Option<usize> = None;
        let mut next_on = vec![usize::MAX; w];
        for x in (0..w).rev() {
            if src[y * w + x] {
                last = Some(x);
            }
            next_on[x] = last.unwrap_or(usize::MAX);
        }
        let mut prev: Option<usize> = None;
        for x in 0..w {
            if src[y * w + x] {
                prev = Some(x);
            }
            let near_left = prev.is_some_and(|p| x - p <= r);
            let near_right = next_on[x] != usize::MAX && next_on[x] - x <= r;
            rows[y * w + x] = near_left || near_right;
        }
    }
    let mut out = vec![false; w * h];
    for x in 0..w {
        for y in 0..h {
            let lo = y.saturating_sub(r);
            let hi = (y + r).min(h - 1);
            out[y * w + x] = (lo..=hi).any(|yy| rows[yy * w + x]);
        }
    }
    out
}
