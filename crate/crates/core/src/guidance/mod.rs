//! Guided image-plane proposals: denoised per-partition guidance images, the
//! symmetric offset set and the candidate weights built from them.

mod denoise;
mod offsets;

pub use denoise::{atrous_filter, DenoiseParams};
pub use offsets::OffsetSet;

use std::f64::consts::FRAC_1_PI;
use std::path::Path as FsPath;

use rayon::prelude::*;

use crate::error::Result;
use crate::image::{write_pfm, ImageBuffer};
use crate::partition::PartitionSet;
use crate::path::{GBuffer, Prepass};
use crate::rng::RandomStream;
use crate::Vec3;

pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_Y_SIZE: usize = 129;
pub const DEFAULT_RADIUS: u32 = 24;
/// Relative floor applied to in-bounds candidate weights.
pub const WEIGHT_FLOOR: f64 = 1e-8;

/// Denoised contribution of one partition, scaled to maximum luminance 1.
#[derive(Clone, Debug, PartialEq)]
pub struct GuidanceImage {
    pub partition: usize,
    pub d: ImageBuffer<f32>,
    pub epsilon: f64,
}

impl GuidanceImage {
    /// Visibility surrogate: 1 where the guidance luminance exceeds epsilon, epsilon elsewhere.
    #[inline]
    pub fn visibility(&self, x: usize, y: usize) -> f64 {
        if self.d.get(x, y).luminance() as f64 > self.epsilon {
            1.0
        } else {
            self.epsilon
        }
    }

    pub fn write_pfm(&self, path: impl AsRef<FsPath>) -> Result<()> {
        write_pfm(&self.d, path)
    }
}

/// Denoises `splat` and normalizes it. An all-zero splat gives an all-zero image.
pub fn build_guidance(
    partition: usize,
    splat: &ImageBuffer<f32>,
    gbuffer: &GBuffer,
    camera: Vec3,
    params: &DenoiseParams,
    epsilon: f64,
) -> GuidanceImage {
    assert!(epsilon > 0.0);
    let mut d = atrous_filter(splat, gbuffer, camera, params);
    for p in d.pixels_mut() {
        *p = p.map(|c| if c.is_finite() { c.max(0.0) } else { 0.0 });
    }
    let max = d.max_luminance();
    if max > 0.0 {
        d.scale(1.0 / max);
    }
    GuidanceImage { partition, d, epsilon }
}

/// Sum of pre-pass splats over the signatures owned by `partition`.
pub fn partition_splat(prepass: &Prepass, set: &PartitionSet, partition: usize) -> ImageBuffer<f32> {
    let mut img = ImageBuffer::new(prepass.width, prepass.height);
    for (sig, s) in &prepass.splats {
        if set.contains(partition, *sig) {
            for (a, b) in img.pixels_mut().iter_mut().zip(s.pixels()) {
                *a += *b;
            }
        }
    }
    img
}

/// Guidance images for every partition of `set`, in partition order.
pub fn build_all_guidance(
    prepass: &Prepass,
    set: &PartitionSet,
    camera: Vec3,
    params: &DenoiseParams,
    epsilon: f64,
) -> Vec<GuidanceImage> {
    (0..set.partitions.len())
        .into_par_iter()
        .map(|i| build_guidance(i, &partition_splat(prepass, set, i), &prepass.gbuffer, camera, params, epsilon))
        .collect()
}

/// What a candidate's primary vertex connects to on the current path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Anchor {
    /// Reconnection to a fixed vertex; `two_sided` is false for emitters.
    Point { position: Vec3, normal: Vec3, two_sided: bool },
    /// Fixed outgoing direction at the primary vertex.
    Direction(Vec3),
    /// No diffuse vertex to reconnect: visibility only.
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    /// `None` when the shifted pixel is outside the image.
    pub pixel: Option<(usize, usize)>,
    pub weight: f64,
}

/// Weighted candidates around a center pixel, aligned with the offset set.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    pub center: (i64, i64),
    pub candidates: Vec<Candidate>,
    pub total: f64,
}

impl CandidateSet {
    /// Weight of the candidate at `offset_index`.
    #[inline]
    pub fn weight(&self, offset_index: usize) -> f64 {
        self.candidates[offset_index].weight
    }
}

/// Approximate prefix contribution of the primary vertex at `(x, y)`
/// connected to `anchor`, before the reversibility floor.
pub fn raw_weight(x: usize, y: usize, guidance: &GuidanceImage, gbuffer: &GBuffer, anchor: &Anchor) -> f64 {
    let v = guidance.visibility(x, y);
    let Some(s) = gbuffer.get(x, y) else {
        return if matches!(anchor, Anchor::None) { v } else { 0.0 };
    };
    let lead = s.camera_term * s.albedo.luminance() * FRAC_1_PI;
    match *anchor {
        Anchor::Point { position, normal, two_sided } => {
            let d = position - s.position;
            let d2 = d.length_squared();
            if d2 <= 0.0 {
                return 0.0;
            }
            let w = d / d2.sqrt();
            let cos_j = s.normal.dot(w).max(0.0);
            let cos_a = if two_sided { normal.dot(w).abs() } else { (-normal.dot(w)).max(0.0) };
            lead * cos_j * cos_a / d2 * v
        }
        Anchor::Direction(w) => lead * s.normal.dot(w).max(0.0) * v,
        Anchor::None => v,
    }
}

/// Candidate weights around `center`. In-bounds weights are floored at
/// `WEIGHT_FLOOR` times the largest one so every in-bounds move is
/// reversible; out-of-bounds candidates weigh 0. An out-of-bounds center
/// gives an empty set.
pub fn candidate_weights(
    center: (i64, i64),
    offsets: &OffsetSet,
    guidance: &GuidanceImage,
    gbuffer: &GBuffer,
    anchor: &Anchor,
) -> CandidateSet {
    let (w, h) = (gbuffer.width as i64, gbuffer.height as i64);
    let inside = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h;
    if !inside(center.0, center.1) {
        return CandidateSet { center, candidates: Vec::new(), total: 0.0 };
    }
    let mut candidates: Vec<Candidate> = offsets
        .offsets()
        .iter()
        .map(|&(dx, dy)| {
            let (x, y) = (center.0 + dx as i64, center.1 + dy as i64);
            if inside(x, y) {
                let (x, y) = (x as usize, y as usize);
                Candidate { pixel: Some((x, y)), weight: raw_weight(x, y, guidance, gbuffer, anchor) }
            } else {
                Candidate { pixel: None, weight: 0.0 }
            }
        })
        .collect();
    let max = candidates.iter().map(|c| c.weight).fold(0.0, f64::max);
    let eta = (WEIGHT_FLOOR * max).max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    for c in &mut candidates {
        if c.pixel.is_some() {
            c.weight = c.weight.max(eta);
            total += c.weight;
        }
    }
    CandidateSet { center, candidates, total }
}

/// Draws a candidate proportionally to its weight. Returns the offset index,
/// the pixel and its normalized probability.
pub fn sample_candidate(cs: &CandidateSet, stream: &mut RandomStream) -> Option<(usize, (usize, usize), f64)> {
    if !(cs.total > 0.0) {
        return None;
    }
    let target = stream.next_f64() * cs.total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, c) in cs.candidates.iter().enumerate() {
        if c.weight <= 0.0 {
            continue;
        }
        acc += c.weight;
        last = Some(i);
        if target < acc {
            break;
        }
    }
    let i = last?;
    let c = &cs.candidates[i];
    Some((i, c.pixel.expect("positive weight implies in bounds"), c.weight / cs.total))
}

/// Metropolis-Hastings acceptance of a guided move with forward density
/// `w_new_in_old / total_old` and reverse density `w_old_in_new / total_new`.
pub fn guided_acceptance(
    s_old: f64,
    s_new: f64,
    w_old_in_new: f64,
    w_new_in_old: f64,
    total_old: f64,
    total_new: f64,
) -> f64 {
    assert!(s_old > 0.0, "the current state must have positive contribution");
    if !(s_new > 0.0) || !(w_old_in_new > 0.0) || !(w_new_in_old > 0.0) {
        return 0.0;
    }
    let ratio = (s_new / s_old) * (w_old_in_new / total_new) / (w_new_in_old / total_old);
    if ratio.is_nan() {
        0.0
    } else {
        ratio.min(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::PrimarySample;
    use crate::color::Rgb;

    fn flat(w: usize, h: usize, level: f32) -> (GuidanceImage, GBuffer) {
        let s = PrimarySample {
            position: Vec3::new(0.0, 0.0, 0.0),
            normal: Vec3::new(0.0, 1.0, 0.0),
            albedo: Rgb::splat(0.5),
            camera_term: 1.0,
            depth: 1,
        };
        let g = GuidanceImage { partition: 0, d: ImageBuffer::filled(w, h, Rgb::splat(level)), epsilon: 1e-3 };
        (g, GBuffer { width: w, height: h, samples: vec![Some(s); w * h] })
    }

    #[test]
    fn visibility_cases() {
        let (mut g, _) = flat(3, 1, 0.5);
        g.d.set(1, 0, Rgb::black());
        g.d.set(2, 0, Rgb::splat(1e-3));
        assert_eq!(g.visibility(0, 0), 1.0);
        assert_eq!(g.visibility(1, 0), 1e-3);
        // luminance of a grey pixel equals its level up to f32 rounding
        let at = g.d.get(2, 0).luminance() as f64;
        g.epsilon = at;
        assert_eq!(g.visibility(2, 0), at);
    }

    #[test]
    fn uniform_weights_and_floor() {
        let (g, gb) = flat(40, 40, 1.0);
        let off = OffsetSet::sparse(33, 8, 0).unwrap();
        let anchor = Anchor::Direction(Vec3::new(0.0, 1.0, 0.0));
        let cs = candidate_weights((20, 20), &off, &g, &gb, &anchor);
        let w0 = cs.candidates[0].weight;
        assert!(cs.candidates.iter().all(|c| (c.weight - w0).abs() < 1e-15 * w0));
        let sum: f64 = cs.candidates.iter().map(|c| c.weight / cs.total).sum();
        assert!((sum - 1.0).abs() < 1e-12);

        // near a corner some candidates fall outside
        let cs = candidate_weights((0, 0), &off, &g, &gb, &anchor);
        assert!(cs.candidates.iter().any(|c| c.pixel.is_none() && c.weight == 0.0));
        assert!(cs.total > 0.0);

        // backfacing anchor: everything floored, still a valid distribution
        let cs = candidate_weights((20, 20), &off, &g, &gb, &Anchor::Direction(Vec3::new(0.0, -1.0, 0.0)));
        assert!(cs.total > 0.0 && cs.candidates.iter().all(|c| c.weight > 0.0));

        assert_eq!(candidate_weights((-1, 3), &off, &g, &gb, &anchor).total, 0.0);
    }

    #[test]
    fn epsilon_scales_invisible_candidates() {
        let (mut g, gb) = flat(16, 16, 1.0);
        for y in 0..16 {
            for x in 8..16 {
                g.d.set(x, y, Rgb::black());
            }
        }
        let off = OffsetSet::full(3).unwrap();
        let anchor = Anchor::Point { position: Vec3::new(0.3, 2.0, 0.1), normal: Vec3::new(0.0, -1.0, 0.0), two_sided: false };
        let cs = candidate_weights((8, 8), &off, &g, &gb, &anchor);
        let (lit, _) = flat(16, 16, 1.0);
        let reference = candidate_weights((8, 8), &off, &lit, &gb, &anchor);
        for (c, r) in cs.candidates.iter().zip(&reference.candidates) {
            let (x, _) = c.pixel.unwrap();
            let expect = if x >= 8 { r.weight * 1e-3 } else { r.weight };
            assert!((c.weight - expect).abs() <= 1e-15 * expect);
        }
    }

    #[test]
    fn sampling_frequencies() {
        let cs = CandidateSet {
            center: (1, 0),
            candidates: vec![
                Candidate { pixel: Some((0, 0)), weight: 1.0 },
                Candidate { pixel: Some((1, 0)), weight: 1.0 },
                Candidate { pixel: Some((2, 0)), weight: 2.0 },
            ],
            total: 4.0,
        };
        let mut stream = RandomStream::new(3, 0);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let (i, p, prob) = sample_candidate(&cs, &mut stream).unwrap();
            assert_eq!(p.0, i);
            assert_eq!(prob, cs.candidates[i].weight / 4.0);
            counts[i] += 1;
        }
        for (c, p) in counts.iter().zip([0.25, 0.25, 0.5]) {
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - n as f64 * p).abs() < 3.0 * sigma, "{counts:?}");
        }

        let single = CandidateSet {
            center: (0, 0),
            candidates: vec![Candidate { pixel: None, weight: 0.0 }, Candidate { pixel: Some((4, 4)), weight: 0.5 }],
            total: 0.5,
        };
        assert_eq!(sample_candidate(&single, &mut stream), Some((1, (4, 4), 1.0)));
    }

    #[test]
    fn acceptance_cases() {
        assert_eq!(guided_acceptance(2.0, 2.0, 0.3, 0.3, 5.0, 5.0), 1.0);
        assert_eq!(guided_acceptance(2.0, 0.0, 0.3, 0.3, 5.0, 5.0), 0.0);
        let a = guided_acceptance(2.0, 1.0, 0.3, 0.3, 5.0, 5.0);
        assert!((a - 0.5).abs() < 1e-15);
        let a = guided_acceptance(1.0, 1.0, 1.0, 2.0, 4.0, 4.0);
        assert!((a - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_splat_gives_zero_guidance() {
        let (_, gb) = flat(8, 8, 0.0);
        let g = build_guidance(2, &ImageBuffer::new(8, 8), &gb, Vec3::new(0.0, 5.0, 0.0), &DenoiseParams::default(), 1e-3);
        assert!(g.d.pixels().iter().all(|p| p.is_black()));
        assert_eq!(g.visibility(3, 3), 1e-3);
    }

    #[test]
    fn guidance_is_normalized() {
        let (_, gb) = flat(12, 12, 0.0);
        let mut splat = ImageBuffer::new(12, 12);
        splat.set(5, 5, Rgb::splat(40.0f32));
        splat.set(6, 5, Rgb::splat(10.0f32));
        let g = build_guidance(0, &splat, &gb, Vec3::new(0.0, 5.0, 0.0), &DenoiseParams::default(), 1e-3);
        assert!((g.d.max_luminance() - 1.0).abs() < 1e-6);
        assert!(g.d.pixels().iter().all(|p| p.min_channel() >= 0.0 && p.is_finite()));
    }
}
