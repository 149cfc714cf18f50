use std::f64::consts::PI;

use pathpart::guidance::{
    candidate_weights, raw_weight, sample_candidate, Anchor, GuidanceImage, OffsetSet, WEIGHT_FLOOR,
};
use pathpart::image::ImageBuffer;
use pathpart::path::{GBuffer, PrimarySample};
use pathpart::{color, RandomStream, Vec3};
use proptest::prelude::*;

fn random_unit(s: &mut RandomStream) -> Vec3 {
    let z = 1.0 - 2.0 * s.next_f64();
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = 2.0 * PI * s.next_f64();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Random GBuffer with holes, black albedo and assorted orientations, and a
/// random guidance image with dark regions.
fn random_setup(w: usize, h: usize, seed: u64) -> (GuidanceImage, GBuffer) {
    let mut s = RandomStream::new(seed, 0);
    let samples = (0..w * h)
        .map(|_| {
            if s.next_f64() < 0.1 {
                return None;
            }
            let a = if s.next_f64() < 0.1 { 0.0 } else { s.next_f64() };
            Some(PrimarySample {
                position: Vec3::new(4.0 * s.next_f64() - 2.0, 4.0 * s.next_f64() - 2.0, -3.0 * s.next_f64()),
                normal: random_unit(&mut s),
                albedo: color::Rgb::new(a, a * s.next_f64(), a * 0.5),
                camera_term: s.next_f64(),
                depth: 1,
            })
        })
        .collect();
    let d = ImageBuffer::from_pixels(
        w,
        h,
        (0..w * h)
            .map(|_| if s.next_f64() < 0.3 { color::Rgb::black() } else { color::Rgb::splat(s.next_f64() as f32) })
            .collect(),
    );
    let epsilon = 10f64.powf(-1.0 - 4.0 * s.next_f64());
    (GuidanceImage { partition: 0, d, epsilon }, GBuffer { width: w, height: h, samples })
}

fn random_anchor(s: &mut RandomStream) -> Anchor {
    match s.next_index(3) {
        0 => Anchor::Point {
            position: Vec3::new(4.0 * s.next_f64() - 2.0, 2.0, 4.0 * s.next_f64() - 3.0),
            normal: random_unit(s),
            two_sided: s.next_f64() < 0.5,
        },
        1 => Anchor::Direction(random_unit(s)),
        _ => Anchor::None,
    }
}

/// The approximate prefix weight written out with plain arrays.
fn oracle_weight(g: &GuidanceImage, gb: &GBuffer, x: usize, y: usize, anchor: &Anchor) -> f64 {
    let p = g.d.pixels()[y * g.d.width() + x];
    let lum = 0.2126 * p.r as f64 + 0.7152 * p.g as f64 + 0.0722 * p.b as f64;
    let v = if lum > g.epsilon { 1.0 } else { g.epsilon };
    let sample = match (&gb.samples[y * gb.width + x], anchor) {
        (_, Anchor::None) => return v,
        (None, _) => return 0.0,
        (Some(s), _) => s,
    };
    let rho = 0.2126 * sample.albedo.r + 0.7152 * sample.albedo.g + 0.0722 * sample.albedo.b;
    let n = [sample.normal.x, sample.normal.y, sample.normal.z];
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let geometric = match anchor {
        Anchor::Point { position, normal, two_sided } => {
            let d = [position.x - sample.position.x, position.y - sample.position.y, position.z - sample.position.z];
            let d2 = dot(d, d);
            let len = d2.sqrt();
            let w = [d[0] / len, d[1] / len, d[2] / len];
            let cj = dot(n, w).max(0.0);
            let m = [normal.x, normal.y, normal.z];
            let ca = if *two_sided { dot(m, w).abs() } else { (-dot(m, w)).max(0.0) };
            cj * ca / d2
        }
        Anchor::Direction(w) => dot(n, [w.x, w.y, w.z]).max(0.0),
        Anchor::None => unreachable!(),
    };
    sample.camera_term * rho / PI * geometric * v
}

#[test]
fn weights_match_an_independent_evaluation() {
    let offsets = OffsetSet::sparse(129, 24, 0).unwrap();
    let mut s = RandomStream::new(77, 1);
    for seed in 0..40 {
        let (g, gb) = random_setup(48, 40, seed);
        let anchor = random_anchor(&mut s);
        let center = (s.next_index(48) as i64, s.next_index(40) as i64);
        let cs = candidate_weights(center, &offsets, &g, &gb, &anchor);
        let raw: Vec<Option<f64>> = offsets
            .offsets()
            .iter()
            .map(|&(dx, dy)| {
                let (x, y) = (center.0 + dx as i64, center.1 + dy as i64);
                (x >= 0 && y >= 0 && x < 48 && y < 40).then(|| oracle_weight(&g, &gb, x as usize, y as usize, &anchor))
            })
            .collect();
        let max = raw.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
        let eta = (WEIGHT_FLOOR * max).max(f64::MIN_POSITIVE);
        for (c, r) in cs.candidates.iter().zip(&raw) {
            match r {
                None => {
                    assert!(c.pixel.is_none());
                    assert_eq!(c.weight, 0.0);
                }
                Some(r) => {
                    let expect = r.max(eta);
                    assert!((c.weight - expect).abs() <= 1e-10 * expect, "{} vs {}", c.weight, expect);
                    let (x, y) = c.pixel.unwrap();
                    let unfloored = raw_weight(x, y, &g, &gb, &anchor);
                    assert!((unfloored - r).abs() <= 1e-10 * r.max(1e-300));
                }
            }
        }
    }
}

#[test]
fn forward_densities_sum_to_one() {
    let offsets = OffsetSet::sparse(65, 8, 0).unwrap();
    let mut s = RandomStream::new(5, 5);
    for seed in 0..50 {
        let (g, gb) = random_setup(20, 20, seed + 100);
        let anchor = random_anchor(&mut s);
        let center = (s.next_index(20) as i64, s.next_index(20) as i64);
        let cs = candidate_weights(center, &offsets, &g, &gb, &anchor);
        let sum: f64 = cs.candidates.iter().map(|c| c.weight / cs.total).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
}

#[test]
fn uniform_weights_sample_uniformly() {
    let w = 40;
    let sample = PrimarySample {
        position: Vec3::zero(),
        normal: Vec3::new(0.0, 0.0, 1.0),
        albedo: color::Rgb::splat(0.7),
        camera_term: 1.0,
        depth: 1,
    };
    let gb = GBuffer { width: w, height: w, samples: vec![Some(sample); w * w] };
    let g = GuidanceImage { partition: 0, d: ImageBuffer::filled(w, w, color::Rgb::splat(1.0)), epsilon: 1e-3 };
    let offsets = OffsetSet::sparse(9, 8, 0).unwrap();
    let cs = candidate_weights((20, 20), &offsets, &g, &gb, &Anchor::None);
    let mut counts = vec![0usize; offsets.len()];
    let mut s = RandomStream::new(1, 2);
    let n = 90_000;
    for _ in 0..n {
        counts[sample_candidate(&cs, &mut s).unwrap().0] += 1;
    }
    let p = 1.0 / 9.0;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    for c in counts {
        assert!((c as f64 - n as f64 * p).abs() < 3.0 * sigma);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn every_forward_move_is_reversible(
        seed in 0u64..1_000_000,
        w in 4usize..40,
        h in 4usize..40,
        half in 1usize..40,
        radius in 1u32..48,
        draw in 0u64..1_000_000,
    ) {
        let (g, gb) = random_setup(w, h, seed);
        let offsets = OffsetSet::sparse(2 * half + 1, radius, seed % 7).unwrap();
        let mut s = RandomStream::new(draw, seed);
        let anchor = random_anchor(&mut s);
        let center = (s.next_index(w) as i64, s.next_index(h) as i64);
        let forward = candidate_weights(center, &offsets, &g, &gb, &anchor);
        prop_assert!(forward.total > 0.0);
        let (i, pixel, prob) = sample_candidate(&forward, &mut s).unwrap();
        prop_assert!(prob > 0.0);
        let reverse = candidate_weights((pixel.0 as i64, pixel.1 as i64), &offsets, &g, &gb, &anchor);
        let back = offsets.len() - 1 - i;
        prop_assert_eq!(reverse.candidates[back].pixel, Some((center.0 as usize, center.1 as usize)));
        prop_assert!(reverse.weight(back) / reverse.total > 0.0);
    }
}
