#![allow(dead_code)]

use std::f64::consts::PI;

use pathpart::engine::{ChainContext, ChainState, KeyDistribution};
use pathpart::guidance::{GuidanceImage, OffsetSet};
use pathpart::partition::{init_chain, PartitionSet};
use pathpart::path::GBuffer;
use pathpart::scene::{Scene, Shape};
use pathpart::RandomStream;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Luminance of the direct-lighting integral over each pixel of the
/// `lit_plane` scene, by midpoint quadrature over the pixel and the light.
pub fn lit_plane_mass(scene: &Scene) -> Vec<f64> {
    let light = scene.lights()[0];
    let Shape::Quad { corner, edge1, edge2 } = scene.primitives()[light].shape else { unreachable!() };
    let area = edge1.cross(edge2).length();
    let (w, h) = (scene.camera.width, scene.camera.height);
    let (nu, nl) = (8, 32);
    // floor albedo (0.6, 0.5, 0.4) and radiance 5
    let lum = 0.2126 * 0.6 + 0.7152 * 0.5 + 0.0722 * 0.4;
    let mut out = Vec::with_capacity(w * h);
    for py in 0..h {
        for px in 0..w {
            let mut total = 0.0;
            for a in 0..nu {
                for b in 0..nu {
                    let u = (px as f64 + (a as f64 + 0.5) / nu as f64, py as f64 + (b as f64 + 0.5) / nu as f64);
                    let ray = scene.camera.generate_ray(u.0, u.1);
                    let t = -ray.origin.y / ray.dir.y;
                    let x = ray.origin + ray.dir * t;
                    for i in 0..nl {
                        for j in 0..nl {
                            let y = corner
                                + edge1 * ((i as f64 + 0.5) / nl as f64)
                                + edge2 * ((j as f64 + 0.5) / nl as f64);
                            let d = y - x;
                            let d2 = d.length_squared();
                            let c = d.y / d2.sqrt();
                            total += c * c / d2;
                        }
                    }
                }
            }
            out.push(lum * 5.0 / PI * total * area / (nl * nl * nu * nu) as f64);
        }
    }
    out
}

/// Chi-square goodness-of-fit p-value of `counts` against weights `expected`.
pub fn chi_square_p(counts: &[u64], expected: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let total: f64 = expected.iter().sum();
    let mut chi = 0.0;
    let mut dof = 0usize;
    for (&c, &e) in counts.iter().zip(expected) {
        let ex = e / total * n as f64;
        if ex > 0.0 {
            chi += (c as f64 - ex).powi(2) / ex;
            dof += 1;
        } else {
            assert_eq!(c, 0, "visits to a pixel with no mass");
        }
    }
    1.0 - ChiSquared::new((dof - 1) as f64).unwrap().cdf(chi)
}

/// Runs one chain in `partition` and counts pixel visits every `thin` steps.
#[allow(clippy::too_many_arguments)]
pub fn visit_histogram(
    scene: &Scene,
    set: &PartitionSet,
    prepass_seed: u64,
    partition: usize,
    guidance: Option<(&GuidanceImage, &GBuffer, &OffsetSet)>,
    large_step_probability: f64,
    steps: usize,
    thin: usize,
    seed: u64,
) -> Vec<u64> {
    let ctx = ChainContext {
        scene,
        set,
        partition,
        keys: KeyDistribution::for_partition(&set.partitions[partition]),
        guidance,
        large_step_probability,
    };
    let mut stream = RandomStream::new(seed, 0);
    let start = init_chain(set, partition, scene, prepass_seed, &mut stream, 0, |_, _| {}).unwrap();
    let mut chain = ChainState::new(start, partition, stream);
    for _ in 0..1024 {
        chain.step(&ctx);
    }
    let w = scene.camera.width;
    let mut counts = vec![0u64; w * scene.camera.height];
    for i in 0..steps {
        chain.step(&ctx);
        if i % thin == 0 {
            let (x, y) = chain.current.pixel();
            counts[y * w + x] += 1;
        }
    }
    counts
}
