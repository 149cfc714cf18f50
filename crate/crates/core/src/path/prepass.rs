//! Monte Carlo pre-pass: per-signature record buffers, splatted images, the
//! GBuffer, and per-pixel statistics. Plain path-traced rendering shares the
//! same camera-sample schedule.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::trace::{jitter, walk, PrimarySurface, WalkControl, WalkSettings};
use super::{PathKey, Signature};
use crate::image::ImageBuffer;
use crate::rng::RandomStream;
use crate::scene::Scene;
use crate::{Image, Rgb, Vec3};

const TILE: usize = 16;

#[derive(Clone, Copy, Debug)]
pub struct PrepassConfig {
    /// Camera samples per pixel; at least 2.
    pub paths_per_pixel: usize,
    pub seed: u64,
}

/// One stored path: its weighted estimate and how to regenerate it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    pub c: Rgb,
    pub scalar: f64,
    pub pixel: u32,
    pub stream_id: u64,
    pub key: PathKey,
}

/// Records of one signature in deterministic (pass, tile, pixel) order.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionBuffer {
    pub signature: Signature,
    pub records: Vec<Record>,
}

impl PartitionBuffer {
    /// First `floor(n/2)` records and the rest.
    pub fn halves(&self) -> (&[Record], &[Record]) {
        self.records.split_at(self.records.len() / 2)
    }

    /// Total scalar contribution of the first half.
    pub fn gamma(&self) -> f64 {
        self.halves().0.iter().map(|r| r.scalar).sum()
    }
}

/// Attributes of the first non-specular vertex per pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimarySample {
    pub position: Vec3,
    /// Oriented toward the camera side.
    pub normal: Vec3,
    pub albedo: Rgb,
    /// Luminance of the specular throughput between camera and vertex.
    pub camera_term: f64,
    /// Index of the vertex along the path.
    pub depth: usize,
}

impl From<PrimarySurface> for PrimarySample {
    fn from(p: PrimarySurface) -> Self {
        Self {
            position: p.position,
            normal: p.normal,
            albedo: p.albedo,
            camera_term: p.throughput.luminance(),
            depth: p.depth,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GBuffer {
    pub width: usize,
    pub height: usize,
    pub samples: Vec<Option<PrimarySample>>,
}

impl GBuffer {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<&PrimarySample> {
        self.samples[y * self.width + x].as_ref()
    }
}

/// Per-pixel sums of camera-sample estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelStats {
    pub width: usize,
    pub height: usize,
    pub samples_per_pixel: u64,
    pub sum: Vec<Rgb>,
    pub sum_sq: Vec<Rgb>,
    pub sum_lum_sq: Vec<f64>,
}

impl PixelStats {
    fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            samples_per_pixel: 0,
            sum: vec![Rgb::black(); width * height],
            sum_sq: vec![Rgb::black(); width * height],
            sum_lum_sq: vec![0.0; width * height],
        }
    }

    #[inline]
    fn add(&mut self, i: usize, c: Rgb) {
        self.sum[i] += c;
        self.sum_sq[i] += c * c;
        self.sum_lum_sq[i] += c.luminance() * c.luminance();
    }

    pub fn image(&self) -> Image {
        let n = self.samples_per_pixel.max(1) as f64;
        Image::from_pixels(self.width, self.height, self.sum.iter().map(|&s| s / n).collect())
    }

    /// Per-channel variance of each pixel's mean estimate.
    pub fn variance_of_mean(&self, i: usize) -> Rgb {
        let n = self.samples_per_pixel as f64;
        if n < 2.0 {
            return Rgb::black();
        }
        let m = self.sum[i] / n;
        let var = (self.sum_sq[i] / n + m * m * -1.0).map(|v| v.max(0.0)) * (n / (n - 1.0));
        var / n
    }

    /// Standard error of the image-wide mean luminance.
    pub fn mean_luminance_sigma(&self) -> f64 {
        let n = self.samples_per_pixel as f64;
        if n < 2.0 {
            return 0.0;
        }
        let var: f64 = (0..self.sum.len())
            .map(|i| {
                let m = self.sum[i].luminance() / n;
                (self.sum_lum_sq[i] / n - m * m).max(0.0) * (n / (n - 1.0)) / n
            })
            .sum();
        var.sqrt() / self.sum.len() as f64
    }

    /// Mean luminance over the image.
    pub fn mean_luminance(&self) -> f64 {
        let n = self.samples_per_pixel.max(1) as f64;
        self.sum.iter().map(|s| s.luminance()).sum::<f64>() / (n * self.sum.len() as f64)
    }
}

pub struct Prepass {
    pub width: usize,
    pub height: usize,
    pub paths_per_pixel: usize,
    pub seed: u64,
    pub buffers: BTreeMap<Signature, PartitionBuffer>,
    /// Per-signature images of splatted estimates, averaged over samples per pixel.
    pub splats: BTreeMap<Signature, ImageBuffer<f32>>,
    pub gbuffer: GBuffer,
    pub stats: PixelStats,
}

impl Prepass {
    /// Total number of camera samples.
    #[inline]
    pub fn total_samples(&self) -> u64 {
        (self.paths_per_pixel * self.width * self.height) as u64
    }

    /// Mean path-traced image.
    pub fn image(&self) -> Image {
        self.stats.image()
    }

    /// CSV with one line per signature: `signature,path_count,gamma`.
    pub fn census_csv(&self) -> String {
        let mut s = String::from("signature,path_count,gamma\n");
        for (sig, b) in &self.buffers {
            let _ = writeln!(s, "{},{},{:.9e}", sig, b.records.len(), b.gamma());
        }
        s
    }
}

struct TileOutput {
    records: Vec<(Signature, Record)>,
    sums: Vec<(u32, Rgb)>,
    primary: Vec<(u32, Option<PrimarySurface>)>,
}

fn tiles(width: usize, height: usize) -> Vec<(usize, usize)> {
    let mut t = Vec::new();
    for ty in (0..height).step_by(TILE) {
        for tx in (0..width).step_by(TILE) {
            t.push((tx, ty));
        }
    }
    t
}

fn trace_tile(scene: &Scene, seed: u64, pass: usize, tile: (usize, usize), want_primary: bool) -> TileOutput {
    let (w, h) = (scene.camera.width, scene.camera.height);
    let npix = w * h;
    let settings = WalkSettings::default();
    let mut out = TileOutput { records: Vec::new(), sums: Vec::new(), primary: Vec::new() };
    for y in tile.1..(tile.1 + TILE).min(h) {
        for x in tile.0..(tile.0 + TILE).min(w) {
            let pixel = (y * w + x) as u32;
            let stream_id = (pass * npix) as u64 + pixel as u64;
            let mut stream = RandomStream::new(seed, stream_id);
            let u = jitter((x, y), &mut stream);
            let mut total = Rgb::black();
            let primary = walk(scene, u, &mut stream, &settings, |e| {
                let c = e.contribution();
                let scalar = c.luminance();
                total += c;
                if scalar > 0.0 {
                    out.records.push((e.signature(), Record { c, scalar, pixel, stream_id, key: e.key() }));
                }
                WalkControl::Continue
            });
            out.sums.push((pixel, total));
            if want_primary {
                out.primary.push((pixel, primary));
            }
        }
    }
    out
}

/// Runs the pre-pass. Passes over the image are sequential; tiles within a
/// pass run in parallel and merge in tile order, so the output does not
/// depend on the number of workers.
pub fn run_prepass(scene: &Scene, config: &PrepassConfig) -> Prepass {
    assert!(config.paths_per_pixel >= 2, "the pre-pass needs at least two samples per pixel");
    let (w, h) = (scene.camera.width, scene.camera.height);
    let tile_list = tiles(w, h);
    let mut buffers: BTreeMap<Signature, PartitionBuffer> = BTreeMap::new();
    let mut splats: BTreeMap<Signature, ImageBuffer<f32>> = BTreeMap::new();
    let mut gbuffer = GBuffer { width: w, height: h, samples: vec![None; w * h] };
    let mut stats = PixelStats::new(w, h);
    for pass in 0..config.paths_per_pixel {
        let outputs: Vec<TileOutput> = tile_list
            .par_iter()
            .map(|&t| trace_tile(scene, config.seed, pass, t, pass == 0))
            .collect();
        for out in outputs {
            for (sig, r) in out.records {
                let img = splats.entry(sig).or_insert_with(|| ImageBuffer::new(w, h));
                let (x, y) = (r.pixel as usize % w, r.pixel as usize / w);
                img.splat(x, y, r.c.cast::<f32>(), 1.0);
                buffers.entry(sig).or_insert_with(|| PartitionBuffer { signature: sig, records: Vec::new() }).records.push(r);
            }
            for (p, c) in out.sums {
                stats.add(p as usize, c);
            }
            for (p, s) in out.primary {
                gbuffer.samples[p as usize] = s.map(PrimarySample::from);
            }
        }
        stats.samples_per_pixel += 1;
    }
    let inv = 1.0 / config.paths_per_pixel as f32;
    for img in splats.values_mut() {
        img.scale(inv);
    }
    Prepass {
        width: w,
        height: h,
        paths_per_pixel: config.paths_per_pixel,
        seed: config.seed,
        buffers,
        splats,
        gbuffer,
        stats,
    }
}

/// Plain path tracing with `spp` camera samples per pixel. Uses the same
/// sample schedule as the pre-pass, so equal seeds give equal estimates.
pub fn render_pt(scene: &Scene, spp: usize, seed: u64) -> PixelStats {
    let (w, h) = (scene.camera.width, scene.camera.height);
    let npix = w * h;
    let settings = WalkSettings::default();
    let rows: Vec<PixelStats> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut row = PixelStats::new(w, 1);
            for x in 0..w {
                let pixel = y * w + x;
                for pass in 0..spp {
                    let mut stream = RandomStream::new(seed, (pass * npix + pixel) as u64);
                    let u = jitter((x, y), &mut stream);
                    let mut total = Rgb::black();
                    walk(scene, u, &mut stream, &settings, |e| {
                        total += e.contribution();
                        WalkControl::Continue
                    });
                    row.add(x, total);
                }
            }
            row
        })
        .collect();
    let mut stats = PixelStats::new(w, h);
    stats.samples_per_pixel = spp as u64;
    for (y, row) in rows.into_iter().enumerate() {
        stats.sum[y * w..(y + 1) * w].copy_from_slice(&row.sum);
        stats.sum_sq[y * w..(y + 1) * w].copy_from_slice(&row.sum_sq);
        stats.sum_lum_sq[y * w..(y + 1) * w].copy_from_slice(&row.sum_lum_sq);
    }
    stats
}
