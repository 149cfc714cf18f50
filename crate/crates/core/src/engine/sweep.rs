//! Grid over candidate-set size and radius, scored against a reference.

use std::fmt::Write as _;

use super::{prepare, run_chains, Kernel, RenderConfig};
use crate::error::Result;
use crate::guidance::{build_all_guidance, DenoiseParams, OffsetSet};
use crate::image::{rmse, tile_variance_of_variance};
use crate::scene::Scene;
use crate::Image;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub y_sizes: Vec<usize>,
    pub radii: Vec<u32>,
    /// Renders per grid point with different chain seeds; metrics are averaged.
    pub seeds: usize,
    /// Tile edge of the structured-noise metric.
    pub tile: usize,
    pub base: RenderConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            y_sizes: vec![9, 33, 65, 129],
            radii: vec![8, 24, 44, 128],
            seeds: 1,
            tile: 8,
            base: RenderConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub y_size: usize,
    pub radius: u32,
    pub rmse: f64,
    pub structured_noise: f64,
}

/// Renders every grid point with partitioned guided MLT. The pre-pass,
/// partitions and guidance images are shared across the grid.
pub fn run_sweep(scene: &Scene, config: &SweepConfig, reference: &Image) -> Result<Vec<SweepRow>> {
    config.base.validate()?;
    let prepared = prepare(scene, &config.base, config.base.k);
    let guidance = build_all_guidance(
        &prepared.prepass,
        &prepared.set,
        scene.camera.position,
        &DenoiseParams::default(),
        config.base.epsilon,
    );
    let mut rows = Vec::new();
    for &y in &config.y_sizes {
        for &r in &config.radii {
            let offsets = match config.base.kernel {
                Kernel::Sparse => OffsetSet::sparse(y, r, 0)?,
                Kernel::Full => OffsetSet::full(r)?,
            };
            let (mut e, mut s) = (0.0, 0.0);
            for k in 0..config.seeds.max(1) {
                let cfg = RenderConfig { y_size: y, radius: r, seed: config.base.seed + 1 + k as u64, ..config.base.clone() };
                let out = run_chains(scene, &prepared, Some((&guidance, &offsets)), &cfg);
                e += rmse(&out.image, reference)?;
                s += tile_variance_of_variance(&out.image, reference, config.tile)?;
            }
            let n = config.seeds.max(1) as f64;
            rows.push(SweepRow { y_size: y, radius: r, rmse: e / n, structured_noise: s / n });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("y_size,radius,rmse,structured_noise\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{:.9e},{:.9e}", r.y_size, r.radius, r.rmse, r.structured_noise);
    }
    s
}
