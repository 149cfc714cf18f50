//! Metropolis integrators: baseline image-plane MLT and the partitioned,
//! guided sampler, plus plain path tracing behind the same entry point.

mod chain;
mod sweep;
mod toy1d;

pub use chain::{
    anchor_of, fstar, guided_lens_perturbation, isotropic_offset, isotropic_offset_density, large_step,
    lens_perturbation_isotropic, perturbation_target, retrace, ChainContext, ChainState, Counts, KeyDistribution,
    MutationKind, MutationOutcome, MutationStats, PERTURBATION_RADII,
};
pub use sweep::{run_sweep, sweep_csv, SweepConfig, SweepRow};
pub use toy1d::{run_toy1d, Toy1dConfig, Toy1dReport};

use std::str::FromStr;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::guidance::{build_all_guidance, DenoiseParams, GuidanceImage, OffsetSet};
use crate::image::ImageBuffer;
use crate::partition::{init_chain, select_partitions, PartitionSet, SelectionConfig, DEFAULT_MEMORY_CAP};
use crate::path::{render_pt, run_prepass, Prepass, PrepassConfig};
use crate::rng::RandomStream;
use crate::scene::Scene;
use crate::Image;

/// Chain streams start here so they never collide with pre-pass streams.
const CHAIN_STREAM_BASE: u64 = 1 << 48;
/// Minimum share of the mutation budget given to the complementary partition.
pub const COMPLEMENTARY_FLOOR: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Pt,
    Mlt,
    Partitioned,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pt" => Ok(Algorithm::Pt),
            "mlt" => Ok(Algorithm::Mlt),
            "partitioned" => Ok(Algorithm::Partitioned),
            _ => Err(Error::InvalidConfig(format!("unknown algorithm `{s}` (expected pt, mlt or partitioned)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    Sparse,
    Full,
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" => Ok(Kernel::Sparse),
            "full" => Ok(Kernel::Full),
            _ => Err(Error::InvalidConfig(format!("unknown kernel `{s}` (expected sparse or full)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderConfig {
    pub algorithm: Algorithm,
    /// Chain steps per pixel; samples per pixel for `pt`.
    pub mutations_per_pixel: usize,
    pub k: usize,
    pub y_size: usize,
    pub radius: u32,
    pub epsilon: f64,
    pub kernel: Kernel,
    pub seed: u64,
    pub prepass_ppp: usize,
    pub burn_in: usize,
    pub large_step_probability: f64,
    /// Target number of chains across all partitions.
    pub chains: usize,
    /// Minimum number of chains for any partition with a budget.
    pub min_chains: usize,
    pub memory_cap: usize,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Partitioned,
            mutations_per_pixel: 32,
            k: 10,
            y_size: crate::guidance::DEFAULT_Y_SIZE,
            radius: crate::guidance::DEFAULT_RADIUS,
            epsilon: crate::guidance::DEFAULT_EPSILON,
            kernel: Kernel::Sparse,
            seed: 1,
            prepass_ppp: 16,
            burn_in: 1024,
            large_step_probability: 0.3,
            chains: 64,
            min_chains: 64,
            memory_cap: DEFAULT_MEMORY_CAP,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.mutations_per_pixel < 1 {
            return bad("mutations per pixel must be at least 1");
        }
        if self.prepass_ppp < 2 {
            return bad("the pre-pass needs at least 2 paths per pixel");
        }
        if self.chains < 1 {
            return bad("at least one chain is required");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(0.0..=1.0).contains(&self.large_step_probability) {
            return bad("large-step probability must lie in [0, 1]");
        }
        if self.kernel == Kernel::Sparse && (self.y_size < 3 || self.y_size % 2 == 0) {
            return bad("candidate set size must be odd and at least 3");
        }
        if self.radius < 1 {
            return bad("radius must be at least 1");
        }
        Ok(())
    }

    pub fn offsets(&self) -> Result<OffsetSet> {
        match self.kernel {
            Kernel::Sparse => OffsetSet::sparse(self.y_size, self.radius, 0),
            Kernel::Full => OffsetSet::full(self.radius),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionReport {
    pub id: usize,
    pub b: f64,
    pub p: f64,
    pub chains: usize,
    pub mutations: u64,
    pub stats: MutationStats,
}

#[derive(Clone, Debug)]
pub struct RenderOutput {
    pub image: Image,
    /// Per-partition images; their sum is `image`. Empty for `pt`.
    pub partition_images: Vec<Image>,
    pub partitions: Vec<PartitionReport>,
    /// Sum of the normalization constants used.
    pub b: f64,
}

/// Pre-pass products shared by the Metropolis renderers.
pub struct Prepared {
    pub prepass: Prepass,
    pub set: PartitionSet,
}

/// Runs the pre-pass and selects `k` partitions.
pub fn prepare(scene: &Scene, config: &RenderConfig, k: usize) -> Prepared {
    let t = Instant::now();
    let prepass = run_prepass(scene, &PrepassConfig { paths_per_pixel: config.prepass_ppp, seed: config.seed });
    let set = select_partitions(
        &prepass.buffers,
        &SelectionConfig {
            k,
            total_samples: prepass.total_samples(),
            pixels: prepass.width * prepass.height,
            memory_cap: config.memory_cap,
        },
    );
    info!("pre-pass: {} signatures, K = {}, {:.2?}", prepass.buffers.len(), set.k, t.elapsed());
    Prepared { prepass, set }
}

/// Splits `total` mutations across partitions in proportion to their
/// selection probabilities, with at least `COMPLEMENTARY_FLOOR` for the
/// complementary partition. Partitions that cannot host a chain get nothing.
pub fn allocate_budget(set: &PartitionSet, total: u64) -> Vec<u64> {
    let usable: Vec<bool> = set.partitions.iter().map(|p| p.b > 0.0 && !p.reservoir.is_empty()).collect();
    let mut share: Vec<f64> =
        set.partitions.iter().zip(&usable).map(|(p, &u)| if u { p.p } else { 0.0 }).collect();
    let c = set.k;
    let others: f64 = share[..c].iter().sum();
    if usable[c] && share[c] < COMPLEMENTARY_FLOOR && others > 0.0 {
        let scale = (1.0 - COMPLEMENTARY_FLOOR) / others;
        for s in &mut share[..c] {
            *s *= scale;
        }
        share[c] = COMPLEMENTARY_FLOOR;
    }
    let sum: f64 = share.iter().sum();
    if !(sum > 0.0) {
        return vec![0; share.len()];
    }
    // largest remainder
    let exact: Vec<f64> = share.iter().map(|s| s / sum * total as f64).collect();
    let mut out: Vec<u64> = exact.iter().map(|e| e.floor() as u64).collect();
    let mut left = total - out.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..exact.len()).filter(|&i| share[i] > 0.0).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    for i in order.into_iter().cycle() {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}

struct Job {
    partition: usize,
    chain: u64,
    mutations: u64,
}

struct ChainResult {
    partition: usize,
    image: ImageBuffer<f64>,
    stats: MutationStats,
    mutations: u64,
}

fn run_chain(
    scene: &Scene,
    prepared: &Prepared,
    ctx: &ChainContext,
    config: &RenderConfig,
    job: &Job,
) -> Option<ChainResult> {
    let mut stream = RandomStream::new(config.seed, CHAIN_STREAM_BASE + job.chain);
    let start = init_chain(&prepared.set, job.partition, scene, prepared.prepass.seed, &mut stream, 0, |_, _| {})?;
    let mut state = ChainState::new(start, job.partition, stream);
    for _ in 0..config.burn_in {
        state.step(ctx);
    }
    state.stats = MutationStats::default();
    let (w, h) = (scene.camera.width, scene.camera.height);
    let mut image = ImageBuffer::<f64>::new(w, h);
    for _ in 0..job.mutations {
        state.step(ctx);
        let (x, y) = state.current.pixel();
        image.splat(x.min(w - 1), y.min(h - 1), state.current.f / state.fstar, 1.0);
    }
    Some(ChainResult { partition: job.partition, image, stats: state.stats, mutations: job.mutations })
}

/// Runs the chains of every partition of `prepared.set` with the given
/// budget and sums the scaled partition histograms.
pub fn run_chains(
    scene: &Scene,
    prepared: &Prepared,
    guidance: Option<(&[GuidanceImage], &OffsetSet)>,
    config: &RenderConfig,
) -> RenderOutput {
    let (w, h) = (scene.camera.width, scene.camera.height);
    let set = &prepared.set;
    let total = (config.mutations_per_pixel * w * h) as u64;
    let budget = allocate_budget(set, total);
    let chain_len = total.div_ceil(config.chains as u64).max(1);
    let mut jobs = Vec::new();
    let mut chain_counts = vec![0usize; budget.len()];
    for (i, &b) in budget.iter().enumerate() {
        if b == 0 {
            continue;
        }
        let n = b.div_ceil(chain_len).max(config.min_chains as u64).min(b);
        chain_counts[i] = n as usize;
        for c in 0..n {
            let m = b / n + u64::from(c < b % n);
            jobs.push(Job { partition: i, chain: jobs.len() as u64, mutations: m });
        }
    }
    let contexts: Vec<ChainContext> = (0..set.partitions.len())
        .map(|i| ChainContext {
            scene,
            set,
            partition: i,
            keys: KeyDistribution::for_partition(&set.partitions[i]),
            guidance: guidance.map(|(g, off)| (&g[i], &prepared.prepass.gbuffer, off)),
            large_step_probability: config.large_step_probability,
        })
        .collect();
    let t = Instant::now();
    let results: Vec<Option<ChainResult>> =
        jobs.par_iter().map(|j| run_chain(scene, prepared, &contexts[j.partition], config, j)).collect();
    info!("{} chains, {} mutations, {:.2?}", jobs.len(), total, t.elapsed());

    let mut partition_images = vec![ImageBuffer::<f64>::new(w, h); set.partitions.len()];
    let mut reports: Vec<PartitionReport> = set
        .partitions
        .iter()
        .map(|p| PartitionReport {
            id: p.id,
            b: p.b,
            p: p.p,
            chains: chain_counts[p.id],
            mutations: 0,
            stats: MutationStats::default(),
        })
        .collect();
    for r in results.into_iter().flatten() {
        partition_images[r.partition].merge(&r.image);
        reports[r.partition].stats.merge(&r.stats);
        reports[r.partition].mutations += r.mutations;
    }
    let mut image = ImageBuffer::<f64>::new(w, h);
    let mut b_used = 0.0;
    for (img, rep) in partition_images.iter_mut().zip(&reports) {
        if rep.mutations > 0 {
            img.scale(rep.b * (w * h) as f64 / rep.mutations as f64);
            b_used += rep.b;
        }
        image.merge(img);
        for kind in MutationKind::ALL {
            let c = rep.stats.get(kind);
            if c.proposed > 0 {
                info!(
                    "partition {}: {} acceptance {:.3} ({} proposed)",
                    rep.id,
                    kind.name(),
                    rep.stats.acceptance_rate(kind),
                    c.proposed
                );
            }
        }
    }
    RenderOutput { image, partition_images, partitions: reports, b: b_used }
}

/// Baseline MLT over all of path space: one partition, isotropic perturbations and large steps.
pub fn run_mlt(scene: &Scene, config: &RenderConfig) -> RenderOutput {
    let prepared = prepare(scene, config, 0);
    run_mlt_prepared(scene, &prepared, config)
}

pub fn run_mlt_prepared(scene: &Scene, prepared: &Prepared, config: &RenderConfig) -> RenderOutput {
    assert_eq!(prepared.set.k, 0, "baseline MLT runs on a single partition");
    if prepared.set.b_total() == 0.0 {
        warn!("the pre-pass found no light; the image is black");
    }
    run_chains(scene, prepared, None, config)
}

/// Partitioned, guided MLT.
pub fn run_partitioned(scene: &Scene, config: &RenderConfig) -> Result<RenderOutput> {
    let prepared = prepare(scene, config, config.k);
    let (output, _) = run_partitioned_prepared(scene, &prepared, config)?;
    Ok(output)
}

/// Partitioned rendering on an existing pre-pass. Also returns the guidance images.
pub fn run_partitioned_prepared(
    scene: &Scene,
    prepared: &Prepared,
    config: &RenderConfig,
) -> Result<(RenderOutput, Vec<GuidanceImage>)> {
    let offsets = config.offsets()?;
    if prepared.set.b_total() == 0.0 {
        warn!("the pre-pass found no light; the image is black");
    }
    let t = Instant::now();
    let guidance = build_all_guidance(
        &prepared.prepass,
        &prepared.set,
        scene.camera.position,
        &DenoiseParams::default(),
        config.epsilon,
    );
    info!("guidance: {} images, {:.2?}", guidance.len(), t.elapsed());
    let output = run_chains(scene, prepared, Some((&guidance, &offsets)), config);
    Ok((output, guidance))
}

/// Renders with the configured algorithm.
pub fn render(scene: &Scene, config: &RenderConfig) -> Result<RenderOutput> {
    config.validate()?;
    match config.algorithm {
        Algorithm::Pt => {
            let stats = render_pt(scene, config.mutations_per_pixel, config.seed);
            let b = stats.mean_luminance();
            Ok(RenderOutput { image: stats.image(), partition_images: Vec::new(), partitions: Vec::new(), b })
        }
        Algorithm::Mlt => Ok(run_mlt(scene, config)),
        Algorithm::Partitioned => run_partitioned(scene, config),
    }
}
