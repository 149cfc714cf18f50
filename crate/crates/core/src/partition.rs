//! Partition selection from the pre-pass census, normalization constants and
//! chain initialization.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use log::warn;

use crate::path::{replay, PartitionBuffer, Path, Record, Signature, StreamAddress};
use crate::rng::RandomStream;
use crate::scene::Scene;

/// Default cap on guidance-image memory, in bytes.
pub const DEFAULT_MEMORY_CAP: usize = 512 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub id: usize,
    /// Member signatures. For the complementary partition these are the
    /// census signatures it absorbed; it also owns every signature never seen.
    pub signatures: BTreeSet<Signature>,
    pub complementary: bool,
    pub gamma: f64,
    /// Selection probability.
    pub p: f64,
    /// Normalization constant: mean scalar contribution per camera sample
    /// restricted to this partition, from the second halves of its buffers.
    pub b: f64,
    /// Second-half records used to start the chain.
    pub reservoir: Vec<Record>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionSet {
    /// Selected partitions followed by the complementary one.
    pub partitions: Vec<Partition>,
    /// Number of selected (singleton) partitions.
    pub k: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct SelectionConfig {
    pub k: usize,
    /// Total camera samples of the pre-pass.
    pub total_samples: u64,
    /// Pixels per guidance image; with `memory_cap` bounds `k`.
    pub pixels: usize,
    pub memory_cap: usize,
}

impl Partition {
    /// Whether a path with signature `sig` belongs here, given the set's
    /// selected signatures.
    #[inline]
    fn owns(&self, sig: Signature, selected: &BTreeSet<Signature>) -> bool {
        if self.complementary {
            !selected.contains(&sig)
        } else {
            self.signatures.contains(&sig)
        }
    }
}

impl PartitionSet {
    pub fn selected_signatures(&self) -> BTreeSet<Signature> {
        self.partitions.iter().filter(|p| !p.complementary).flat_map(|p| p.signatures.iter().copied()).collect()
    }

    pub fn complementary(&self) -> &Partition {
        self.partitions.last().expect("partition set always has a complementary member")
    }

    /// Index of the partition owning `sig`.
    pub fn locate(&self, sig: Signature) -> usize {
        self.partitions.iter().position(|p| !p.complementary && p.signatures.contains(&sig)).unwrap_or(self.k)
    }

    /// Membership test for one partition.
    pub fn contains(&self, partition: usize, sig: Signature) -> bool {
        let p = &self.partitions[partition];
        if p.complementary {
            self.partitions[..self.k].iter().all(|q| !q.signatures.contains(&sig))
        } else {
            p.signatures.contains(&sig)
        }
    }

    pub fn b_total(&self) -> f64 {
        self.partitions.iter().map(|p| p.b).sum()
    }

    /// CSV: `partition_id,signatures,gamma,p,b,reservoir_size`. The
    /// complementary partition's signature list is prefixed with `*`.
    pub fn report_csv(&self) -> String {
        let mut s = String::from("partition_id,signatures,gamma,p,b,reservoir_size\n");
        for p in &self.partitions {
            let sigs: Vec<String> = p.signatures.iter().map(|s| s.to_string()).collect();
            let marker = if p.complementary { "*" } else { "" };
            let _ = writeln!(
                s,
                "{},{}{},{:.9e},{:.9e},{:.9e},{}",
                p.id,
                marker,
                sigs.join(" "),
                // adding zero turns -0 into 0
                p.gamma + 0.0,
                p.p + 0.0,
                p.b + 0.0,
                p.reservoir.len()
            );
        }
        s
    }
}

/// Total scalar contribution of half of a buffer.
pub fn gamma(buffer: &PartitionBuffer) -> f64 {
    buffer.gamma()
}

/// Normalization constant of a set of signatures: second-half scalar sum
/// over `total_samples / 2`.
pub fn estimate_b<'a>(buffers: impl IntoIterator<Item = &'a PartitionBuffer>, total_samples: u64) -> f64 {
    let sum: f64 = buffers.into_iter().flat_map(|b| b.halves().1).map(|r| r.scalar).sum();
    sum / (total_samples as f64 / 2.0)
}

fn reservoir<'a>(buffers: impl IntoIterator<Item = &'a PartitionBuffer>) -> Vec<Record> {
    buffers.into_iter().flat_map(|b| b.halves().1.iter().copied()).collect()
}

/// Chooses the `k` signatures with largest gamma (ties by signature order)
/// as singleton partitions; the rest form the complementary partition.
/// Partitions with no second-half mass are folded into the complementary one.
pub fn select_partitions(census: &BTreeMap<Signature, PartitionBuffer>, config: &SelectionConfig) -> PartitionSet {
    let mut ranked: Vec<(Signature, f64)> =
        census.iter().map(|(s, b)| (*s, b.gamma())).filter(|(_, g)| *g > 0.0).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut k = config.k;
    if ranked.len() < k {
        warn!("only {} signatures with positive gamma; using K = {}", ranked.len(), ranked.len());
        k = ranked.len();
    }
    let per_image = config.pixels.saturating_mul(3 * std::mem::size_of::<f32>()).max(1);
    let fit = config.memory_cap / per_image;
    if fit < k {
        warn!("guidance images for K = {k} exceed the memory cap; using K = {fit}");
        k = fit;
    }

    let mut chosen: Vec<Signature> = Vec::with_capacity(k);
    for &(sig, _) in &ranked[..k] {
        if estimate_b([&census[&sig]], config.total_samples) > 0.0 {
            chosen.push(sig);
        } else {
            warn!("partition {sig} has no second-half mass; merged into the complementary partition");
        }
    }
    let k = chosen.len();
    let chosen_set: BTreeSet<Signature> = chosen.iter().copied().collect();

    let mut partitions: Vec<Partition> = chosen
        .iter()
        .enumerate()
        .map(|(id, &sig)| {
            let buf = &census[&sig];
            Partition {
                id,
                signatures: BTreeSet::from([sig]),
                complementary: false,
                gamma: buf.gamma(),
                p: 0.0,
                b: estimate_b([buf], config.total_samples),
                reservoir: reservoir([buf]),
            }
        })
        .collect();
    let rest: Vec<&PartitionBuffer> = census.values().filter(|b| !chosen_set.contains(&b.signature)).collect();
    partitions.push(Partition {
        id: k,
        signatures: rest.iter().map(|b| b.signature).collect(),
        complementary: true,
        gamma: rest.iter().map(|b| b.gamma()).sum(),
        p: 0.0,
        b: estimate_b(rest.iter().copied(), config.total_samples),
        reservoir: reservoir(rest.iter().copied()),
    });

    let total: f64 = partitions.iter().map(|p| p.gamma).sum();
    if total > 0.0 {
        for p in &mut partitions {
            p.p = p.gamma / total;
        }
    } else {
        partitions[k].p = 1.0;
    }
    debug_assert!(partitions.iter().all(|p| p.signatures.iter().all(|&s| p.owns(s, &chosen_set))));
    PartitionSet { partitions, k }
}

/// Picks a reservoir record with probability proportional to its scalar
/// contribution.
pub fn resample_record(reservoir: &[Record], stream: &mut RandomStream) -> Option<Record> {
    let total: f64 = reservoir.iter().map(|r| r.scalar).sum();
    if !(total > 0.0) {
        return None;
    }
    let target = stream.next_f64() * total;
    let mut acc = 0.0;
    for r in reservoir {
        acc += r.scalar;
        if target < acc {
            return Some(*r);
        }
    }
    reservoir.iter().rev().find(|r| r.scalar > 0.0).copied()
}

/// Resamples a starting path from the partition's reservoir, replays it from
/// its stored seed, and advances it `burn_in` times with `step`.
///
/// `seed` is the pre-pass seed the reservoir was recorded with.
pub fn init_chain(
    set: &PartitionSet,
    partition: usize,
    scene: &Scene,
    seed: u64,
    stream: &mut RandomStream,
    burn_in: usize,
    mut step: impl FnMut(&mut Path, &mut RandomStream),
) -> Option<Path> {
    let record = resample_record(&set.partitions[partition].reservoir, stream)?;
    let w = scene.camera.width;
    let pixel = (record.pixel as usize % w, record.pixel as usize / w);
    let path = replay(scene, StreamAddress { seed, stream_id: record.stream_id }, pixel, record.key)
        .expect("replay of a stored record must reproduce its path");
    assert!(set.contains(partition, path.signature), "replayed path left its partition");
    let mut path = path;
    for _ in 0..burn_in {
        step(&mut path, stream);
    }
    Some(path)
}
