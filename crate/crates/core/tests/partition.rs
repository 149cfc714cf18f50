use std::collections::BTreeMap;

use pathpart::partition::{
    estimate_b, gamma, init_chain, resample_record, select_partitions, SelectionConfig, DEFAULT_MEMORY_CAP,
};
use pathpart::path::{run_prepass, PartitionBuffer, PathKey, PrepassConfig, Record, Signature, Technique};
use pathpart::scene::builtin_description;
use pathpart::{RandomStream, Rgb};

fn record(scalar: f64) -> Record {
    Record {
        c: Rgb::splat(scalar),
        scalar,
        pixel: 0,
        stream_id: 0,
        key: PathKey { segments: 2, technique: Technique::Bsdf },
    }
}

fn buffer(sig: &str, scalars: &[f64]) -> PartitionBuffer {
    PartitionBuffer { signature: sig.parse().unwrap(), records: scalars.iter().map(|&s| record(s)).collect() }
}

fn census(list: &[(&str, &[f64])]) -> BTreeMap<Signature, PartitionBuffer> {
    list.iter().map(|(s, v)| (s.parse().unwrap(), buffer(s, v))).collect()
}

fn config(k: usize, total_samples: u64) -> SelectionConfig {
    SelectionConfig { k, total_samples, pixels: 64 * 64, memory_cap: DEFAULT_MEMORY_CAP }
}

#[test]
fn gamma_uses_the_first_half() {
    assert_eq!(gamma(&buffer("EDL", &[1.0, 2.0, 3.0, 4.0])), 3.0);
    assert_eq!(gamma(&buffer("EDL", &[5.0])), 0.0);
    assert_eq!(gamma(&buffer("EDL", &[1.0, 2.0, 3.0])), 1.0);
}

#[test]
fn single_record_buffer_is_not_selected() {
    let c = census(&[("EDL", &[5.0]), ("EDDL", &[1.0, 1.0])]);
    let set = select_partitions(&c, &config(2, 4));
    assert_eq!(set.k, 1);
    assert!(set.partitions[0].signatures.contains(&"EDDL".parse().unwrap()));
    assert!(set.complementary().signatures.contains(&"EDL".parse().unwrap()));
}

#[test]
fn selection_example() {
    // gammas 6, 3, 1 with positive second halves
    let c = census(&[("EDL", &[6.0, 1.0]), ("EDDL", &[3.0, 1.0]), ("ESDL", &[1.0, 1.0])]);
    let set = select_partitions(&c, &config(2, 8));
    assert_eq!(set.k, 2);
    let names: Vec<String> = set.partitions.iter().map(|p| p.signatures.iter().next().unwrap().to_string()).collect();
    assert_eq!(names, ["EDL", "EDDL", "ESDL"]);
    let p: Vec<f64> = set.partitions.iter().map(|p| p.p).collect();
    assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.3).abs() < 1e-15 && (p[2] - 0.1).abs() < 1e-15);
    assert!(set.complementary().complementary);
}

#[test]
fn oversized_k_gives_every_signature_its_own_partition() {
    let c = census(&[("EDL", &[2.0, 1.0]), ("EDDL", &[1.0, 1.0])]);
    let set = select_partitions(&c, &config(10, 4));
    assert_eq!(set.k, 2);
    assert!(set.complementary().signatures.is_empty());
    assert_eq!(set.complementary().p, 0.0);
    let s: f64 = set.partitions.iter().map(|p| p.p).sum();
    assert!((s - 1.0).abs() < 1e-15);
}

#[test]
fn ties_break_by_signature_order_and_selection_is_deterministic() {
    let c = census(&[("EDL", &[1.0, 1.0]), ("EDDL", &[1.0, 1.0]), ("ESL", &[1.0, 1.0])]);
    let a = select_partitions(&c, &config(2, 6));
    let b = select_partitions(&c, &config(2, 6));
    assert_eq!(a, b);
    let names: Vec<String> = a.partitions[..2].iter().map(|p| p.signatures.iter().next().unwrap().to_string()).collect();
    assert_eq!(names, ["EDDL", "EDL"]);
}

#[test]
fn b_examples() {
    let buf = buffer("EDL", &[9.0, 9.0, 2.0, 4.0]);
    assert_eq!(estimate_b([&buf], 8), 1.5);
    // zero second-half mass drops the partition into the complement
    let c = census(&[("EDL", &[5.0, 5.0, 0.0, 0.0]), ("EDDL", &[1.0, 1.0])]);
    let set = select_partitions(&c, &config(2, 4));
    assert_eq!(set.k, 1);
    assert!(set.complementary().signatures.contains(&"EDL".parse().unwrap()));
}

#[test]
fn memory_cap_limits_k() {
    let c = census(&[("EDL", &[2.0, 1.0]), ("EDDL", &[1.0, 1.0]), ("ESL", &[1.0, 1.0])]);
    let cfg = SelectionConfig { k: 3, total_samples: 4, pixels: 100, memory_cap: 2 * 100 * 12 };
    assert_eq!(select_partitions(&c, &cfg).k, 2);
}

#[test]
fn caustic_census_selection() {
    let scene = builtin_description("cornell-caustic", 48, 48).unwrap().build().unwrap();
    let pre = run_prepass(&scene, &PrepassConfig { paths_per_pixel: 8, seed: 2 });
    let caustic: Signature = "EDSSL".parse().unwrap();
    assert!(pre.buffers[&caustic].gamma() > 0.0);
    let set = select_partitions(&pre.buffers, &config(10, pre.total_samples()));
    assert_eq!(set.k, 10);
    assert!(!set.complementary().signatures.is_empty());
    let s: f64 = set.partitions.iter().map(|p| p.p).sum();
    assert!((s - 1.0).abs() < 1e-12);
    // regrouped normalization is additive
    let all = estimate_b(pre.buffers.values(), pre.total_samples());
    assert!((set.b_total() - all).abs() <= 1e-12 * all);
    // every census signature belongs to exactly one partition
    for sig in pre.buffers.keys() {
        let owners = (0..set.partitions.len()).filter(|&i| set.contains(i, *sig)).count();
        assert_eq!(owners, 1);
    }
    // swapping halves changes the selection only through randomness
    let mut swapped = pre.buffers.clone();
    for b in swapped.values_mut() {
        b.records.reverse();
    }
    let set2 = select_partitions(&swapped, &config(10, pre.total_samples()));
    let all2 = estimate_b(swapped.values(), pre.total_samples());
    assert!((set2.b_total() - all2).abs() <= 1e-12 * all2);
}

#[test]
fn resampling_frequencies() {
    let mut s = RandomStream::new(1, 2);
    let one = [record(2.5)];
    for _ in 0..100 {
        assert_eq!(resample_record(&one, &mut s), Some(one[0]));
    }
    let two = [record(1.0), record(3.0)];
    let n = 100_000;
    let hits = (0..n).filter(|_| resample_record(&two, &mut s).unwrap().scalar == 3.0).count() as f64;
    let sigma = (n as f64 * 0.75 * 0.25).sqrt();
    assert!((hits - 0.75 * n as f64).abs() < 3.0 * sigma, "{hits}");
    assert_eq!(resample_record(&[], &mut s), None);
}

#[test]
fn zero_burn_in_returns_the_replayed_path() {
    let scene = builtin_description("cornell-basic", 16, 16).unwrap().build().unwrap();
    let pre = run_prepass(&scene, &PrepassConfig { paths_per_pixel: 4, seed: 6 });
    let set = select_partitions(&pre.buffers, &config(3, pre.total_samples()));
    for i in 0..set.partitions.len() {
        let mut s = RandomStream::new(3, i as u64);
        let mut steps = 0;
        let p = init_chain(&set, i, &scene, 6, &mut s, 0, |_, _| steps += 1).unwrap();
        assert_eq!(steps, 0);
        assert!(set.contains(i, p.signature));
        assert!(p.f.luminance() > 0.0);
        let mut s2 = RandomStream::new(3, i as u64);
        let r = resample_record(&set.partitions[i].reservoir, &mut s2).unwrap();
        assert_eq!(p.contribution().luminance(), r.scalar);
    }
}
