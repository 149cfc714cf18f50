//! Acceptance suite. Runs every criterion and prints one PASS/FAIL line each;
//! exits non-zero if any fails. Pass a criterion number to run only that one.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use pathpart::engine::{
    prepare, run_chains, run_mlt_prepared, run_partitioned_prepared, run_sweep, run_toy1d, sweep_csv, Algorithm,
    RenderConfig, SweepConfig, Toy1dConfig,
};
use pathpart::guidance::{build_all_guidance, candidate_weights, sample_candidate, Anchor, DenoiseParams, GuidanceImage, OffsetSet};
use pathpart::image::{encode_pfm, mean_color, read_pfm, rmse, write_pfm};
use pathpart::path::{path_contribution, prefix_contribution, render_pt, suffix_contribution, trace_path, GBuffer, PrimarySample};
use pathpart::scene::{builtin_description, lit_plane, Scene};
use pathpart::{color, Image, RandomStream, Vec3};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn scene(name: &str, n: usize) -> Scene {
    builtin_description(name, n, n).unwrap().build().unwrap()
}

fn offset_symmetry() -> Outcome {
    for size in [9, 33, 129] {
        for radius in [8, 24, 44] {
            let set = OffsetSet::sparse(size, radius, 0).unwrap();
            if set.len() != size || set.offsets()[size / 2] != (0, 0) {
                return outcome(false, format!("|Y'|={size} R={radius}: bad layout"));
            }
            for &(dx, dy) in set.offsets() {
                if set.multiplicity((dx, dy)) != set.multiplicity((-dx, -dy)) {
                    return outcome(false, format!("|Y'|={size} R={radius}: ({dx},{dy}) unmatched"));
                }
                if (dx * dx + dy * dy) as f64 > (radius * radius) as f64 {
                    return outcome(false, format!("|Y'|={size} R={radius}: ({dx},{dy}) outside radius"));
                }
            }
        }
    }
    outcome(true, "9 offset sets symmetric with equal multiplicity")
}

fn prefix_suffix_identity() -> Outcome {
    let scene = scene("cornell-caustic", 128);
    let mut pick = RandomStream::new(2024, 0);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    let mut stream_id = 0;
    while n < 1000 {
        let pixel = (pick.next_index(128), pick.next_index(128));
        let mut stream = RandomStream::new(7, stream_id);
        stream_id += 1;
        for p in trace_path(&scene, pixel, &mut stream) {
            if n == 1000 || p.vertices.len() < 3 {
                continue;
            }
            let s = 1 + pick.next_index(p.vertices.len() - 2);
            let f = path_contribution(&scene, &p.vertices);
            let sa = prefix_contribution(&scene, &p.vertices, s) * suffix_contribution(&scene, &p.vertices, s);
            for (a, b) in sa.channels().iter().zip(f.channels()) {
                if b != 0.0 {
                    worst = worst.max((a - b).abs() / b.abs());
                } else if *a != 0.0 {
                    worst = f64::INFINITY;
                }
            }
            n += 1;
        }
    }
    outcome(worst <= 1e-10, format!("1000 paths, worst relative error {worst:.2e}"))
}

fn estimator_consistency() -> Outcome {
    let scene = scene("cornell-basic", 64);
    let pt = render_pt(&scene, 4096, 31);
    let (m_pt, s_pt) = (pt.mean_luminance(), pt.mean_luminance_sigma());

    let mlt_cfg = RenderConfig { algorithm: Algorithm::Mlt, mutations_per_pixel: 64, seed: 32, ..Default::default() };
    let prepared = prepare(&scene, &mlt_cfg, 0);
    let mlt = run_mlt_prepared(&scene, &prepared, &mlt_cfg);
    let m_mlt = mean_color(&mlt.image).luminance();
    // the normalization uses half of the pre-pass samples
    let s_mlt = 2f64.sqrt() * prepared.prepass.stats.mean_luminance_sigma();

    let part_cfg = RenderConfig { mutations_per_pixel: 64, seed: 33, ..Default::default() };
    let prepared = prepare(&scene, &part_cfg, part_cfg.k);
    let (part, _) = run_partitioned_prepared(&scene, &prepared, &part_cfg).unwrap();
    let m_part = mean_color(&part.image).luminance();
    let s_part = 2f64.sqrt() * prepared.prepass.stats.mean_luminance_sigma();

    let z = |a: f64, sa: f64, b: f64, sb: f64| (a - b).abs() / (sa * sa + sb * sb).sqrt();
    let zs = [z(m_pt, s_pt, m_mlt, s_mlt), z(m_pt, s_pt, m_part, s_part), z(m_mlt, s_mlt, m_part, s_part)];
    outcome(
        zs.iter().all(|&v| v < 3.0),
        format!(
            "means pt {m_pt:.5} mlt {m_mlt:.5} partitioned {m_part:.5}; z = {:.2}, {:.2}, {:.2}",
            zs[0], zs[1], zs[2]
        ),
    )
}

fn histogram_fidelity() -> Outcome {
    let scene = lit_plane(16, 16).build().unwrap();
    let cfg = RenderConfig { prepass_ppp: 16, ..Default::default() };
    let prepared = prepare(&scene, &cfg, 1);
    if prepared.set.partitions[0].signatures.len() != 1 || prepared.set.complementary().b != 0.0 {
        return outcome(false, "scene is not single-partition");
    }
    let guidance =
        build_all_guidance(&prepared.prepass, &prepared.set, scene.camera.position, &DenoiseParams::default(), 1e-3);
    let offsets = cfg.offsets().unwrap();
    let counts = common::visit_histogram(
        &scene,
        &prepared.set,
        prepared.prepass.seed,
        0,
        Some((&guidance[0], &prepared.prepass.gbuffer, &offsets)),
        0.3,
        1_000_000,
        10,
        17,
    );
    let expected = common::lit_plane_mass(&scene);
    let p = common::chi_square_p(&counts, &expected);
    outcome(p > 0.01, format!("10^6 mutations, every 10th visit binned, chi-square p = {p:.4}"))
}

fn normalization_additivity() -> Outcome {
    let scene = scene("cornell-caustic", 64);
    let cfg = RenderConfig { prepass_ppp: 8, ..Default::default() };
    let split = prepare(&scene, &cfg, 10);
    let whole = pathpart::partition::select_partitions(
        &split.prepass.buffers,
        &pathpart::partition::SelectionConfig {
            k: 0,
            total_samples: split.prepass.total_samples(),
            pixels: 64 * 64,
            memory_cap: cfg.memory_cap,
        },
    );
    let (a, b) = (split.set.b_total(), whole.b_total());
    let rel = (a - b).abs() / b;
    outcome(rel <= 1e-12, format!("K = {}: sum b_i = {a:.12e}, b = {b:.12e}, relative {rel:.1e}", split.set.k))
}

fn toy_demonstrator() -> Outcome {
    let cfg = Toy1dConfig::default();
    let r = run_toy1d(&cfg);
    let n = cfg.repetitions;
    let mut ok = true;
    let mut zs = Vec::new();
    for est in [&r.unpartitioned, &r.partitioned] {
        for e in est.iter() {
            let se = e.standard_error(n);
            let z = if se > 0.0 { (e.mean - e.truth).abs() / se } else if e.mean == e.truth { 0.0 } else { f64::INFINITY };
            zs.push(z);
            ok &= z < 3.0;
        }
    }
    ok &= r.variance_ratio[0] >= 10.0;
    outcome(
        ok,
        format!(
            "z = [{:.2}, {:.2}, {:.2}, {:.2}], low-region variance ratio {:.1}",
            zs[0], zs[1], zs[2], zs[3], r.variance_ratio[0]
        ),
    )
}

const REFERENCE_SPP: usize = 16384;

/// 16k-spp path-traced reference of cornell-caustic at 128x128, cached as PFM
/// in the cargo scratch directory.
fn caustic_reference() -> &'static Image {
    static REFERENCE: OnceLock<Image> = OnceLock::new();
    REFERENCE.get_or_init(|| {
        let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("cornell-caustic-128-{REFERENCE_SPP}spp.pfm"));
        if let Ok(img) = read_pfm::<f64>(&path) {
            return img;
        }
        let img = render_pt(&scene("cornell-caustic", 128), REFERENCE_SPP, 4242).image();
        write_pfm(&img, &path).expect("write reference");
        read_pfm(&path).expect("read back reference")
    })
}

fn direction_of_improvement() -> Outcome {
    let scene = scene("cornell-caustic", 128);
    let reference = caustic_reference();
    let (mut e_mlt, mut e_part) = (0.0, 0.0);
    let seeds = 10;
    for seed in 0..seeds {
        let base = RenderConfig { seed: 500 + seed, ..Default::default() };
        let prepared = prepare(&scene, &base, 0);
        let mlt = run_mlt_prepared(&scene, &prepared, &RenderConfig { algorithm: Algorithm::Mlt, ..base.clone() });
        e_mlt += rmse(&mlt.image, reference).unwrap() / seeds as f64;
        let prepared = prepare(&scene, &base, base.k);
        let (part, _) = run_partitioned_prepared(&scene, &prepared, &base).unwrap();
        e_part += rmse(&part.image, reference).unwrap() / seeds as f64;
    }
    outcome(
        e_part < e_mlt,
        format!("mean RMSE over {seeds} seeds at 32 mpp: partitioned {e_part:.5}, MLT {e_mlt:.5}"),
    )
}

fn ablation_harness() -> Outcome {
    let scene = scene("cornell-caustic", 128);
    let reference = caustic_reference();
    let cfg = SweepConfig { seeds: 2, base: RenderConfig { seed: 77, ..Default::default() }, ..Default::default() };
    let rows = run_sweep(&scene, &cfg, reference).unwrap();
    let csv = sweep_csv(&rows);
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("sweep.csv");
    std::fs::write(&path, &csv).unwrap();
    let get = |y: usize, r: u32| rows.iter().find(|row| row.y_size == y && row.radius == r).unwrap().structured_noise;
    let (sparse_wide, dense) = (get(9, 128), get(129, 24));
    let shape_ok = rows.len() == 16 && csv.lines().count() == 17;
    outcome(
        shape_ok && sparse_wide > dense,
        format!("4x4 grid written to {}; structured noise (9, 128) {sparse_wide:.4e} vs (129, 24) {dense:.4e}", path.display()),
    )
}

fn determinism() -> Outcome {
    let scene = scene("cornell-caustic", 64);
    let cfg = RenderConfig { mutations_per_pixel: 16, seed: 9, ..Default::default() };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
    let run = || {
        let prepared = prepare(&scene, &cfg, cfg.k);
        let (out, _) = run_partitioned_prepared(&scene, &prepared, &cfg).unwrap();
        encode_pfm(&out.image).unwrap()
    };
    let a = pool.install(run);
    let b = pool.install(run);
    let prepared = prepare(&scene, &cfg, 0);
    let mlt_cfg = RenderConfig { algorithm: Algorithm::Mlt, ..cfg.clone() };
    let c = encode_pfm(&pool.install(|| run_mlt_prepared(&scene, &prepared, &mlt_cfg)).image).unwrap();
    let d = encode_pfm(&pool.install(|| run_chains(&scene, &prepared, None, &mlt_cfg)).image).unwrap();
    outcome(a == b && c == d, format!("partitioned PFM {} bytes identical: {}; MLT identical: {}", a.len(), a == b, c == d))
}

fn reversibility() -> Outcome {
    let mut s = RandomStream::new(10_000, 0);
    let mut forward_moves = 0;
    for case in 0..10_000u64 {
        let (w, h) = (4 + s.next_index(36), 4 + s.next_index(36));
        let samples: Vec<Option<PrimarySample>> = (0..w * h)
            .map(|_| {
                (s.next_f64() > 0.1).then(|| {
                    let a = if s.next_f64() < 0.2 { 0.0 } else { s.next_f64() };
                    let n = Vec3::new(s.next_f64() - 0.5, s.next_f64() - 0.5, s.next_f64() - 0.5).normalize();
                    PrimarySample {
                        position: Vec3::new(s.next_f64(), s.next_f64(), -1.0 - s.next_f64()),
                        normal: n,
                        albedo: color::Rgb::splat(a),
                        camera_term: s.next_f64(),
                        depth: 1,
                    }
                })
            })
            .collect();
        let gb = GBuffer { width: w, height: h, samples };
        let d = (0..w * h)
            .map(|_| if s.next_f64() < 0.4 { color::Rgb::black() } else { color::Rgb::splat(s.next_f64() as f32) })
            .collect();
        let g = GuidanceImage { partition: 0, d: pathpart::image::ImageBuffer::from_pixels(w, h, d), epsilon: 1e-3 };
        let offsets = OffsetSet::sparse(2 * (1 + s.next_index(64)) + 1, 1 + s.next_index(47) as u32, case).unwrap();
        let anchor = match s.next_index(3) {
            0 => Anchor::Point {
                position: Vec3::new(s.next_f64(), 2.0, -1.0),
                normal: Vec3::new(0.0, -1.0, 0.0),
                two_sided: s.next_f64() < 0.5,
            },
            1 => Anchor::Direction(Vec3::new(s.next_f64() - 0.5, 1.0, s.next_f64() - 0.5).normalize()),
            _ => Anchor::None,
        };
        let center = (s.next_index(w) as i64, s.next_index(h) as i64);
        let fwd = candidate_weights(center, &offsets, &g, &gb, &anchor);
        let Some((i, pixel, prob)) = sample_candidate(&fwd, &mut s) else {
            return outcome(false, format!("case {case}: empty candidate set at an in-bounds center"));
        };
        if prob > 0.0 {
            forward_moves += 1;
            let rev = candidate_weights((pixel.0 as i64, pixel.1 as i64), &offsets, &g, &gb, &anchor);
            let back = offsets.len() - 1 - i;
            if rev.candidates[back].pixel != Some((center.0 as usize, center.1 as usize)) || !(rev.weight(back) / rev.total > 0.0) {
                return outcome(false, format!("case {case}: reverse move has zero probability"));
            }
        }
    }
    outcome(forward_moves == 10_000, format!("{forward_moves} random configurations, every reverse move possible"))
}

fn main() {
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("offset symmetry", offset_symmetry),
        ("prefix x suffix identity", prefix_suffix_identity),
        ("estimator consistency", estimator_consistency),
        ("histogram fidelity", histogram_fidelity),
        ("normalization additivity", normalization_additivity),
        ("1D demonstrator", toy_demonstrator),
        ("direction of improvement", direction_of_improvement),
        ("ablation harness", ablation_harness),
        ("determinism", determinism),
        ("reversibility guard", reversibility),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| outcome(false, format!("panicked: {}", e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())));
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        if !result.pass {
            failed += 1;
        }
        println!("criterion {n:>2} {verdict} {name}: {} [{:.1?}]", result.detail, t.elapsed());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
