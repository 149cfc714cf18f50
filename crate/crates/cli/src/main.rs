use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use pathpart::engine::{
    prepare, render, run_partitioned_prepared, run_sweep, run_toy1d, sweep_csv, Algorithm, Kernel, RenderConfig,
    SweepConfig, Toy1dConfig,
};
use pathpart::image::{read_pfm, rmse, write_pfm, write_ppm};
use pathpart::path::render_pt;
use pathpart::scene::{builtin_description, load_scene, Scene};
use pathpart::Image;

#[derive(Parser)]
#[command(name = "pathpart", version, about = "Path-space partitioned Metropolis light transport")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scene to a PFM (or PPM) image.
    Render(RenderArgs),
    /// Print the RMSE between two PFM images.
    Compare { a: PathBuf, b: PathBuf },
    /// Grid over candidate-set size and radius; prints CSV.
    Sweep(SweepArgs),
    /// One-dimensional partitioning demonstrator.
    Toy1d(Toy1dArgs),
    /// Print the partitions selected by the pre-pass as CSV.
    PartitionReport(ReportArgs),
}

#[derive(Args, Clone)]
struct SceneArgs {
    /// Scene JSON file or `builtin:<name>`.
    #[arg(long)]
    scene: String,
    /// Resolution override for builtin scenes.
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    #[arg(long, default_value_t = 32)]
    mpp: usize,
    #[arg(long = "K", default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 129)]
    y_size: usize,
    #[arg(long, default_value_t = 24)]
    radius: u32,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "sparse")]
    kernel: Kernel,
    #[arg(long, default_value_t = 16)]
    prepass_ppp: usize,
    #[arg(long, default_value_t = 1024)]
    burn_in: usize,
    #[arg(long, default_value_t = 0.3)]
    large_step: f64,
    #[arg(long, default_value_t = 64)]
    chains: usize,
}

impl ConfigArgs {
    fn config(&self, algorithm: Algorithm) -> RenderConfig {
        RenderConfig {
            algorithm,
            mutations_per_pixel: self.mpp,
            k: self.k,
            y_size: self.y_size,
            radius: self.radius,
            epsilon: self.epsilon,
            kernel: self.kernel,
            seed: self.seed,
            prepass_ppp: self.prepass_ppp,
            burn_in: self.burn_in,
            large_step_probability: self.large_step,
            chains: self.chains,
            ..RenderConfig::default()
        }
    }
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// pt, mlt or partitioned. For pt, `--mpp` is samples per pixel.
    #[arg(long, default_value = "partitioned")]
    algo: Algorithm,
    #[command(flatten)]
    config: ConfigArgs,
    /// Output image; `.ppm` writes a clamped 8-bit image, anything else PFM.
    #[arg(long)]
    out: PathBuf,
    /// Directory for per-partition images and guidance images.
    #[arg(long)]
    dump_partitions: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, value_delimiter = ',', default_value = "9,33,65,129")]
    y_sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "8,24,44,128")]
    radii: Vec<u32>,
    /// Reference PFM; without it a path-traced reference is rendered.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, default_value_t = 4096)]
    reference_spp: usize,
    #[arg(long, default_value_t = 1)]
    seeds: usize,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Toy1dArgs {
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0.8)]
    boundary: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the histogram plot CSV here.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[arg(long = "K", default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 16)]
    prepass_ppp: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn load(args: &SceneArgs) -> Result<Scene> {
    if let Some(name) = args.scene.strip_prefix("builtin:") {
        let w = args.width.unwrap_or(128);
        let h = args.height.unwrap_or(w);
        Ok(builtin_description(name, w, h)?.build()?)
    } else {
        if args.width.is_some() || args.height.is_some() {
            bail!("--width/--height only apply to builtin scenes");
        }
        load_scene(&args.scene).with_context(|| format!("loading {}", args.scene))
    }
}

fn save(image: &Image, path: &Path) -> Result<()> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ppm")) {
        write_ppm(image, path)?;
    } else {
        write_pfm(image, path)?;
    }
    Ok(())
}

fn cmd_render(args: &RenderArgs) -> Result<()> {
    let scene = load(&args.scene)?;
    let config = args.config.config(args.algo);
    config.validate()?;
    let output = match (&args.dump_partitions, args.algo) {
        (Some(dir), Algorithm::Partitioned) => {
            let prepared = prepare(&scene, &config, config.k);
            let (output, guidance) = run_partitioned_prepared(&scene, &prepared, &config)?;
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for (i, (img, g)) in output.partition_images.iter().zip(&guidance).enumerate() {
                write_pfm(img, dir.join(format!("partition_{i:02}.pfm")))?;
                g.write_pfm(dir.join(format!("guidance_{i:02}.pfm")))?;
            }
            fs::write(dir.join("partitions.csv"), prepared.set.report_csv())?;
            output
        }
        (Some(_), _) => bail!("--dump-partitions requires --algo partitioned"),
        (None, _) => render(&scene, &config)?,
    };
    for p in &output.partitions {
        info!("partition {}: b = {:.6e}, P = {:.4}, {} chains, {} mutations", p.id, p.b, p.p, p.chains, p.mutations);
    }
    save(&output.image, &args.out)?;
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let scene = load(&args.scene)?;
    let reference = match &args.reference {
        Some(path) => read_pfm::<f64>(path)?,
        None => render_pt(&scene, args.reference_spp, args.config.seed ^ 0x5eed).image(),
    };
    let config = SweepConfig {
        y_sizes: args.y_sizes.clone(),
        radii: args.radii.clone(),
        seeds: args.seeds,
        base: args.config.config(Algorithm::Partitioned),
        ..SweepConfig::default()
    };
    let csv = sweep_csv(&run_sweep(&scene, &config, &reference)?);
    match &args.out {
        Some(path) => fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_toy1d(args: &Toy1dArgs) -> Result<()> {
    if args.reps < 2 || args.samples < 2 {
        bail!("toy1d needs at least 2 repetitions and 2 samples");
    }
    if !(0.0..=1.0).contains(&args.boundary) {
        bail!("the boundary must lie in [0, 1]");
    }
    let report = run_toy1d(&Toy1dConfig {
        repetitions: args.reps,
        samples: args.samples,
        boundary: args.boundary,
        seed: args.seed,
        ..Toy1dConfig::default()
    });
    if let Some(path) = &args.plot {
        fs::write(path, &report.plot_csv).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{}", report.summary_csv());
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let scene = load(&args.scene)?;
    let config = RenderConfig { k: args.k, prepass_ppp: args.prepass_ppp, seed: args.seed, ..RenderConfig::default() };
    config.validate()?;
    print!("{}", prepare(&scene, &config, config.k).set.report_csv());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Render(a) => cmd_render(a),
        Command::Compare { a, b } => (|| {
            let (a, b) = (read_pfm::<f64>(a)?, read_pfm::<f64>(b)?);
            println!("{:.9e}", rmse(&a, &b)?);
            Ok(())
        })(),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Toy1d(a) => cmd_toy1d(a),
        Command::PartitionReport(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
