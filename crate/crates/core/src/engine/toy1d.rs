//! One-dimensional demonstration of partitioned versus unpartitioned
//! Metropolis estimation on a target with a dim and a bright region.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand_distr::{Distribution, Normal};

use crate::rng::RandomStream;

#[derive(Clone, Debug, PartialEq)]
pub struct Toy1dConfig {
    pub repetitions: usize,
    /// Chain samples per repetition, shared among the partitions.
    pub samples: usize,
    pub prepass_samples: usize,
    pub proposal_sigma: f64,
    /// Partition boundary; the dim region is `[0, boundary]`.
    pub boundary: f64,
    pub quadrature_points: usize,
    pub seed: u64,
}

impl Default for Toy1dConfig {
    fn default() -> Self {
        Self {
            repetitions: 100,
            samples: 1000,
            prepass_samples: 1000,
            proposal_sigma: 0.05,
            boundary: 0.8,
            quadrature_points: 10_000_000,
            seed: 1,
        }
    }
}

/// Per-region statistics over repetitions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionEstimate {
    pub truth: f64,
    pub mean: f64,
    pub variance: f64,
}

impl RegionEstimate {
    /// Standard error of the mean over `n` repetitions.
    pub fn standard_error(&self, n: usize) -> f64 {
        (self.variance / n as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Toy1dReport {
    pub config: Toy1dConfig,
    /// Dim region `[0, boundary]`, then bright region `(boundary, 1]`.
    pub unpartitioned: [RegionEstimate; 2],
    pub partitioned: [RegionEstimate; 2],
    /// Unpartitioned over partitioned variance, per region. NaN for an empty region.
    pub variance_ratio: [f64; 2],
    /// `x, f(x), unpartitioned, partitioned` histogram densities of the last repetition.
    pub plot_csv: String,
}

impl Toy1dReport {
    pub fn summary_csv(&self) -> String {
        let mut s = String::from("region,truth,unpartitioned_mean,unpartitioned_var,partitioned_mean,partitioned_var,ratio\n");
        for (i, name) in ["low", "high"].iter().enumerate() {
            let (u, p) = (self.unpartitioned[i], self.partitioned[i]);
            let _ = writeln!(
                s,
                "{name},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.6}",
                u.truth, u.mean, u.variance, p.mean, p.variance, self.variance_ratio[i]
            );
        }
        s
    }
}

/// Target: dim ripple on `[0, 0.8]`, bright Gaussian bump on `(0.8, 1]`.
pub fn toy_target(x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        0.0
    } else if x <= 0.8 {
        0.05 + 0.03 * (6.0 * PI * x).sin()
    } else {
        8.0 * (-200.0 * (x - 0.9) * (x - 0.9)).exp() + 0.05
    }
}

/// Midpoint quadrature of the target over `[a, b]`.
pub fn quadrature(a: f64, b: f64, n: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / n as f64;
    (0..n).map(|i| toy_target(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

fn in_region(x: f64, region: usize, boundary: f64) -> bool {
    if region == 0 {
        x <= boundary
    } else {
        x > boundary
    }
}

/// Gaussian-proposal Metropolis chain on the target restricted to `keep`.
fn chain(
    stream: &mut RandomStream,
    sigma: f64,
    x0: f64,
    n: usize,
    keep: impl Fn(f64) -> bool,
) -> Vec<f64> {
    let normal = Normal::new(0.0, sigma).expect("positive sigma");
    let mut x = x0;
    let mut fx = toy_target(x);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let y = x + normal.sample(stream);
        let fy = if keep(y) { toy_target(y) } else { 0.0 };
        if stream.next_f64() * fx < fy {
            x = y;
            fx = fy;
        }
        out.push(x);
    }
    out
}

/// Stratified pre-pass: per-region normalization constants and a start point
/// in each region drawn proportionally to the target.
fn prepass(stream: &mut RandomStream, n: usize, boundary: f64) -> ([f64; 2], [Option<f64>; 2]) {
    let mut b = [0.0; 2];
    let mut pts: [Vec<(f64, f64)>; 2] = [Vec::new(), Vec::new()];
    for i in 0..n {
        let x = (i as f64 + stream.next_f64()) / n as f64;
        let fx = toy_target(x);
        let r = usize::from(!in_region(x, 0, boundary));
        b[r] += fx / n as f64;
        pts[r].push((x, fx));
    }
    let start = pts.map(|p| {
        let total: f64 = p.iter().map(|q| q.1).sum();
        if total <= 0.0 {
            return None;
        }
        let t = stream.next_f64() * total;
        let mut acc = 0.0;
        for &(x, fx) in &p {
            acc += fx;
            if t < acc {
                return Some(x);
            }
        }
        p.last().map(|q| q.0)
    });
    (b, start)
}

fn stats(values: &[f64], truth: f64) -> RegionEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    RegionEstimate { truth, mean, variance }
}

/// Runs both estimators for the configured number of repetitions.
pub fn run_toy1d(config: &Toy1dConfig) -> Toy1dReport {
    let c = config;
    let truth = [quadrature(0.0, c.boundary, c.quadrature_points), quadrature(c.boundary, 1.0, c.quadrature_points)];
    let bins = 100;
    let mut unpart = [Vec::new(), Vec::new()];
    let mut part = [Vec::new(), Vec::new()];
    let mut last_hist = (vec![0.0; bins], vec![0.0; bins]);
    for rep in 0..c.repetitions {
        let mut stream = RandomStream::new(c.seed, rep as u64);
        let (b, start) = prepass(&mut stream, c.prepass_samples, c.boundary);
        let b_all = b[0] + b[1];
        let mut chain_stream = stream.fork();

        // unpartitioned: one chain over the whole domain
        let x0 = match start {
            [Some(a), Some(z)] => if stream.next_f64() * b_all < b[0] { a } else { z },
            [a, z] => a.or(z).expect("target is positive somewhere"),
        };
        let xs = chain(&mut chain_stream.fork(), c.proposal_sigma, x0, c.samples, |y| (0.0..=1.0).contains(&y));
        let mut h_u = vec![0.0; bins];
        for r in 0..2 {
            let frac = xs.iter().filter(|&&x| in_region(x, r, c.boundary)).count() as f64 / xs.len() as f64;
            unpart[r].push(b_all * frac);
        }
        for &x in &xs {
            h_u[((x * bins as f64) as usize).min(bins - 1)] += b_all * bins as f64 / xs.len() as f64;
        }

        // partitioned: one chain per non-empty region, budget in proportion to b
        let mut h_p = vec![0.0; bins];
        let mut s = [0usize; 2];
        if b_all > 0.0 {
            s[0] = ((b[0] / b_all) * c.samples as f64).round() as usize;
            s[1] = c.samples - s[0];
        }
        for r in 0..2 {
            let Some(x0) = start[r] else {
                part[r].push(0.0);
                continue;
            };
            let n = s[r].max(1);
            let boundary = c.boundary;
            let xs = chain(&mut chain_stream.fork(), c.proposal_sigma, x0, n, |y| {
                (0.0..=1.0).contains(&y) && in_region(y, r, boundary)
            });
            part[r].push(b[r]);
            for &x in &xs {
                h_p[((x * bins as f64) as usize).min(bins - 1)] += b[r] * bins as f64 / n as f64;
            }
        }
        if rep + 1 == c.repetitions {
            last_hist = (h_u, h_p);
        }
    }
    let unpartitioned = [stats(&unpart[0], truth[0]), stats(&unpart[1], truth[1])];
    let partitioned = [stats(&part[0], truth[0]), stats(&part[1], truth[1])];
    let variance_ratio = [0, 1].map(|r| {
        if truth[r] == 0.0 {
            f64::NAN
        } else if partitioned[r].variance == 0.0 && unpartitioned[r].variance == 0.0 {
            1.0
        } else {
            unpartitioned[r].variance / partitioned[r].variance
        }
    });
    let mut plot_csv = String::from("x,f,unpartitioned,partitioned\n");
    for i in 0..bins {
        let x = (i as f64 + 0.5) / bins as f64;
        let _ = writeln!(plot_csv, "{x:.4},{:.6e},{:.6e},{:.6e}", toy_target(x), last_hist.0[i], last_hist.1[i]);
    }
    Toy1dReport { config: config.clone(), unpartitioned, partitioned, variance_ratio, plot_csv }
}
