//! Simple random walk exits onto the hyperplane `ℤ^{d−1} × {0}` and Poisson kernels.
//!
//! A walk is never simulated step by step. The vertical coordinate is a lazy
//! 1-d walk, so the number of vertical moves until height 0 is a sum of `z`
//! first-passage times, each drawn by inverting its exact tail
//! `P(T > 2n) = C(2n,n)/4ⁿ`. Given `V` vertical moves the number of horizontal
//! moves is negative binomial, and the horizontal displacement is a sum of
//! binomials. The result has the law of `S_T` at a cost independent of `T`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use ndarray::{ArrayD, Dimension, IxDyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::halfspace::{periodized_poisson_kernel, Layer};
use crate::lattice::{periodic_shape, wrap};

/// Resamples allowed per walk before giving up.
pub const MAX_CAP_HITS: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkConfig {
    pub d: usize,
    /// Start height.
    pub z: u64,
    pub seed: u64,
    /// Walks longer than this many steps are resampled.
    pub max_steps: u64,
}

impl WalkConfig {
    pub const DEFAULT_CAP: u64 = 10_000_000_000_000;

    pub fn new(d: usize, z: u64, seed: u64) -> Result<Self> {
        let cfg = WalkConfig {
            d,
            z,
            seed,
            max_steps: Self::DEFAULT_CAP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.d < 2 || self.z < 1 || self.max_steps < 1 {
            return Err(Error::InvalidArgument(format!(
                "invalid walk configuration d={}, z={}, cap={}",
                self.d, self.z, self.max_steps
            )));
        }
        Ok(())
    }

    /// Generator for walk number `index`: one ChaCha stream per walk.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

const TABLE_LEN: usize = 4096;

/// `u(n) = C(2n,n)/4ⁿ`, the probability that a 1-d walk stays ≥ 0 for 2n steps.
struct FirstPassage {
    table: Vec<f64>,
}

impl FirstPassage {
    fn get() -> &'static FirstPassage {
        static FP: OnceLock<FirstPassage> = OnceLock::new();
        FP.get_or_init(|| {
            let mut table = Vec::with_capacity(TABLE_LEN + 1);
            table.push(1.0);
            for n in 1..=TABLE_LEN {
                let prev = table[n - 1];
                table.push(prev * (2 * n - 1) as f64 / (2 * n) as f64);
            }
            FirstPassage { table }
        })
    }

    fn u(&self, n: u64) -> f64 {
        if (n as usize) <= TABLE_LEN {
            return self.table[n as usize];
        }
        let x = n as f64;
        let series = 1.0 - 1.0 / (8.0 * x) + 1.0 / (128.0 * x * x) + 5.0 / (1024.0 * x.powi(3))
            - 21.0 / (32768.0 * x.powi(4));
        series / (PI * x).sqrt()
    }

    /// First time a walk from 1 reaches 0, or `None` if it exceeds `cap`.
    fn sample(&self, rng: &mut impl Rng, cap: u64) -> Option<u64> {
        let target: f64 = rng.random();
        // T = 2n*+1 with n* = max{n : u(n) > U}.
        let max_n = cap / 2 + 1;
        if self.u(max_n) > target {
            return None;
        }
        let (mut lo, mut hi) = (0u64, max_n);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.u(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 2 * lo + 1;
        (t <= cap).then_some(t)
    }
}

/// Horizontal displacement after `h` horizontal moves spread over `dim` axes.
fn horizontal_displacement(rng: &mut impl Rng, h: u64, dim: usize) -> Vec<i64> {
    let mut left = h;
    let mut out = Vec::with_capacity(dim);
    for axis in 0..dim {
        let remaining_axes = (dim - axis) as f64;
        let k = if axis + 1 == dim || left == 0 {
            left
        } else {
            Binomial::new(left, 1.0 / remaining_axes)
                .expect("valid binomial")
                .sample(rng)
        };
        left -= k;
        let plus = if k == 0 {
            0
        } else {
            Binomial::new(k, 0.5).expect("valid binomial").sample(rng)
        };
        out.push(2 * plus as i64 - k as i64);
    }
    out
}

fn try_walk(cfg: &WalkConfig, rng: &mut impl Rng) -> Option<Vec<i64>> {
    let fp = FirstPassage::get();
    let mut vertical = 0u64;
    for _ in 0..cfg.z {
        vertical += fp.sample(rng, cfg.max_steps - vertical)?;
        if vertical > cfg.max_steps {
            return None;
        }
    }
    // Horizontal moves before the last vertical one: NegBin(V, 1/d) = Poisson(Gamma(V, d−1)).
    let rate = Gamma::new(vertical as f64, (cfg.d - 1) as f64)
        .expect("positive gamma parameters")
        .sample(rng);
    let horizontal = if rate > 0.0 {
        Poisson::new(rate).expect("positive rate").sample(rng) as u64
    } else {
        0
    };
    if horizontal > cfg.max_steps - vertical {
        return None;
    }
    Some(horizontal_displacement(rng, horizontal, cfg.d - 1))
}

/// Horizontal exit offset of walk number `index` started at `(0, z)`.
pub fn sample_exit(cfg: &WalkConfig, index: u64) -> Result<Vec<i64>> {
    cfg.validate()?;
    let mut rng = cfg.rng(index);
    for attempt in 0..=MAX_CAP_HITS {
        if let Some(x) = try_walk(cfg, &mut rng) {
            return Ok(x);
        }
        log::warn!(
            "walk {index} exceeded {} steps (attempt {}), resampling",
            cfg.max_steps,
            attempt + 1
        );
    }
    Err(Error::CapExhausted {
        cap: cfg.max_steps,
        attempts: MAX_CAP_HITS,
    })
}

/// Exit offsets of walks `0..n`, in index order.
pub fn sample_exits(cfg: &WalkConfig, n: u64) -> Result<Vec<Vec<i64>>> {
    (0..n)
        .into_par_iter()
        .map(|i| sample_exit(cfg, i))
        .collect()
}

/// Monte-Carlo exit frequencies on the window `|x|_∞ ≤ W`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelEstimate {
    pub window: usize,
    /// Counts on `{−W,…,W}^{d−1}`, index `x + W`.
    pub counts: ArrayD<u64>,
    pub outside: u64,
    pub samples: u64,
}

impl KernelEstimate {
    pub fn from_exits(exits: &[Vec<i64>], dim: usize, window: usize) -> Self {
        let mut counts = ArrayD::zeros(IxDyn(&vec![2 * window + 1; dim]));
        let mut outside = 0;
        let w = window as i64;
        for x in exits {
            if x.iter().all(|c| c.abs() <= w) {
                let idx: Vec<usize> = x.iter().map(|&c| (c + w) as usize).collect();
                counts[IxDyn(&idx)] += 1;
            } else {
                outside += 1;
            }
        }
        KernelEstimate {
            window,
            counts,
            outside,
            samples: exits.len() as u64,
        }
    }

    fn count(&self, offset: &[i64]) -> u64 {
        let w = self.window as i64;
        if offset.iter().any(|c| c.abs() > w) {
            return 0;
        }
        let idx: Vec<usize> = offset.iter().map(|&c| (c + w) as usize).collect();
        self.counts[IxDyn(&idx)]
    }

    pub fn probability(&self, offset: &[i64]) -> f64 {
        self.count(offset) as f64 / self.samples as f64
    }

    /// `√(p̂(1−p̂)/n)`.
    pub fn std_error(&self, offset: &[i64]) -> f64 {
        let p = self.probability(offset);
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    pub fn outside_mass(&self) -> f64 {
        self.outside as f64 / self.samples as f64
    }

    pub fn recorded_mass(&self) -> f64 {
        self.counts.sum() as f64 / self.samples as f64
    }

    /// Sum of standard errors over the window.
    pub fn std_error_aggregate(&self) -> f64 {
        self.counts
            .iter()
            .map(|&c| {
                let p = c as f64 / self.samples as f64;
                (p * (1.0 - p) / self.samples as f64).sqrt()
            })
            .sum()
    }
}

pub fn poisson_kernel_mc(cfg: &WalkConfig, n_samples: u64, window: usize) -> Result<KernelEstimate> {
    if n_samples < 1 {
        return Err(Error::InvalidArgument("need at least one walk".into()));
    }
    let exits = sample_exits(cfg, n_samples)?;
    Ok(KernelEstimate::from_exits(&exits, cfg.d - 1, window))
}

/// Exit frequencies folded onto the period `2L`, stored like a layer.
pub fn periodized_frequencies(exits: &[Vec<i64>], dim: usize, l: usize) -> Layer {
    let mut out = ArrayD::zeros(IxDyn(&periodic_shape(dim, l)));
    for x in exits {
        let idx: Vec<usize> = x.iter().map(|&c| wrap(c, l)).collect();
        out[IxDyn(&idx)] += 1.0;
    }
    let n = exits.len().max(1) as f64;
    out.mapv_inplace(|c: f64| c / n);
    out
}

/// `½ Σ |a − b|`.
pub fn total_variation_distance(a: &Layer, b: &Layer) -> f64 {
    0.5 * a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Surface area of the unit sphere in ℝ^d.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / statrs::function::gamma::gamma(d as f64 / 2.0)
}

/// Leading continuum kernel `2z / (ω_d (|x|² + z²)^{d/2})`, with `d = x.len() + 1`.
pub fn continuum_kernel(x: &[f64], z: f64) -> f64 {
    let d = x.len() + 1;
    let r2: f64 = x.iter().map(|c| c * c).sum::<f64>() + z * z;
    2.0 * z / (sphere_area(d) * r2.powf(d as f64 / 2.0))
}

/// `z Σ_x |P_z(x) − P_z(x − e₁)|` for the periodized kernel.
pub fn kernel_variation_constant(z: usize, d: usize, l: usize) -> Result<f64> {
    let p = periodized_poisson_kernel(z, d, l)?;
    let m = 2 * l;
    let mut s = 0.0;
    for (idx, v) in p.indexed_iter() {
        let mut prev = idx.slice().to_vec();
        prev[0] = (prev[0] + m - 1) % m;
        s += (v - p[IxDyn(&prev)]).abs();
    }
    Ok(z as f64 * s)
}

/// Mean and standard error of `bottom(x + S_T)` over `n` walks from height `cfg.z`.
pub fn exit_average(bottom: &Layer, x: &[i64], cfg: &WalkConfig, n: u64) -> Result<(f64, f64)> {
    let l = bottom.shape()[0] / 2;
    let exits = sample_exits(cfg, n)?;
    let vals: Vec<f64> = exits
        .iter()
        .map(|o| {
            let idx: Vec<usize> = o.iter().zip(x).map(|(a, b)| wrap(a + b, l)).collect();
            bottom[IxDyn(&idx)]
        })
        .collect();
    let nf = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / nf;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
    Ok((mean, (var / nf).sqrt()))
}
