//! Experiment sweeps and reports behind the `harmonic-lab` binary.
//!
//! Every report is a pure function of its spec: cells draw their data from a
//! seed derived by hashing `(kind, seed, d, N, sample)`, run on the rayon pool,
//! and are sorted by cell key before anything is written.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use ndarray::IxDyn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::boxes::{
    dirichlet_extension, gradient_comparison, neumann_extension, DirichletData, NeumannData,
};
use crate::dyadic::{
    all_indices, glue_local_symbols, max_coordinate_axis, max_local_variation, total_variation,
};
use crate::error::{Error, Result};
use crate::halfspace::periodized_poisson_kernel;
use crate::lattice::{BoxDomain, PNorm, Vertex};
use crate::spectral::{PeriodicSymbol, Symbol};
use crate::walk::{
    continuum_kernel, kernel_variation_constant, periodized_frequencies, sample_exits,
    total_variation_distance, WalkConfig,
};

/// Largest box side accepted for `d = 4` sweeps.
pub const HIGH_DIM_MAX_N: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    IidGaussian,
    SingleMode,
    Checkerboard,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::IidGaussian => "iid-gaussian",
            Generator::SingleMode => "single-mode",
            Generator::Checkerboard => "checkerboard",
        })
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid-gaussian" => Ok(Generator::IidGaussian),
            "single-mode" => Ok(Generator::SingleMode),
            "checkerboard" => Ok(Generator::Checkerboard),
            other => Err(Error::InvalidArgument(format!("unknown generator {other}"))),
        }
    }
}

impl Generator {
    /// Values at `sites`, drawn from `seed`.
    pub fn generate(self, sites: &[Vertex], n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            Generator::IidGaussian => sites
                .iter()
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect(),
            Generator::SingleMode => {
                let k = single_mode_frequency(&mut rng, sites.first().map_or(0, |x| x.len()), n);
                let h = std::f64::consts::PI / n as f64;
                sites
                    .iter()
                    .map(|x| {
                        let phase: i64 = x.iter().zip(&k).map(|(a, b)| a * b).sum();
                        (h * phase as f64).cos()
                    })
                    .collect()
            }
            Generator::Checkerboard => sites
                .iter()
                .map(|x| if x.iter().sum::<i64>() % 2 == 0 { 1.0 } else { -1.0 })
                .collect(),
        }
    }
}

/// Nonzero frequency in `{0,…,N}^d` used by the single-mode generator.
pub fn single_mode_frequency(rng: &mut impl Rng, d: usize, n: usize) -> Vec<i64> {
    loop {
        let k: Vec<i64> = (0..d).map(|_| rng.random_range(0..=n as i64)).collect();
        if k.iter().any(|&c| c != 0) {
            return k;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSpec {
    pub d: Vec<usize>,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    pub p: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub generator: Generator,
}

impl SweepSpec {
    pub fn validate(&self, opts: &SweepOptions) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.d.is_empty() || self.n.is_empty() || self.p.is_empty() {
            return bad("d, N and p lists must be nonempty".into());
        }
        if self.samples < 1 {
            return bad("samples must be at least 1".into());
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 2) {
            return bad(format!("N = {n} is below 2"));
        }
        if let Some(&p) = self.p.iter().find(|&&p| !(p > 1.0)) {
            return bad(format!("p = {p} must exceed 1"));
        }
        for &d in &self.d {
            match d {
                2 | 3 => {}
                4 if opts.allow_d4 => {
                    if let Some(&n) = self.n.iter().find(|&&n| n > HIGH_DIM_MAX_N) {
                        return bad(format!("d = 4 is limited to N ≤ {HIGH_DIM_MAX_N}, got {n}"));
                    }
                }
                4 => return bad("d = 4 needs the high-dimension opt-in".into()),
                _ => return bad(format!("unsupported dimension {d}")),
            }
        }
        Ok(())
    }

    /// Short hex digest of the sweep settings and report kind.
    pub fn hash(&self, kind: &str) -> String {
        spec_hash(kind, self)
    }
}

fn spec_hash<T: Serialize>(kind: &str, spec: &T) -> String {
    let json = serde_json::to_string(&(kind, spec)).expect("spec serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Per-cell seed: the first eight bytes of a hash of the cell key.
pub fn cell_seed(kind: SweepKind, seed: u64, d: usize, n: usize, sample: usize) -> u64 {
    let key = format!("{kind}:{seed}:{d}:{n}:{sample}");
    let digest = Sha256::digest(key.as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepOptions {
    /// Record wall-clock time per cell; off gives byte-reproducible output.
    pub timing: bool,
    pub allow_d4: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Dirichlet,
    Neumann,
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepKind::Dirichlet => "dirichlet",
            SweepKind::Neumann => "neumann",
        })
    }
}

/// One CSV row. Dirichlet rows carry `nor/tan`, Neumann rows `tan/nor`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub p: f64,
    pub sample: usize,
    pub seed: u64,
    pub tan_norm: f64,
    pub nor_norm: f64,
    pub ratio: Option<f64>,
    pub runtime_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub d: usize,
    pub p: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub max_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthRow {
    pub d: usize,
    pub p: f64,
    pub n_min: usize,
    pub n_max: usize,
    /// `max_ratio(N_max) / max_ratio(N_min)`.
    pub growth: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub spec: SweepSpec,
    pub spec_hash: String,
    pub rows: Vec<ReportRow>,
    pub summary: Vec<SummaryRow>,
    pub growth: Vec<GrowthRow>,
}

pub fn run_dirichlet_sweep(spec: &SweepSpec, opts: SweepOptions) -> Result<SweepReport> {
    run_sweep(SweepKind::Dirichlet, spec, opts)
}

pub fn run_neumann_sweep(spec: &SweepSpec, opts: SweepOptions) -> Result<SweepReport> {
    run_sweep(SweepKind::Neumann, spec, opts)
}

fn run_cell(
    kind: SweepKind,
    spec: &SweepSpec,
    opts: SweepOptions,
    d: usize,
    n: usize,
    sample: usize,
) -> Result<Vec<ReportRow>> {
    let seed = cell_seed(kind, spec.seed, d, n, sample);
    let domain = BoxDomain::new(d, n)?;
    let start = Instant::now();
    let u = match kind {
        SweepKind::Dirichlet => {
            let sites = domain.boundary_vertices();
            let values = spec.generator.generate(&sites, n, seed);
            dirichlet_extension(&DirichletData::new(domain, values)?)?
        }
        SweepKind::Neumann => {
            let sites: Vec<Vertex> = domain.normal_edges().into_iter().map(|e| e.tail).collect();
            let raw = spec.generator.generate(&sites, n, seed);
            let g = NeumannData::projected(domain, raw.clone())?;
            let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if max_abs(g.values()) <= 1e-12 * max_abs(&raw) {
                return Err(Error::Degenerate(
                    "normal data is constant, so its projection vanishes".into(),
                ));
            }
            neumann_extension(&g)?
        }
    };
    let mut rows = Vec::with_capacity(spec.p.len());
    for &p in &spec.p {
        let report = gradient_comparison(&u, domain, PNorm::new(p)?)?;
        let ratio = match kind {
            SweepKind::Dirichlet => report.nor_over_tan,
            SweepKind::Neumann => report.tan_over_nor,
        };
        rows.push(ReportRow {
            d,
            n,
            p,
            sample,
            seed,
            tan_norm: report.tan_norm,
            nor_norm: report.nor_norm,
            ratio,
            runtime_ms: 0.0,
        });
    }
    if opts.timing {
        let ms = start.elapsed().as_secs_f64() * 1e3;
        rows.iter_mut().for_each(|r| r.runtime_ms = ms);
    }
    Ok(rows)
}

fn run_sweep(kind: SweepKind, spec: &SweepSpec, opts: SweepOptions) -> Result<SweepReport> {
    spec.validate(&opts)?;
    let mut cells = Vec::new();
    for &d in &spec.d {
        for &n in &spec.n {
            for sample in 0..spec.samples {
                cells.push((d, n, sample));
            }
        }
    }
    let results: Vec<Vec<ReportRow>> = cells
        .par_iter()
        .map(|&(d, n, sample)| {
            run_cell(kind, spec, opts, d, n, sample).map_err(|e| Error::Cell {
                cell: format!("{kind} d={d} N={n} sample={sample}"),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<ReportRow> = results.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (a.d, a.n)
            .cmp(&(b.d, b.n))
            .then(a.p.total_cmp(&b.p))
            .then(a.sample.cmp(&b.sample))
    });
    let (summary, growth) = summarize(&rows);
    Ok(SweepReport {
        kind,
        spec: spec.clone(),
        spec_hash: spec.hash(&kind.to_string()),
        rows,
        summary,
        growth,
    })
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
struct OrderedP(f64);

impl Eq for OrderedP {}

impl Ord for OrderedP {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn summarize(rows: &[ReportRow]) -> (Vec<SummaryRow>, Vec<GrowthRow>) {
    let mut cells: BTreeMap<(usize, OrderedP, usize), Vec<Option<f64>>> = BTreeMap::new();
    for r in rows {
        cells
            .entry((r.d, OrderedP(r.p), r.n))
            .or_default()
            .push(r.ratio);
    }
    let summary: Vec<SummaryRow> = cells
        .iter()
        .map(|(&(d, p, n), ratios)| {
            let finite: Option<Vec<f64>> = ratios.iter().copied().collect();
            let (max_ratio, mean_ratio) = match finite {
                Some(v) if !v.is_empty() => (
                    Some(v.iter().copied().fold(f64::MIN, f64::max)),
                    Some(v.iter().sum::<f64>() / v.len() as f64),
                ),
                _ => (None, None),
            };
            SummaryRow {
                d,
                p: p.0,
                n,
                max_ratio,
                mean_ratio,
                samples: ratios.len(),
            }
        })
        .collect();
    let mut by_dp: BTreeMap<(usize, OrderedP), Vec<&SummaryRow>> = BTreeMap::new();
    for s in &summary {
        by_dp.entry((s.d, OrderedP(s.p))).or_default().push(s);
    }
    let growth = by_dp
        .into_iter()
        .map(|((d, p), group)| {
            let first = group.first().expect("nonempty group");
            let last = group.last().expect("nonempty group");
            let growth = match (first.max_ratio, last.max_ratio) {
                (Some(a), Some(b)) if a > 0.0 => Some(b / a),
                _ => None,
            };
            GrowthRow {
                d,
                p: p.0,
                n_min: first.n,
                n_max: last.n,
                growth,
            }
        })
        .collect();
    (summary, growth)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_csv_rows<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, bytes)?;
    Ok(path)
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

impl SweepReport {
    /// One row per (d, N, p, sample).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv_rows(&self.rows, out)
    }

    /// Spec, per-cell summary and growth diagnostics.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind,
            "spec": self.spec,
            "spec_hash": self.spec_hash,
            "summary": self.summary,
            "growth": self.growth,
        })
    }

    pub fn file_name(&self, format: Format) -> String {
        format!("{}-sweep-{}.{}", self.kind, self.spec_hash, format.extension())
    }

    pub fn write_to(&self, dir: &Path, format: Format) -> Result<PathBuf> {
        let bytes = match format {
            Format::Csv => {
                let mut buf = Vec::new();
                self.write_csv(&mut buf)?;
                buf
            }
            Format::Json => json_bytes(&self.to_json())?,
        };
        write_file(dir, &self.file_name(format), &bytes)
    }

    /// Largest growth diagnostic over all (d, p); `None` if any is undefined.
    pub fn worst_growth(&self) -> Option<f64> {
        self.growth
            .iter()
            .map(|g| g.growth)
            .try_fold(0.0f64, |m, g| g.map(|g| m.max(g)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelSpec {
    pub d: usize,
    pub z: Vec<usize>,
    #[serde(rename = "L")]
    pub l: usize,
    pub samples: u64,
    pub seed: u64,
    /// Offsets with `|x|_∞ ≤ window` get a row.
    pub window: usize,
}

impl KernelSpec {
    /// Half-period used for the continuum comparison, large enough that periodic images are negligible.
    pub fn continuum_l(&self, z: usize) -> usize {
        self.l.max(8 * z)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelRow {
    pub z: usize,
    /// Offset coordinates separated by spaces.
    pub x: String,
    pub mc: f64,
    pub mc_stderr: f64,
    pub spectral: f64,
    pub spectral_wide: f64,
    pub continuum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelBlock {
    pub z: usize,
    /// Total variation between MC frequencies and the spectral kernel, both folded onto `I_L`.
    pub tv_mc_spectral: f64,
    /// Max relative gap between the wide spectral kernel and the continuum term on `|x|_∞ ≤ z/2`.
    pub continuum_rel_error: f64,
    pub variation_constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelReport {
    pub spec: KernelSpec,
    pub spec_hash: String,
    pub blocks: Vec<KernelBlock>,
    pub rows: Vec<KernelRow>,
    /// Max over min of the variation constants across the z list.
    pub variation_spread: f64,
}

fn window_offsets(dim: usize, w: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    crate::dyadic::for_each_point(&vec![(-w, w); dim], |x| out.push(x.to_vec()));
    out
}

fn layer_at(layer: &ndarray::ArrayD<f64>, x: &[i64]) -> f64 {
    let l = layer.shape()[0] / 2;
    let idx: Vec<usize> = x.iter().map(|&c| crate::lattice::wrap(c, l)).collect();
    layer[IxDyn(&idx)]
}

pub fn run_kernel_report(spec: &KernelSpec) -> Result<KernelReport> {
    if spec.d < 2 || spec.z.is_empty() || spec.z.contains(&0) || spec.samples < 1 {
        return Err(Error::InvalidArgument(
            "kernel report needs d ≥ 2, z ≥ 1 and at least one walk".into(),
        ));
    }
    if spec.window > spec.l {
        return Err(Error::InvalidArgument(format!(
            "window {} exceeds the half-period {}",
            spec.window, spec.l
        )));
    }
    let dim = spec.d - 1;
    let mut blocks = Vec::new();
    let mut rows = Vec::new();
    for &z in &spec.z {
        let cfg = WalkConfig::new(spec.d, z as u64, spec.seed)?;
        let exits = sample_exits(&cfg, spec.samples)?;
        let mc = periodized_frequencies(&exits, dim, spec.l);
        let spectral = periodized_poisson_kernel(z, spec.d, spec.l)?;
        let wide = periodized_poisson_kernel(z, spec.d, spec.continuum_l(z))?;
        let half = (z / 2) as i64;
        let continuum_rel_error = window_offsets(dim, half)
            .iter()
            .map(|x| {
                let xf: Vec<f64> = x.iter().map(|&c| c as f64).collect();
                let c = continuum_kernel(&xf, z as f64);
                (layer_at(&wide, x) - c).abs() / c
            })
            .fold(0.0, f64::max);
        let n = spec.samples as f64;
        for x in window_offsets(dim, spec.window as i64) {
            let p = layer_at(&mc, &x);
            let xf: Vec<f64> = x.iter().map(|&c| c as f64).collect();
            rows.push(KernelRow {
                z,
                x: x.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
                mc: p,
                mc_stderr: (p * (1.0 - p) / n).sqrt(),
                spectral: layer_at(&spectral, &x),
                spectral_wide: layer_at(&wide, &x),
                continuum: continuum_kernel(&xf, z as f64),
            });
        }
        blocks.push(KernelBlock {
            z,
            tv_mc_spectral: total_variation_distance(&mc, &spectral),
            continuum_rel_error,
            variation_constant: kernel_variation_constant(z, spec.d, spec.l)?,
        });
    }
    let (lo, hi) = blocks.iter().fold((f64::MAX, 0.0f64), |(lo, hi), b| {
        (lo.min(b.variation_constant), hi.max(b.variation_constant))
    });
    Ok(KernelReport {
        spec: spec.clone(),
        spec_hash: spec_hash("kernel", spec),
        blocks,
        rows,
        variation_spread: hi / lo,
    })
}

impl KernelReport {
    pub fn write_to(&self, dir: &Path, format: Format) -> Result<PathBuf> {
        let name = format!("kernel-report-{}.{}", self.spec_hash, format.extension());
        let bytes = match format {
            Format::Csv => {
                let mut buf = Vec::new();
                write_csv_rows(&self.rows, &mut buf)?;
                buf
            }
            Format::Json => json_bytes(&serde_json::json!({
                "spec": self.spec,
                "spec_hash": self.spec_hash,
                "blocks": self.blocks,
                "variation_spread": self.variation_spread,
            }))?,
        };
        write_file(dir, &name, &bytes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolStats {
    pub name: String,
    pub max_lvar: f64,
    pub var: f64,
    /// `var ≤ 4^dim · max_lvar`.
    pub var_bound_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolBlock {
    #[serde(rename = "L")]
    pub l: usize,
    pub symbols: Vec<SymbolStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityRow {
    pub name: String,
    /// Max over min of `max_lvar` across the L list.
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolReport {
    pub d: usize,
    #[serde(rename = "L")]
    pub l_list: Vec<usize>,
    pub blocks: Vec<SymbolBlock>,
    pub stability: Vec<StabilityRow>,
}

/// The Dirichlet symbol glued over dyadic rectangles with the axis picked by `J(k)`.
pub fn glued_dirichlet_symbol(dim: usize, l: usize) -> Result<PeriodicSymbol> {
    let per_axis: Vec<PeriodicSymbol> =
        (0..dim).map(|i| Symbol::Dirichlet(i).periodic(dim, l)).collect();
    let family: BTreeMap<_, _> = all_indices(dim, l)
        .into_iter()
        .map(|k| {
            let j = max_coordinate_axis(&k);
            (k, per_axis[j].clone())
        })
        .collect();
    glue_local_symbols(&family, dim, l)
}

fn symbol_stats(name: String, a: &PeriodicSymbol) -> SymbolStats {
    let max_lvar = max_local_variation(a);
    let var = total_variation(a);
    let bound = 4f64.powi(a.dim() as i32) * max_lvar;
    SymbolStats {
        name,
        max_lvar,
        var,
        var_bound_holds: var <= bound * (1.0 + 1e-12),
    }
}

pub fn run_symbol_report(d: usize, l_list: &[usize]) -> Result<SymbolReport> {
    if d < 2 || l_list.is_empty() || l_list.contains(&0) {
        return Err(Error::InvalidArgument(
            "symbol report needs d ≥ 2 and positive half-periods".into(),
        ));
    }
    let dim = d - 1;
    let blocks: Vec<SymbolBlock> = l_list
        .par_iter()
        .map(|&l| -> Result<SymbolBlock> {
            let mut symbols: Vec<SymbolStats> = (0..dim)
                .map(|i| symbol_stats(format!("neumann-{}", i + 1), &Symbol::Neumann(i).periodic(dim, l)))
                .collect();
            symbols.push(symbol_stats("dirichlet-glued".into(), &glued_dirichlet_symbol(dim, l)?));
            Ok(SymbolBlock { l, symbols })
        })
        .collect::<Result<_>>()?;
    let stability = blocks[0]
        .symbols
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let (lo, hi) = blocks.iter().fold((f64::MAX, 0.0f64), |(lo, hi), b| {
                let v = b.symbols[j].max_lvar;
                (lo.min(v), hi.max(v))
            });
            StabilityRow {
                name: s.name.clone(),
                spread: hi / lo,
            }
        })
        .collect();
    Ok(SymbolReport {
        d,
        l_list: l_list.to_vec(),
        blocks,
        stability,
    })
}

#[derive(Serialize)]
struct SymbolCsvRow<'a> {
    #[serde(rename = "L")]
    l: usize,
    symbol: &'a str,
    max_lvar: f64,
    var: f64,
    var_bound_holds: bool,
}

impl SymbolReport {
    pub fn write_to(&self, dir: &Path, format: Format) -> Result<PathBuf> {
        let hash = spec_hash("symbol", &(self.d, &self.l_list));
        let name = format!("symbol-report-{hash}.{}", format.extension());
        let bytes = match format {
            Format::Csv => {
                let rows: Vec<SymbolCsvRow> = self
                    .blocks
                    .iter()
                    .flat_map(|b| {
                        b.symbols.iter().map(move |s| SymbolCsvRow {
                            l: b.l,
                            symbol: &s.name,
                            max_lvar: s.max_lvar,
                            var: s.var,
                            var_bound_holds: s.var_bound_holds,
                        })
                    })
                    .collect();
                let mut buf = Vec::new();
                write_csv_rows(&rows, &mut buf)?;
                buf
            }
            Format::Json => json_bytes(self)?,
        };
        write_file(dir, &name, &bytes)
    }
}

/// Outcome of one self-test check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelftestOutcome {
    pub dirichlet: SweepReport,
    pub neumann: SweepReport,
    pub symbols: SymbolReport,
    pub checks: Vec<Check>,
}

impl SelftestOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Writes both sweep tables; timing is off so the bytes depend only on the settings.
    pub fn write_to(&self, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
        Ok(vec![
            self.dirichlet.write_to(dir, format)?,
            self.neumann.write_to(dir, format)?,
        ])
    }
}

impl Default for SweepSpec {
    /// The self-test grid.
    fn default() -> Self {
        SweepSpec {
            d: vec![2],
            n: vec![4, 8, 16],
            p: vec![1.5, 2.0, 3.0],
            samples: 8,
            seed: 0,
            generator: Generator::IidGaussian,
        }
    }
}

/// Quick sweeps plus symbol checks; timing is never recorded.
pub fn run_selftest(spec: &SweepSpec) -> Result<SelftestOutcome> {
    let opts = SweepOptions::default();
    let dirichlet = run_dirichlet_sweep(spec, opts)?;
    let neumann = run_neumann_sweep(spec, opts)?;
    let symbols = run_symbol_report(2, &[4, 8, 16])?;
    let mut checks = Vec::new();
    for report in [&dirichlet, &neumann] {
        let all_finite = report
            .rows
            .iter()
            .all(|r| r.ratio.is_some_and(|x| x.is_finite() && x > 0.0));
        checks.push(Check {
            name: format!("{}-ratios-finite", report.kind),
            pass: all_finite,
            detail: format!("{} rows", report.rows.len()),
        });
        let worst = report.worst_growth();
        checks.push(Check {
            name: format!("{}-growth", report.kind),
            pass: worst.is_some_and(|g| g <= 3.0),
            detail: format!("worst growth {worst:?}"),
        });
    }
    checks.push(Check {
        name: "symbol-var-bound".into(),
        pass: symbols
            .blocks
            .iter()
            .all(|b| b.symbols.iter().all(|s| s.var_bound_holds)),
        detail: format!("{} blocks", symbols.blocks.len()),
    });
    let spread = symbols.stability.iter().map(|s| s.spread).fold(0.0, f64::max);
    checks.push(Check {
        name: "symbol-stability".into(),
        pass: spread <= 2.0,
        detail: format!("max spread {spread:.4}"),
    });
    Ok(SelftestOutcome {
        dirichlet,
        neumann,
        symbols,
        checks,
    })
}

/// Run `f` on a dedicated pool; `None` uses rayon's default size.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepSpec {
        SweepSpec {
            d: vec![2],
            n: vec![4, 6],
            p: vec![2.0],
            samples: 2,
            seed: 3,
            generator: Generator::SingleMode,
        }
    }

    #[test]
    fn single_mode_ratios_positive() {
        let r = run_dirichlet_sweep(&small(), SweepOptions::default()).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!(r.rows.iter().all(|row| row.ratio.unwrap() > 0.0));
        assert_eq!(r.summary.len(), 2);
    }

    #[test]
    fn zero_neumann_data_is_degenerate() {
        let spec = SweepSpec {
            generator: Generator::Checkerboard,
            ..small()
        };
        assert!(run_neumann_sweep(&spec, SweepOptions::default()).is_ok());
        // At N = 2 every inward edge starts on an odd vertex, so the data is constant.
        let err = run_neumann_sweep(&SweepSpec { n: vec![2], ..spec }, SweepOptions::default())
            .unwrap_err();
        match err {
            Error::Cell { source, .. } => assert!(matches!(*source, Error::Degenerate(_))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let opts = SweepOptions::default();
        assert!(SweepSpec { p: vec![1.0], ..small() }.validate(&opts).is_err());
        assert!(SweepSpec { n: vec![1], ..small() }.validate(&opts).is_err());
        assert!(SweepSpec { samples: 0, ..small() }.validate(&opts).is_err());
        assert!(SweepSpec { d: vec![4], ..small() }.validate(&opts).is_err());
        let hi = SweepOptions {
            allow_d4: true,
            ..opts
        };
        assert!(SweepSpec { d: vec![4], ..small() }.validate(&hi).is_ok());
    }

    #[test]
    fn hash_depends_on_spec() {
        let a = small();
        let b = SweepSpec { seed: 4, ..small() };
        assert_ne!(a.hash("dirichlet"), b.hash("dirichlet"));
        assert_ne!(a.hash("dirichlet"), a.hash("neumann"));
        assert_eq!(a.hash("dirichlet").len(), 16);
    }
}
