use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harmonic_lattice::lab::{
    run_dirichlet_sweep, run_kernel_report, run_neumann_sweep, run_selftest, run_symbol_report,
    with_threads, Format, Generator, KernelSpec, SweepOptions, SweepSpec,
};
use harmonic_lattice::Result;

#[derive(Parser)]
#[command(name = "harmonic-lab", version, about = "Sweeps and reports for discrete harmonic extensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "2")]
    d: Vec<usize>,

    #[arg(long = "n-list", value_delimiter = ',', default_value = "8,16,32,64")]
    n_list: Vec<usize>,

    /// Exponents; `inf` for the max norm.
    #[arg(long = "p-list", value_delimiter = ',', default_value = "1.5,2,3")]
    p_list: Vec<f64>,

    #[arg(long, default_value_t = 50)]
    samples: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = Generator::IidGaussian)]
    generator: Generator,

    /// Leave runtime_ms at 0 so output bytes depend only on the sweep settings.
    #[arg(long)]
    no_timing: bool,

    /// Allow d = 4 (small N only).
    #[arg(long)]
    allow_d4: bool,
}

impl SweepArgs {
    fn spec(&self) -> SweepSpec {
        SweepSpec {
            d: self.d.clone(),
            n: self.n_list.clone(),
            p: self.p_list.clone(),
            samples: self.samples,
            seed: self.seed,
            generator: self.generator,
        }
    }

    fn options(&self) -> SweepOptions {
        SweepOptions {
            timing: !self.no_timing,
            allow_d4: self.allow_d4,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Gradient comparison for the Dirichlet extension over a grid of (d, N, p).
    DirichletSweep(SweepArgs),
    /// Gradient comparison for the Neumann extension over a grid of (d, N, p).
    NeumannSweep(SweepArgs),
    /// Monte-Carlo, spectral and continuum Poisson kernels.
    KernelReport {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "z-list", value_delimiter = ',', default_value = "1,3,10")]
        z_list: Vec<usize>,
        #[arg(long = "half-period", default_value_t = 64)]
        l: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        window: usize,
    },
    /// Local and total variation of the multiplier symbols over half-periods.
    SymbolReport {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "l-list", value_delimiter = ',', default_value = "4,8,16,32,64")]
        l_list: Vec<usize>,
    },
    /// Small sweeps with pass/fail checks; exits 2 on failure.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (out, format) = (cli.out.clone(), cli.format);
    with_threads(cli.threads, move || -> Result<ExitCode> {
        match cli.command {
            Command::DirichletSweep(args) => {
                let report = run_dirichlet_sweep(&args.spec(), args.options())?;
                println!("{}", report.write_to(&out, format)?.display());
                for g in &report.growth {
                    println!("d={} p={} growth={:?}", g.d, g.p, g.growth);
                }
            }
            Command::NeumannSweep(args) => {
                let report = run_neumann_sweep(&args.spec(), args.options())?;
                println!("{}", report.write_to(&out, format)?.display());
                for g in &report.growth {
                    println!("d={} p={} growth={:?}", g.d, g.p, g.growth);
                }
            }
            Command::KernelReport {
                d,
                z_list,
                l,
                samples,
                seed,
                window,
            } => {
                let spec = KernelSpec {
                    d,
                    z: z_list,
                    l,
                    samples,
                    seed,
                    window,
                };
                let report = run_kernel_report(&spec)?;
                println!("{}", report.write_to(&out, format)?.display());
                for b in &report.blocks {
                    println!(
                        "z={} tv={:.5} continuum_rel={:.4} variation={:.5}",
                        b.z, b.tv_mc_spectral, b.continuum_rel_error, b.variation_constant
                    );
                }
            }
            Command::SymbolReport { d, l_list } => {
                let report = run_symbol_report(d, &l_list)?;
                println!("{}", report.write_to(&out, format)?.display());
                for s in &report.stability {
                    println!("{} spread={:.4}", s.name, s.spread);
                }
            }
            Command::Selftest { seed, samples } => {
                let spec = SweepSpec {
                    seed,
                    samples,
                    ..SweepSpec::default()
                };
                let outcome = run_selftest(&spec)?;
                for path in outcome.write_to(&out, format)? {
                    println!("{}", path.display());
                }
                for c in &outcome.checks {
                    println!("{} {} ({})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
                }
                if !outcome.passed() {
                    return Ok(ExitCode::from(2));
                }
            }
        }
        Ok(ExitCode::SUCCESS)
    })?
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
