//! `qmcm` — collision-limited yield and performance experiments for transmon
//! chiplet architectures.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use commands::CalibSource;
use config::{
    config_error, default_out_dir, merge, parse_dims, require, validate_ratio, validate_sigma,
    ConfigError, FileConfig,
};
use qmcm_core::bench::BenchFamily;
use report::OutputDir;

const EXIT_CONFIG_ERROR: i32 = 1;
const EXIT_RUNTIME_ERROR: i32 = 2;

#[derive(Parser)]
#[command(
    name = "qmcm",
    version,
    about = "Monte Carlo yield, assembly, and benchmark comparisons for transmon chiplet MCMs",
    after_help = "Values come from flags first, then the --config TOML file. \
                  The master seed is mandatory; runs never seed from the clock."
)]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for every random draw of the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: $QMCM_OUT_DIR or ./qmcm-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; affects wall clock only, results are identical for
    /// any value.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Detuning-infidelity model file (bins JSON); defaults to a synthetic
    /// model with median 0.012 and mean 0.018.
    #[arg(long, global = true)]
    calib: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Collision-free yield over a (size, detuning step, sigma) grid.
    Sweep(SweepArgs),
    /// MCM configuration counts and output upper bounds from one batch.
    Configs(ConfigsArgs),
    /// Fabricate, bin, and assemble MCMs; report post-assembly yield.
    Assemble(AssembleArgs),
    /// E_avg(MCM)/E_avg(mono) heatmap over chiplet sizes and square dims.
    Heatmap(HeatmapArgs),
    /// Benchmark fidelity-product comparison of MCM vs monolithic.
    Bench(BenchArgs),
    /// Build a detuning-infidelity model from a calibration snapshot.
    IngestCalib(IngestCalibArgs),
    /// Synthesize a detuning-infidelity model from summary statistics.
    SynthCalib(SynthCalibArgs),
    /// Export a topology file for a chiplet, MCM, or monolithic device.
    Topology(TopologyArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Device sizes in qubits (multiples of 10).
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Detuning steps in GHz.
    #[arg(long, value_delimiter = ',')]
    steps: Option<Vec<f64>>,
    /// Fabrication spreads in GHz.
    #[arg(long, value_delimiter = ',')]
    sigmas: Option<Vec<f64>>,
    /// Devices per Monte Carlo batch.
    #[arg(long)]
    batch: Option<usize>,
}

#[derive(Args)]
struct ConfigsArgs {
    /// Chiplet size in qubits.
    #[arg(long)]
    chiplet: Option<usize>,
    /// MCM dims, e.g. 2x2,3x3.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<String>>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Args)]
struct AssembleArgs {
    #[arg(long)]
    chiplet: Option<usize>,
    /// MCM dims, e.g. 3x3.
    #[arg(long)]
    dims: Option<String>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Link vs on-chip infidelity ratio for exported MCM noise.
    #[arg(long)]
    ratio: Option<f64>,
    /// Shuffle budget per window before it slides.
    #[arg(long)]
    max_reconfig: Option<u32>,
    /// Cap on exported per-MCM device files (default: all).
    #[arg(long)]
    export_mcms: Option<usize>,
    /// Scale the per-bump bond failure probability by 100.
    #[arg(long)]
    bond_sensitivity: bool,
}

#[derive(Args)]
struct HeatmapArgs {
    #[arg(long, value_delimiter = ',')]
    chiplets: Option<Vec<usize>>,
    /// Square dims n (the MCM is n x n).
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    /// Monolithic batch; the chiplet arm scales by n^2.
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    max_reconfig: Option<u32>,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark families (bv,qaoa,ghz,adder,primacy,bitcode,hamiltonian)
    /// or `all`.
    #[arg(long, value_delimiter = ',')]
    families: Option<Vec<String>>,
    #[arg(long)]
    chiplet: Option<usize>,
    #[arg(long)]
    dims: Option<String>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    max_reconfig: Option<u32>,
}

#[derive(Args)]
struct IngestCalibArgs {
    /// Calibration snapshot JSON.
    #[arg(long)]
    snapshot: PathBuf,
}

#[derive(Args)]
struct SynthCalibArgs {
    #[arg(long)]
    median: Option<f64>,
    #[arg(long)]
    mean: Option<f64>,
    #[arg(long)]
    edges: Option<usize>,
}

#[derive(Args)]
struct TopologyArgs {
    #[arg(long)]
    chiplet: Option<usize>,
    /// Grid dims, e.g. 2x3 (default 1x1).
    #[arg(long)]
    dims: Option<String>,
    /// Erase chiplet boundaries and link markings.
    #[arg(long)]
    monolithic: bool,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG_ERROR } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let file = match FileConfig::load(cli.config.as_deref()) {
        Ok(f) => f,
        Err(e) => return report_error(e),
    };

    if let Some(workers) = cli.workers.or(file.workers) {
        if workers == 0 {
            return report_error(ConfigError("workers must be at least 1".into()).into());
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
            return report_error(anyhow::anyhow!("thread pool: {e}"));
        }
    }

    let seed = match require(merge(cli.seed, file.seed), "--seed") {
        Ok(s) => s,
        Err(e) => return report_error(e),
    };
    let out_dir = merge(cli.out, file.out.clone()).unwrap_or_else(default_out_dir);
    let out = match OutputDir::create(&out_dir) {
        Ok(out) => out,
        Err(e) => return report_error(e),
    };
    let calib = CalibSource::resolve(merge(cli.calib, file.calib.clone()));

    let result = dispatch(cli.command, &file, seed, &out, calib);
    match result {
        Ok(code) => code,
        Err(e) => {
            out.remove_partial_outputs();
            report_error(e)
        }
    }
}

fn report_error(e: anyhow::Error) -> i32 {
    eprintln!("error: {e:#}");
    if e.is::<ConfigError>() {
        EXIT_CONFIG_ERROR
    } else {
        EXIT_RUNTIME_ERROR
    }
}

fn dispatch(command: Command, file: &FileConfig, seed: u64, out: &OutputDir, calib: CalibSource) -> Result<i32> {
    match command {
        Command::Sweep(a) => {
            let p = commands::SweepParams {
                sizes: merge(a.sizes, file.sweep.sizes.clone())
                    .unwrap_or_else(|| vec![10, 20, 50, 100, 200, 300, 500, 750, 1000]),
                steps: merge(a.steps, file.sweep.steps.clone())
                    .unwrap_or_else(|| vec![0.04, 0.05, 0.06, 0.07]),
                sigmas: merge(a.sigmas, file.sweep.sigmas.clone())
                    .unwrap_or_else(|| vec![0.1323, 0.014, 0.006]),
                batch: merge(a.batch, file.sweep.batch).unwrap_or(1000),
                seed,
            };
            for &s in &p.sigmas {
                validate_sigma(s)?;
            }
            commands::run_sweep(out, &p)
        }
        Command::Configs(a) => {
            let dims = merge(a.dims, file.configs.dims.clone()).unwrap_or_else(|| {
                vec!["1x1".into(), "2x2".into(), "3x3".into(), "4x4".into(), "5x5".into()]
            });
            let p = commands::ConfigsParams {
                chiplet: merge(a.chiplet, file.configs.chiplet).unwrap_or(20),
                dims: dims.iter().map(|d| parse_dims(d)).collect::<Result<Vec<_>>>()?,
                batch: merge(a.batch, file.configs.batch).unwrap_or(100_000),
                sigma: validate_sigma(merge(a.sigma, file.configs.sigma).unwrap_or(0.014))?,
                seed,
            };
            commands::run_configs(out, &p)
        }
        Command::Assemble(a) => {
            let p = commands::AssembleParams {
                chiplet: require(merge(a.chiplet, file.assemble.chiplet), "--chiplet")?,
                dims: parse_dims(&require(merge(a.dims, file.assemble.dims.clone()), "--dims")?)?,
                batch: merge(a.batch, file.assemble.batch).unwrap_or(10_000),
                sigma: validate_sigma(merge(a.sigma, file.assemble.sigma).unwrap_or(0.014))?,
                ratio: validate_ratio(merge(a.ratio, file.assemble.ratio).unwrap_or(4.17))?,
                max_reconfig: merge(a.max_reconfig, file.assemble.max_reconfig).unwrap_or(100),
                export_mcms: merge(a.export_mcms, file.assemble.export_mcms),
                bond_sensitivity: a.bond_sensitivity
                    || file.assemble.bond_sensitivity.unwrap_or(false),
                calib,
                seed,
            };
            commands::run_assemble(out, &p)
        }
        Command::Heatmap(a) => {
            let p = commands::HeatmapParams {
                chiplets: merge(a.chiplets, file.heatmap.chiplets.clone())
                    .unwrap_or_else(|| vec![10, 20, 40, 60, 90]),
                dims: merge(a.dims, file.heatmap.dims.clone()).unwrap_or_else(|| vec![2, 3, 4]),
                ratios: merge(a.ratios, file.heatmap.ratios.clone())
                    .unwrap_or_else(|| vec![4.17, 3.0, 2.0, 1.0]),
                batch: merge(a.batch, file.heatmap.batch).unwrap_or(2000),
                sigma: validate_sigma(merge(a.sigma, file.heatmap.sigma).unwrap_or(0.014))?,
                max_reconfig: merge(a.max_reconfig, file.heatmap.max_reconfig).unwrap_or(100),
                calib,
                seed,
            };
            for &r in &p.ratios {
                validate_ratio(r)?;
            }
            commands::run_heatmap(out, &p)
        }
        Command::Bench(a) => {
            let family_names = merge(a.families, file.bench.families.clone())
                .unwrap_or_else(|| vec!["all".to_string()]);
            let families = parse_families(&family_names)?;
            let p = commands::BenchParams {
                families,
                chiplet: require(merge(a.chiplet, file.bench.chiplet), "--chiplet")?,
                dims: parse_dims(&require(merge(a.dims, file.bench.dims.clone()), "--dims")?)?,
                ratio: validate_ratio(merge(a.ratio, file.bench.ratio).unwrap_or(4.17))?,
                batch: merge(a.batch, file.bench.batch).unwrap_or(2000),
                sigma: validate_sigma(merge(a.sigma, file.bench.sigma).unwrap_or(0.014))?,
                max_reconfig: merge(a.max_reconfig, file.bench.max_reconfig).unwrap_or(100),
                calib,
                seed,
            };
            commands::run_bench(out, &p)
        }
        Command::IngestCalib(a) => {
            commands::run_ingest_calib(out, &commands::IngestCalibParams { snapshot: a.snapshot, seed })
        }
        Command::SynthCalib(a) => {
            let p = commands::SynthCalibParams {
                median: merge(a.median, file.synth_calib.median).unwrap_or(0.012),
                mean: merge(a.mean, file.synth_calib.mean).unwrap_or(0.018),
                edges: merge(a.edges, file.synth_calib.edges).unwrap_or(2000),
                seed,
            };
            if !(p.median > 0.0 && p.median <= p.mean && p.mean < 1.0) {
                return config_error(format!(
                    "need 0 < median <= mean < 1, got median {} mean {}",
                    p.median, p.mean
                ));
            }
            commands::run_synth_calib(out, &p)
        }
        Command::Topology(a) => {
            let dims = merge(a.dims, file.topology.dims.clone()).unwrap_or_else(|| "1x1".into());
            let p = commands::TopologyParams {
                chiplet: require(merge(a.chiplet, file.topology.chiplet), "--chiplet")?,
                dims: parse_dims(&dims)?,
                monolithic: a.monolithic || file.topology.monolithic.unwrap_or(false),
                seed,
            };
            commands::run_topology(out, &p)
        }
    }
}

fn parse_families(names: &[String]) -> Result<Vec<BenchFamily>> {
    let mut families = Vec::new();
    for name in names {
        if name == "all" {
            families.extend(BenchFamily::ALL);
        } else {
            match BenchFamily::from_str(name) {
                Ok(f) => families.push(f),
                Err(e) => return config_error(e.to_string()),
            }
        }
    }
    families.dedup();
    Ok(families)
}
