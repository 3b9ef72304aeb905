//! Subcommand implementations.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{Context, Result};
use serde_json::json;

use qmcm_core::assembly::{assemble_batch, rank_chiplets, BondModel};
use qmcm_core::bench::{compare_architectures, BenchFamily, CompareConfig};
use qmcm_core::fabsim::{
    config_count, detuning_sweep, estimate_yield, fabricate_collision_free, FrequencyPlan,
};
use qmcm_core::io;
use qmcm_core::lattice::{
    build_chiplet, build_monolithic, stitch_mcm, validate_frequency_pattern, ChipletSpec, McmSpec,
};
use qmcm_core::noise::{
    assign_device_noise, assign_link_noise, infidelity_heatmap, synth_calibration, DetuningBins,
    HeatmapConfig, LinkNoiseConfig,
};
use qmcm_core::seeds::child_seed;

use crate::config::{config_error, validate_batch};
use crate::report::{f, write_manifest, Csv, OutputDir};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 3;

const CALIB_SEED_SALT: u64 = 0xCA11B;

/// Where the detuning-infidelity model comes from.
pub enum CalibSource {
    File(PathBuf),
    Synthetic { median: f64, mean: f64, edges: usize },
}

impl CalibSource {
    pub fn resolve(calib: Option<PathBuf>) -> CalibSource {
        match calib {
            Some(path) => CalibSource::File(path),
            None => CalibSource::Synthetic { median: 0.012, mean: 0.018, edges: 2000 },
        }
    }

    pub fn load(&self, master_seed: u64) -> Result<(DetuningBins, serde_json::Value)> {
        match self {
            CalibSource::File(path) => {
                let bins = io::load_bins(path)
                    .with_context(|| format!("loading calibration bins {}", path.display()))?;
                Ok((bins, json!({ "source": "file", "path": path.display().to_string() })))
            }
            CalibSource::Synthetic { median, mean, edges } => {
                let seed = child_seed(master_seed, CALIB_SEED_SALT);
                let bins = synth_calibration(*median, *mean, *edges, seed)?;
                Ok((
                    bins,
                    json!({
                        "source": "synthetic",
                        "median": median,
                        "mean": mean,
                        "edges": edges,
                        "derived_seed": seed,
                    }),
                ))
            }
        }
    }
}

fn plan_with(sigma: f64) -> FrequencyPlan {
    FrequencyPlan::default().with_sigma(sigma)
}

fn chiplet_spec(size: usize) -> Result<ChipletSpec> {
    match ChipletSpec::new(size) {
        Ok(spec) => Ok(spec),
        Err(e) => config_error(e.to_string()),
    }
}

fn mcm_spec(size: usize, rows: usize, cols: usize) -> Result<McmSpec> {
    match McmSpec::new(chiplet_spec(size)?, rows, cols) {
        Ok(spec) => Ok(spec),
        Err(e) => config_error(e.to_string()),
    }
}

pub struct SweepParams {
    pub sizes: Vec<usize>,
    pub steps: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub batch: usize,
    pub seed: u64,
}

pub fn run_sweep(out: &OutputDir, p: &SweepParams) -> Result<i32> {
    validate_batch(p.batch)?;
    if p.sizes.is_empty() || p.steps.is_empty() || p.sigmas.is_empty() {
        return config_error("sweep needs at least one size, step, and sigma");
    }
    let points = detuning_sweep(&p.sizes, &p.steps, &p.sigmas, p.batch, p.seed)?;

    let mut csv = Csv::new("size,chiplet,rows,cols,step_ghz,sigma_ghz,batch,collision_free,yield,ci95");
    for pt in &points {
        csv.row(&[
            pt.qubits.to_string(),
            pt.chiplet_size.to_string(),
            pt.rows.to_string(),
            pt.cols.to_string(),
            f(pt.step_ghz),
            f(pt.sigma_ghz),
            pt.estimate.batch.to_string(),
            pt.estimate.collision_free.to_string(),
            f(pt.estimate.fraction),
            f(pt.estimate.ci95),
        ]);
    }
    out.write("sweep.csv", &csv.finish())?;

    // Plot-ready two-column file per (step, sigma) curve.
    for &step in &p.steps {
        for &sigma in &p.sigmas {
            let mut curve = Csv::new("qubits,yield");
            for pt in points.iter().filter(|pt| pt.step_ghz == step && pt.sigma_ghz == sigma) {
                curve.row(&[pt.qubits.to_string(), f(pt.estimate.fraction)]);
            }
            out.write(&format!("curve_step{step}_sigma{sigma}.csv"), &curve.finish())?;
        }
    }

    let mut summary = String::from("detuning sweep\n");
    for &sigma in &p.sigmas {
        for &size in &p.sizes {
            let best = points
                .iter()
                .filter(|pt| pt.sigma_ghz == sigma && pt.qubits == size)
                .max_by(|a, b| a.estimate.fraction.total_cmp(&b.estimate.fraction))
                .unwrap();
            summary.push_str(&format!(
                "sigma {sigma} size {size}: best step {} (yield {:.4})\n",
                best.step_ghz, best.estimate.fraction
            ));
        }
    }
    out.write("summary.txt", &summary)?;

    write_manifest(
        out,
        "sweep",
        p.seed,
        json!({
            "sizes": p.sizes, "steps": p.steps, "sigmas": p.sigmas, "batch": p.batch,
        }),
    )?;
    Ok(EXIT_OK)
}

pub struct ConfigsParams {
    pub chiplet: usize,
    pub dims: Vec<(usize, usize)>,
    pub batch: usize,
    pub sigma: f64,
    pub seed: u64,
}

pub fn run_configs(out: &OutputDir, p: &ConfigsParams) -> Result<i32> {
    validate_batch(p.batch)?;
    let spec = chiplet_spec(p.chiplet)?;
    let topo = Arc::new(build_chiplet(&spec));
    let plan = plan_with(p.sigma);
    let est = estimate_yield(&topo, &plan, p.batch, p.seed)?;
    let available = est.collision_free as u64;

    let mut csv = Csv::new(
        "chiplet,rows,cols,slots,total_qubits,batch,available,configurations_log10,mcm_upper_bound,configurations",
    );
    let mut curve = Csv::new("total_qubits,configurations_log10");
    for &(rows, cols) in &p.dims {
        let spec = mcm_spec(p.chiplet, rows, cols)?;
        let slots = spec.slots() as u64;
        let (count, log10) = config_count(available, slots);
        let upper = available / slots;
        csv.row(&[
            p.chiplet.to_string(),
            rows.to_string(),
            cols.to_string(),
            slots.to_string(),
            spec.total_qubits().to_string(),
            p.batch.to_string(),
            available.to_string(),
            f(log10),
            upper.to_string(),
            count.to_string(),
        ]);
        curve.row(&[spec.total_qubits().to_string(), f(log10)]);
    }
    out.write("configs.csv", &csv.finish())?;
    out.write("configs_curve.csv", &curve.finish())?;
    out.write(
        "summary.txt",
        &format!(
            "configuration counts\nchiplet {}q yield {}/{} ({:.4})\n",
            p.chiplet, est.collision_free, p.batch, est.fraction
        ),
    )?;
    write_manifest(
        out,
        "configs",
        p.seed,
        json!({
            "chiplet": p.chiplet,
            "dims": p.dims.iter().map(|(k, m)| format!("{k}x{m}")).collect::<Vec<_>>(),
            "batch": p.batch, "sigma": p.sigma,
        }),
    )?;
    Ok(EXIT_OK)
}

pub struct AssembleParams {
    pub chiplet: usize,
    pub dims: (usize, usize),
    pub batch: usize,
    pub sigma: f64,
    pub ratio: f64,
    pub max_reconfig: u32,
    pub export_mcms: Option<usize>,
    pub bond_sensitivity: bool,
    pub calib: CalibSource,
    pub seed: u64,
}

pub fn run_assemble(out: &OutputDir, p: &AssembleParams) -> Result<i32> {
    validate_batch(p.batch)?;
    let (rows, cols) = p.dims;
    let spec = mcm_spec(p.chiplet, rows, cols)?;
    let plan = plan_with(p.sigma);
    let (bins, calib_record) = p.calib.load(p.seed)?;
    let link = LinkNoiseConfig::new(p.ratio)?;

    let fab_seed = child_seed(p.seed, 0);
    let mono_seed = child_seed(p.seed, 1);
    let chip_topo = Arc::new(build_chiplet(&spec.chiplet));
    let devices = fabricate_collision_free(&chip_topo, &plan, p.batch, fab_seed)?;
    let noised = devices
        .into_iter()
        .map(|d| assign_device_noise(d, &bins, &link, fab_seed))
        .collect::<qmcm_core::Result<Vec<_>>>()?;
    let bin = rank_chiplets(noised, p.batch)?;
    let bin_size = bin.len();

    let bond = if p.bond_sensitivity { BondModel::default().sensitivity_x100() } else { BondModel::default() };
    let asm = assemble_batch(bin, &spec, &plan.thresholds, p.max_reconfig, fab_seed, &bond)?;
    let alt_bond = if p.bond_sensitivity { BondModel::default() } else { BondModel::default().sensitivity_x100() };
    let alt_factor = alt_bond.factor(asm.link_qubit_total);

    let mono_topo = Arc::new(build_monolithic(&spec.chiplet, rows, cols));
    let mono = estimate_yield(&mono_topo, &plan, p.batch, mono_seed)?;

    let mut csv = Csv::new(
        "chiplet,rows,cols,total_qubits,batch,bin_size,mcms,chiplets_used,leftovers,failed_windows,\
         link_qubits,bond_yield_factor,post_assembly_yield,bond_yield_factor_x100,post_assembly_yield_x100,\
         mono_collision_free,mono_yield",
    );
    let used_fraction = asm.chiplets_used as f64 / p.batch as f64;
    let (factor, factor_x100) =
        if p.bond_sensitivity { (alt_factor, asm.bond_yield_factor) } else { (asm.bond_yield_factor, alt_factor) };
    csv.row(&[
        p.chiplet.to_string(),
        rows.to_string(),
        cols.to_string(),
        spec.total_qubits().to_string(),
        p.batch.to_string(),
        bin_size.to_string(),
        asm.mcms.len().to_string(),
        asm.chiplets_used.to_string(),
        asm.leftovers.to_string(),
        asm.failed_windows.to_string(),
        asm.link_qubit_total.to_string(),
        f(factor),
        f(used_fraction * factor),
        f(factor_x100),
        f(used_fraction * factor_x100),
        mono.collision_free.to_string(),
        f(mono.fraction),
    ]);
    out.write("assembly.csv", &csv.finish())?;

    let mut hist = Csv::new("reconfigs,windows");
    for (reconfigs, count) in &asm.reconfig_histogram {
        hist.row(&[reconfigs.to_string(), count.to_string()]);
    }
    out.write("reconfig_histogram.csv", &hist.finish())?;

    let export = p.export_mcms.unwrap_or(usize::MAX).min(asm.mcms.len());
    for (i, device) in asm.mcms[..export].iter().enumerate() {
        let device = assign_link_noise(device.clone(), &bins, &link, fab_seed)?;
        out.write(&format!("mcm_{i:04}.device"), &io::device_to_string(&device))?;
    }

    out.write(
        "summary.txt",
        &format!(
            "assembly of {}q MCMs ({rows}x{cols} of {}q chiplets)\n\
             bin {bin_size}/{} collision-free chiplets; {} MCMs assembled, {} chiplets stranded\n\
             post-assembly yield {:.4} (bond factor {:.6}); monolithic yield {:.4}\n",
            spec.total_qubits(),
            p.chiplet,
            p.batch,
            asm.mcms.len(),
            asm.leftovers,
            used_fraction * asm.bond_yield_factor,
            asm.bond_yield_factor,
            mono.fraction
        ),
    )?;

    write_manifest(
        out,
        "assemble",
        p.seed,
        json!({
            "chiplet": p.chiplet, "dims": format!("{rows}x{cols}"), "batch": p.batch,
            "sigma": p.sigma, "ratio": p.ratio, "max_reconfig": p.max_reconfig,
            "bond_sensitivity": p.bond_sensitivity, "export_mcms": p.export_mcms,
            "calibration": calib_record,
        }),
    )?;
    Ok(EXIT_OK)
}

pub struct HeatmapParams {
    pub chiplets: Vec<usize>,
    pub dims: Vec<usize>,
    pub ratios: Vec<f64>,
    pub batch: usize,
    pub sigma: f64,
    pub max_reconfig: u32,
    pub calib: CalibSource,
    pub seed: u64,
}

pub fn run_heatmap(out: &OutputDir, p: &HeatmapParams) -> Result<i32> {
    validate_batch(p.batch)?;
    if p.chiplets.is_empty() || p.dims.is_empty() || p.ratios.is_empty() {
        return config_error("heatmap needs at least one chiplet size, dim, and ratio");
    }
    let (bins, calib_record) = p.calib.load(p.seed)?;
    let mut cfg = HeatmapConfig::new(p.chiplets.clone(), p.dims.clone(), p.ratios.clone(), p.batch, p.seed);
    cfg.plan = plan_with(p.sigma);
    cfg.max_reconfig = p.max_reconfig;
    let cells = infidelity_heatmap(&bins, &cfg)?;

    let mut long = Csv::new(
        "chiplet,dim,total_qubits,link_ratio,mono_devices,mcms_assembled,mcms_compared,mono_mean_e,mcm_mean_e,e_ratio",
    );
    for cell in &cells {
        for r in &cell.ratios {
            long.row(&[
                cell.chiplet_size.to_string(),
                cell.dim.to_string(),
                cell.total_qubits.to_string(),
                f(r.link_ratio),
                cell.mono_devices.to_string(),
                cell.mcms_assembled.to_string(),
                cell.mcms_compared.to_string(),
                cell.mono_mean_e.map_or("INFEASIBLE".into(), f),
                r.mcm_mean_e.map_or("INFEASIBLE".into(), f),
                r.e_ratio.map_or("INFEASIBLE".into(), f),
            ]);
        }
    }
    out.write("heatmap_long.csv", &long.finish())?;

    // One matrix per ratio: rows = chiplet size, cols = n x n dims.
    for &ratio in &p.ratios {
        let header = std::iter::once("chiplet".to_string())
            .chain(p.dims.iter().map(|d| format!("{d}x{d}")))
            .collect::<Vec<_>>()
            .join(",");
        let mut matrix = Csv::new(&header);
        for &size in &p.chiplets {
            let mut row = vec![size.to_string()];
            for &dim in &p.dims {
                let cell = cells.iter().find(|c| c.chiplet_size == size && c.dim == dim);
                let value = cell
                    .and_then(|c| c.ratios.iter().find(|r| r.link_ratio == ratio))
                    .map_or("SKIPPED".to_string(), |r| r.e_ratio.map_or("INFEASIBLE".into(), f));
                row.push(value);
            }
            matrix.row(&row);
        }
        out.write(&format!("heatmap_r{ratio}.csv"), &matrix.finish())?;
        for &size in &p.chiplets {
            let mut rowfile = Csv::new("total_qubits,e_ratio");
            for cell in cells.iter().filter(|c| c.chiplet_size == size) {
                if let Some(r) = cell.ratios.iter().find(|r| r.link_ratio == ratio) {
                    rowfile
                        .row(&[cell.total_qubits.to_string(), r.e_ratio.map_or("INFEASIBLE".into(), f)]);
                }
            }
            out.write(&format!("row_r{ratio}_chiplet{size}.csv"), &rowfile.finish())?;
        }
    }

    let feasible = cells.iter().flat_map(|c| &c.ratios).filter(|r| r.e_ratio.is_some()).count();
    let advantaged = cells
        .iter()
        .flat_map(|c| &c.ratios)
        .filter(|r| r.e_ratio.is_some_and(|v| v < 1.0))
        .count();
    out.write(
        "summary.txt",
        &format!(
            "infidelity heatmap: {} cells, {} ratio points feasible, {} with MCM advantage (ratio < 1)\n",
            cells.len(),
            feasible,
            advantaged
        ),
    )?;

    write_manifest(
        out,
        "heatmap",
        p.seed,
        json!({
            "chiplets": p.chiplets, "dims": p.dims, "ratios": p.ratios, "batch": p.batch,
            "sigma": p.sigma, "max_reconfig": p.max_reconfig, "calibration": calib_record,
        }),
    )?;
    Ok(EXIT_OK)
}

pub struct BenchParams {
    pub families: Vec<BenchFamily>,
    pub chiplet: usize,
    pub dims: (usize, usize),
    pub ratio: f64,
    pub batch: usize,
    pub sigma: f64,
    pub max_reconfig: u32,
    pub calib: CalibSource,
    pub seed: u64,
}

pub fn run_bench(out: &OutputDir, p: &BenchParams) -> Result<i32> {
    validate_batch(p.batch)?;
    let (rows, cols) = p.dims;
    let spec = mcm_spec(p.chiplet, rows, cols)?;
    let (bins, calib_record) = p.calib.load(p.seed)?;

    let mut csv = Csv::new(
        "family,chiplet,rows,cols,total_qubits,logical_qubits,routed_2q,mono_devices,mcms_compared,\
         mono_mean_fidelity,mcm_mean_fidelity,fidelity_ratio",
    );
    let mut any_feasible = false;
    let mut summary = String::from("benchmark fidelity comparison\n");
    for &family in &p.families {
        let cfg = CompareConfig {
            family,
            spec,
            link_ratio: p.ratio,
            plan: plan_with(p.sigma),
            batch: p.batch,
            seed: p.seed,
            max_reconfig: p.max_reconfig,
        };
        let outcome = compare_architectures(&bins, &cfg)?;
        any_feasible |= !outcome.is_infeasible();
        csv.row(&[
            family.to_string(),
            outcome.chiplet_size.to_string(),
            outcome.rows.to_string(),
            outcome.cols.to_string(),
            outcome.total_qubits.to_string(),
            outcome.logical_qubits.to_string(),
            outcome.routed_two_qubit_gates.to_string(),
            outcome.mono_devices.to_string(),
            outcome.mcms_compared.to_string(),
            outcome.mono_mean_fidelity.map_or("INFEASIBLE".into(), f),
            outcome.mcm_mean_fidelity.map_or("INFEASIBLE".into(), f),
            outcome.fidelity_ratio.map_or("INFEASIBLE".into(), f),
        ]);
        summary.push_str(&format!(
            "{family}: {}\n",
            outcome
                .fidelity_ratio
                .map_or("monolithic infeasible".to_string(), |r| format!("F(MCM)/F(mono) = {r:.4}"))
        ));
    }
    out.write("bench.csv", &csv.finish())?;
    out.write("summary.txt", &summary)?;
    write_manifest(
        out,
        "bench",
        p.seed,
        json!({
            "families": p.families.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            "chiplet": p.chiplet, "dims": format!("{rows}x{cols}"), "ratio": p.ratio,
            "batch": p.batch, "sigma": p.sigma, "max_reconfig": p.max_reconfig,
            "calibration": calib_record,
        }),
    )?;
    Ok(if any_feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

pub struct IngestCalibParams {
    pub snapshot: PathBuf,
    pub seed: u64,
}

pub fn run_ingest_calib(out: &OutputDir, p: &IngestCalibParams) -> Result<i32> {
    let snapshot = io::load_snapshot(&p.snapshot)
        .with_context(|| format!("loading snapshot {}", p.snapshot.display()))?;
    let bins = qmcm_core::noise::ingest_calibration(&snapshot)?;
    write_bins_outputs(out, &bins)?;
    write_manifest(
        out,
        "ingest-calib",
        p.seed,
        json!({ "snapshot": p.snapshot.display().to_string() }),
    )?;
    Ok(EXIT_OK)
}

pub struct SynthCalibParams {
    pub median: f64,
    pub mean: f64,
    pub edges: usize,
    pub seed: u64,
}

pub fn run_synth_calib(out: &OutputDir, p: &SynthCalibParams) -> Result<i32> {
    let bins = synth_calibration(p.median, p.mean, p.edges, p.seed)?;
    write_bins_outputs(out, &bins)?;
    write_manifest(
        out,
        "synth-calib",
        p.seed,
        json!({ "median": p.median, "mean": p.mean, "edges": p.edges }),
    )?;
    Ok(EXIT_OK)
}

fn write_bins_outputs(out: &OutputDir, bins: &DetuningBins) -> Result<()> {
    out.write("bins.json", &io::bins_to_json(bins)?)?;
    let summary = bins.summary();
    let mut text = format!(
        "detuning-binned infidelity model\nsamples {} median {} mean {}\n",
        bins.total_samples(),
        summary.median,
        summary.mean
    );
    for (idx, samples) in bins.bins() {
        let lo = *idx as f64 * bins.bin_width_ghz();
        text.push_str(&format!(
            "bin [{:.1}, {:.1}) GHz: {} samples\n",
            lo,
            lo + bins.bin_width_ghz(),
            samples.len()
        ));
    }
    out.write("calib_summary.txt", &text)?;
    Ok(())
}

pub struct TopologyParams {
    pub chiplet: usize,
    pub dims: (usize, usize),
    pub monolithic: bool,
    pub seed: u64,
}

pub fn run_topology(out: &OutputDir, p: &TopologyParams) -> Result<i32> {
    let (rows, cols) = p.dims;
    let topo = if p.monolithic {
        build_monolithic(&chiplet_spec(p.chiplet)?, rows, cols)
    } else {
        stitch_mcm(&mcm_spec(p.chiplet, rows, cols)?)
    };
    let violations = validate_frequency_pattern(&topo);
    out.write("topology.txt", &io::topology_to_string(&topo))?;
    let mut summary = format!(
        "{} topology: {} qubits, {} edges, {} link edges, {} violations\n",
        if p.monolithic { "monolithic" } else { "MCM" },
        topo.qubit_count(),
        topo.edges().len(),
        topo.link_edges().count(),
        violations.len()
    );
    for v in &violations {
        summary.push_str(&format!("violation: {v}\n"));
    }
    out.write("summary.txt", &summary)?;
    write_manifest(
        out,
        "topology",
        p.seed,
        json!({
            "chiplet": p.chiplet, "dims": format!("{rows}x{cols}"), "monolithic": p.monolithic,
        }),
    )?;
    Ok(EXIT_OK)
}
