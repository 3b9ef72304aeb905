//! Empirical detuning-binned infidelity model.
//!
//! Calibration snapshots map each coupled pair's averaged two-qubit gate
//! infidelity to the bin of its qubit-qubit detuning. Devices then get edge
//! infidelities by resampling from the bin matching each edge's realized
//! detuning; inter-chip link edges take a ratio-scaled draw.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_batch, rank_chiplets, BondModel};
use crate::error::Error;
use crate::fabsim::{fabricate_collision_free, DeviceInstance, FrequencyPlan};
use crate::lattice::{build_chiplet, build_monolithic, ChipletSpec, McmSpec, DEFAULT_MCM_QUBIT_CAP};
use crate::seeds::{child_seed, stream_rng, Domain};
use crate::Result;

pub const DEFAULT_BIN_WIDTH_GHZ: f64 = 0.1;

/// Realized per-qubit frequency and per-edge infidelity series, one value
/// per calibration cycle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationSnapshot {
    pub qubits: Vec<CalQubit>,
    pub gates: Vec<CalGate>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalQubit {
    pub id: u32,
    pub frequency_ghz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalGate {
    pub pair: (u32, u32),
    pub infidelity: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub median: f64,
    pub mean: f64,
}

/// Infidelity samples keyed by detuning bin index `floor(|df| / width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetuningBins {
    bin_width_ghz: f64,
    bins: BTreeMap<u32, Vec<f64>>,
    summary: BinSummary,
}

impl DetuningBins {
    /// Rebuild from raw parts (as read from a bins file); recomputes the
    /// summary.
    pub fn from_raw(bin_width_ghz: f64, bins: BTreeMap<u32, Vec<f64>>) -> Result<DetuningBins> {
        if !(bin_width_ghz > 0.0) || !bin_width_ghz.is_finite() {
            return Err(Error::Calibration("bin width must be positive".into()));
        }
        let mut all: Vec<f64> = bins.values().flatten().copied().collect();
        if all.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::Calibration("infidelity sample outside [0, 1]".into()));
        }
        if all.is_empty() {
            return Err(Error::EmptyBins);
        }
        all.sort_by(|a, b| a.total_cmp(b));
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        let median = if all.len() % 2 == 1 {
            all[all.len() / 2]
        } else {
            (all[all.len() / 2 - 1] + all[all.len() / 2]) / 2.0
        };
        Ok(DetuningBins { bin_width_ghz, bins, summary: BinSummary { median, mean } })
    }

    pub fn bin_width_ghz(&self) -> f64 {
        self.bin_width_ghz
    }

    pub fn bins(&self) -> &BTreeMap<u32, Vec<f64>> {
        &self.bins
    }

    pub fn summary(&self) -> BinSummary {
        self.summary
    }

    pub fn total_samples(&self) -> usize {
        self.bins.values().map(Vec::len).sum()
    }

    pub fn bin_index(&self, detuning_ghz: f64) -> u32 {
        (detuning_ghz.abs() / self.bin_width_ghz) as u32
    }

    /// Bin to draw from for a detuning: its own bin when populated, else the
    /// nearest populated bin, preferring the lower index on ties.
    fn source_bin(&self, detuning_ghz: f64) -> &[f64] {
        let idx = self.bin_index(detuning_ghz);
        if let Some(samples) = self.bins.get(&idx) {
            if !samples.is_empty() {
                return samples;
            }
        }
        let mut best: Option<(u32, u32)> = None; // (distance, index)
        for (&i, samples) in &self.bins {
            if samples.is_empty() {
                continue;
            }
            let dist = i.abs_diff(idx);
            if best.is_none_or(|(d, j)| (dist, i) < (d, j)) {
                best = Some((dist, i));
            }
        }
        let (_, i) = best.expect("nonempty bins enforced at construction");
        &self.bins[&i]
    }
}

/// Average each gate's infidelity across cycles and bin it by the detuning
/// of its endpoints.
pub fn ingest_calibration(snapshot: &CalibrationSnapshot) -> Result<DetuningBins> {
    let mut freq: BTreeMap<u32, f64> = BTreeMap::new();
    for q in &snapshot.qubits {
        if !q.frequency_ghz.is_finite() {
            return Err(Error::Calibration(format!("qubit {} has a non-finite frequency", q.id)));
        }
        if freq.insert(q.id, q.frequency_ghz).is_some() {
            return Err(Error::Calibration(format!("qubit {} declared twice", q.id)));
        }
    }
    if snapshot.gates.is_empty() {
        return Err(Error::Calibration("snapshot has no gates".into()));
    }
    let mut bins: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for gate in &snapshot.gates {
        let (a, b) = gate.pair;
        let (fa, fb) = match (freq.get(&a), freq.get(&b)) {
            (Some(&fa), Some(&fb)) => (fa, fb),
            _ => {
                return Err(Error::Calibration(format!(
                    "gate ({a}, {b}) references an undeclared qubit"
                )))
            }
        };
        if gate.infidelity.is_empty() {
            return Err(Error::Calibration(format!("gate ({a}, {b}) has no cycles")));
        }
        if gate.infidelity.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::Calibration(format!(
                "gate ({a}, {b}) has an infidelity outside [0, 1]"
            )));
        }
        let mean = gate.infidelity.iter().sum::<f64>() / gate.infidelity.len() as f64;
        let idx = ((fa - fb).abs() / DEFAULT_BIN_WIDTH_GHZ) as u32;
        bins.entry(idx).or_default().push(mean);
    }
    DetuningBins::from_raw(DEFAULT_BIN_WIDTH_GHZ, bins)
}

/// Synthesize a calibration model when no snapshot is available: moment-
/// matched log-normal samples spread uniformly over detunings in [0, 0.4)
/// GHz. The realized mean is rescaled onto the target; the realized median
/// must land within 5% of its target.
pub fn synth_calibration(target_median: f64, target_mean: f64, edges: usize, seed: u64) -> Result<DetuningBins> {
    if !(target_median > 0.0 && target_median <= target_mean && target_mean < 1.0) {
        return Err(Error::InfeasibleTargets(format!(
            "need 0 < median <= mean < 1, got median {target_median}, mean {target_mean}"
        )));
    }
    if edges == 0 {
        return Err(Error::InfeasibleTargets("need at least one edge".into()));
    }
    // Log-normal with median exp(mu) and mean exp(mu + sigma^2 / 2).
    let mu = target_median.ln();
    let sigma = (2.0 * (target_mean / target_median).ln()).sqrt();
    let mut rng = stream_rng(seed, Domain::Synthesis, 0, 0);
    let mut values = Vec::with_capacity(edges);
    let mut detunings = Vec::with_capacity(edges);
    if sigma == 0.0 {
        for _ in 0..edges {
            values.push(target_median);
            detunings.push(rng.random_range(0.0..0.4));
        }
    } else {
        let dist = LogNormal::new(mu, sigma)
            .map_err(|e| Error::InfeasibleTargets(format!("log-normal: {e}")))?;
        for _ in 0..edges {
            let mut v = dist.sample(&mut rng);
            while v >= 1.0 {
                v = dist.sample(&mut rng);
            }
            values.push(v);
            detunings.push(rng.random_range(0.0..0.4));
        }
    }
    let realized_mean = values.iter().sum::<f64>() / edges as f64;
    let scale = target_mean / realized_mean;
    let mut bins: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (v, d) in values.iter().zip(&detunings) {
        let scaled = (v * scale).min(0.999_999);
        bins.entry((d / DEFAULT_BIN_WIDTH_GHZ) as u32).or_default().push(scaled);
    }
    let built = DetuningBins::from_raw(DEFAULT_BIN_WIDTH_GHZ, bins)?;
    let realized = built.summary();
    if (realized.median - target_median).abs() > 0.05 * target_median {
        return Err(Error::InfeasibleTargets(format!(
            "realized median {:.5} misses target {target_median} by more than 5%; try more edges or another seed",
            realized.median
        )));
    }
    Ok(built)
}

/// One draw from the bin containing `|detuning|` (nearest populated bin as a
/// fallback), using the caller's seed-path RNG.
pub fn sample_edge_infidelity<R: Rng>(bins: &DetuningBins, detuning_ghz: f64, rng: &mut R) -> f64 {
    let samples = bins.source_bin(detuning_ghz);
    samples[rng.random_range(0..samples.len())]
}

/// Link vs on-chip infidelity ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkNoiseConfig {
    pub ratio: f64,
}

impl Default for LinkNoiseConfig {
    fn default() -> Self {
        // 7.5% link / 1.8% on-chip.
        LinkNoiseConfig { ratio: 4.17 }
    }
}

impl LinkNoiseConfig {
    pub fn new(ratio: f64) -> Result<LinkNoiseConfig> {
        if !(ratio > 0.0) || !ratio.is_finite() {
            return Err(Error::Calibration("link ratio must be positive".into()));
        }
        Ok(LinkNoiseConfig { ratio })
    }
}

fn edge_draw(
    d: &DeviceInstance,
    bins: &DetuningBins,
    link: &LinkNoiseConfig,
    seed: u64,
    edge_idx: usize,
) -> f64 {
    let e = &d.topology().edges()[edge_idx];
    let detuning = d.frequency(e.a) - d.frequency(e.b);
    let mut rng = stream_rng(seed, Domain::EdgeNoise, d.trial_index() as u64, edge_idx as u64);
    let draw = sample_edge_infidelity(bins, detuning, &mut rng);
    if e.is_link {
        (link.ratio * draw).min(1.0)
    } else {
        draw
    }
}

/// Assign every edge an infidelity: on-chip edges draw from the bin of their
/// realized detuning, link edges take `ratio` times a fresh on-chip draw
/// (clipped to 1). Deterministic per `(seed, trial, edge)`.
pub fn assign_device_noise(
    mut d: DeviceInstance,
    bins: &DetuningBins,
    link: &LinkNoiseConfig,
    seed: u64,
) -> Result<DeviceInstance> {
    d.validate_frequencies()?;
    let values: Vec<Option<f64>> =
        (0..d.topology().edges().len()).map(|i| Some(edge_draw(&d, bins, link, seed, i))).collect();
    d.set_edge_infidelity(values);
    d.set_noise_seed(seed);
    Ok(d)
}

/// Fill in only the link edges, keeping chiplet-characterized on-chip values.
/// The underlying draw is independent of `ratio`, so sweeping the ratio on
/// one seed rescales the same base values.
pub fn assign_link_noise(
    mut d: DeviceInstance,
    bins: &DetuningBins,
    link: &LinkNoiseConfig,
    seed: u64,
) -> Result<DeviceInstance> {
    d.validate_frequencies()?;
    let mut values: Vec<Option<f64>> = if d.edge_infidelities().is_empty() {
        vec![None; d.topology().edges().len()]
    } else {
        d.edge_infidelities().to_vec()
    };
    for (i, e) in d.topology().edges().iter().enumerate() {
        if e.is_link {
            values[i] = Some(edge_draw(&d, bins, link, seed, i));
        }
    }
    d.set_edge_infidelity(values);
    d.set_noise_seed(seed);
    Ok(d)
}

/// Mean two-qubit gate infidelity over every coupled pair of the device.
pub fn avg_infidelity(d: &DeviceInstance) -> Result<f64> {
    let edges = d.topology().edges();
    if edges.is_empty() {
        return Err(Error::NoEdges);
    }
    if d.edge_infidelities().len() != edges.len() {
        return Err(Error::MissingNoise);
    }
    let mut sum = 0.0;
    for value in d.edge_infidelities() {
        sum += value.ok_or(Error::MissingNoise)?;
    }
    Ok(sum / edges.len() as f64)
}

/// Heatmap experiment parameters. The monolithic arm samples `batch`
/// devices; the chiplet arm samples `batch * dim^2` chiplets (equal wafer
/// area).
#[derive(Debug, Clone)]
pub struct HeatmapConfig {
    pub chiplet_sizes: Vec<usize>,
    pub square_dims: Vec<usize>,
    pub link_ratios: Vec<f64>,
    pub plan: FrequencyPlan,
    pub batch: usize,
    pub seed: u64,
    pub max_reconfig: u32,
    pub qubit_cap: usize,
}

impl HeatmapConfig {
    pub fn new(
        chiplet_sizes: Vec<usize>,
        square_dims: Vec<usize>,
        link_ratios: Vec<f64>,
        batch: usize,
        seed: u64,
    ) -> Self {
        HeatmapConfig {
            chiplet_sizes,
            square_dims,
            link_ratios,
            plan: FrequencyPlan::default(),
            batch,
            seed,
            max_reconfig: 100,
            qubit_cap: DEFAULT_MCM_QUBIT_CAP,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatmapRatioResult {
    pub link_ratio: f64,
    pub mcm_mean_e: Option<f64>,
    /// `E_avg(MCM) / E_avg(monolithic)`; `None` when the monolithic arm is
    /// infeasible (zero collision-free yield).
    pub e_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub chiplet_size: usize,
    pub dim: usize,
    pub total_qubits: usize,
    pub mono_devices: usize,
    pub mcms_assembled: usize,
    /// MCMs entering the comparison: the yield relationship scales the MCM
    /// set against the monolithic one, so the best `min(mono, assembled)`
    /// MCMs are compared.
    pub mcms_compared: usize,
    pub mono_mean_e: Option<f64>,
    pub ratios: Vec<HeatmapRatioResult>,
}

/// `E_avg(MCM) / E_avg(mono)` over the (chiplet, n x n, link ratio) grid.
/// Cells whose total size exceeds the cap are skipped; cells with zero
/// monolithic yield are flagged infeasible.
pub fn infidelity_heatmap(bins: &DetuningBins, cfg: &HeatmapConfig) -> Result<Vec<HeatmapCell>> {
    cfg.plan.validate()?;
    let mut cells = Vec::new();
    for &size in &cfg.chiplet_sizes {
        let spec = ChipletSpec::new(size)?;
        for &dim in &cfg.square_dims {
            let mcm_spec = match McmSpec::with_cap(spec, dim, dim, cfg.qubit_cap) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let salt = (size * 1000 + dim) as u64;
            let mcm_seed = child_seed(cfg.seed, 2 * salt);
            let mono_seed = child_seed(cfg.seed, 2 * salt + 1);

            // Chiplet arm: fabricate, characterize, rank, assemble.
            let chip_topo = Arc::new(build_chiplet(&spec));
            let scaled_batch = cfg.batch * dim * dim;
            let chiplets = fabricate_collision_free(&chip_topo, &cfg.plan, scaled_batch, mcm_seed)?;
            let noised: Vec<DeviceInstance> = chiplets
                .into_par_iter()
                .map(|d| assign_device_noise(d, bins, &LinkNoiseConfig::default(), mcm_seed))
                .collect::<Result<_>>()?;
            let bin = rank_chiplets(noised, scaled_batch)?;
            let asm = assemble_batch(
                bin,
                &mcm_spec,
                &cfg.plan.thresholds,
                cfg.max_reconfig,
                mcm_seed,
                &BondModel::default(),
            )?;

            // Monolithic arm.
            let mono_topo = Arc::new(build_monolithic(&spec, dim, dim));
            let monos = fabricate_collision_free(&mono_topo, &cfg.plan, cfg.batch, mono_seed)?;
            let mono_es = monos
                .into_par_iter()
                .map(|d| {
                    assign_device_noise(d, bins, &LinkNoiseConfig::default(), mono_seed)
                        .and_then(|d| avg_infidelity(&d))
                })
                .collect::<Result<Vec<f64>>>()?;
            let mono_devices = mono_es.len();
            let mono_mean =
                (!mono_es.is_empty()).then(|| mono_es.iter().sum::<f64>() / mono_es.len() as f64);

            let compared = mono_devices.min(asm.mcms.len());
            let mut ratios = Vec::new();
            for &ratio in &cfg.link_ratios {
                let link = LinkNoiseConfig::new(ratio)?;
                let (mcm_mean, e_ratio) = match mono_mean {
                    Some(mono_mean) if compared > 0 => {
                        let es = asm.mcms[..compared]
                            .par_iter()
                            .map(|d| {
                                assign_link_noise(d.clone(), bins, &link, mcm_seed)
                                    .and_then(|d| avg_infidelity(&d))
                            })
                            .collect::<Result<Vec<f64>>>()?;
                        let mean = es.iter().sum::<f64>() / es.len() as f64;
                        (Some(mean), Some(mean / mono_mean))
                    }
                    _ => (None, None),
                };
                ratios.push(HeatmapRatioResult { link_ratio: ratio, mcm_mean_e: mcm_mean, e_ratio });
            }
            cells.push(HeatmapCell {
                chiplet_size: size,
                dim,
                total_qubits: mcm_spec.total_qubits(),
                mono_devices,
                mcms_assembled: asm.mcms.len(),
                mcms_compared: compared,
                mono_mean_e: mono_mean,
                ratios,
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fabsim::sample_frequencies;
    use crate::lattice::stitch_mcm;

    fn snapshot(edges: &[((u32, u32), Vec<f64>)], freqs: &[(u32, f64)]) -> CalibrationSnapshot {
        CalibrationSnapshot {
            qubits: freqs.iter().map(|&(id, f)| CalQubit { id, frequency_ghz: f }).collect(),
            gates: edges
                .iter()
                .map(|(pair, inf)| CalGate { pair: *pair, infidelity: inf.clone() })
                .collect(),
        }
    }

    #[test]
    fn ingest_averages_cycles_and_bins_by_detuning() {
        let snap = snapshot(
            &[((0, 1), vec![0.01, 0.03]), ((1, 2), vec![0.02])],
            &[(0, 5.00), (1, 5.05), (2, 5.25)],
        );
        let bins = ingest_calibration(&snap).unwrap();
        // edge (0,1): detuning 0.05 -> bin 0, sample 0.02
        // edge (1,2): detuning 0.20 -> bin 2, sample 0.02
        assert_eq!(bins.bins()[&0], vec![0.02]);
        assert_eq!(bins.bins()[&2], vec![0.02]);
        assert_eq!(bins.summary().mean, 0.02);
    }

    #[test]
    fn ingest_rejects_malformed_snapshots() {
        let empty = snapshot(&[], &[(0, 5.0)]);
        assert!(ingest_calibration(&empty).is_err());
        let dangling = snapshot(&[((0, 9), vec![0.1])], &[(0, 5.0)]);
        assert!(ingest_calibration(&dangling).is_err());
        let out_of_range = snapshot(&[((0, 1), vec![1.5])], &[(0, 5.0), (1, 5.1)]);
        assert!(ingest_calibration(&out_of_range).is_err());
    }

    #[test]
    fn ingest_summary_hits_reference_statistics() {
        // Six edges whose per-edge means have median 0.012 and mean 0.018.
        let snap = snapshot(
            &[
                ((0, 1), vec![0.008]),
                ((1, 2), vec![0.010]),
                ((2, 3), vec![0.011]),
                ((3, 4), vec![0.013]),
                ((4, 5), vec![0.016]),
                ((5, 6), vec![0.050]),
            ],
            &[(0, 5.0), (1, 5.05), (2, 5.1), (3, 5.02), (4, 5.3), (5, 5.15), (6, 5.07)],
        );
        let bins = ingest_calibration(&snap).unwrap();
        assert!((bins.summary().median - 0.012).abs() < 1e-12);
        assert!((bins.summary().mean - 0.018).abs() < 1e-12);
    }

    #[test]
    fn synth_hits_targets_within_tolerance() {
        let bins = synth_calibration(0.012, 0.018, 2000, 11).unwrap();
        let s = bins.summary();
        assert!((s.mean - 0.018).abs() < 1e-9, "mean is rescaled exactly");
        assert!((s.median - 0.012).abs() <= 0.05 * 0.012, "median {}", s.median);
        assert!(bins.bins().keys().all(|&i| i < 4), "detunings cover [0, 0.4)");
        // Different seed: different samples, same summary contract.
        let other = synth_calibration(0.012, 0.018, 2000, 12).unwrap();
        assert_ne!(bins.bins(), other.bins());
        assert!((other.summary().median - 0.012).abs() <= 0.05 * 0.012);
    }

    #[test]
    fn synth_degenerate_targets_collapse() {
        let bins = synth_calibration(0.02, 0.02, 50, 1).unwrap();
        assert!(bins.bins().values().flatten().all(|&v| (v - 0.02).abs() < 1e-12));
        assert!(synth_calibration(0.03, 0.02, 50, 1).is_err(), "median > mean is infeasible");
    }

    #[test]
    fn sampling_single_and_empty_bin_fallback() {
        let mut raw = BTreeMap::new();
        raw.insert(1u32, vec![0.017]);
        let bins = DetuningBins::from_raw(0.1, raw).unwrap();
        let mut rng = stream_rng(0, Domain::EdgeNoise, 0, 0);
        // In-bin detuning returns the lone sample; out-of-range detunings
        // fall back to the nearest populated bin.
        assert_eq!(sample_edge_infidelity(&bins, 0.15, &mut rng), 0.017);
        assert_eq!(sample_edge_infidelity(&bins, 0.39, &mut rng), 0.017);
        assert_eq!(sample_edge_infidelity(&bins, 0.0, &mut rng), 0.017);
    }

    #[test]
    fn two_sample_bin_draw_mean() {
        let mut raw = BTreeMap::new();
        raw.insert(0u32, vec![0.01, 0.03]);
        let bins = DetuningBins::from_raw(0.1, raw).unwrap();
        let n = 10_000;
        let mut sum = 0.0;
        for i in 0..n {
            let mut rng = stream_rng(3, Domain::EdgeNoise, i, 0);
            sum += sample_edge_infidelity(&bins, 0.05, &mut rng);
        }
        let mean = sum / n as f64;
        assert!((mean - 0.02).abs() < 0.001, "mean {mean}");
    }

    #[test]
    fn device_noise_assignment_and_average() {
        let spec = ChipletSpec::new(20).unwrap();
        let topo = Arc::new(build_chiplet(&spec));
        let bins = synth_calibration(0.012, 0.018, 500, 5).unwrap();
        let d = sample_frequencies(&topo, &FrequencyPlan::default(), 9, 0);
        assert!(avg_infidelity(&d).is_err(), "no noise yet");
        let d = assign_device_noise(d, &bins, &LinkNoiseConfig::default(), 77).unwrap();
        let e = avg_infidelity(&d).unwrap();
        assert!(e > 0.0 && e < 1.0);
        assert!(d.edge_infidelities().iter().all(|v| v.unwrap() <= 1.0));
        // Determinism.
        let d2 = sample_frequencies(&topo, &FrequencyPlan::default(), 9, 0);
        let d2 = assign_device_noise(d2, &bins, &LinkNoiseConfig::default(), 77).unwrap();
        assert_eq!(d.edge_infidelities(), d2.edge_infidelities());
    }

    #[test]
    fn link_scaling_matches_ratio() {
        let spec = ChipletSpec::new(10).unwrap();
        let mcm = McmSpec::new(spec, 2, 2).unwrap();
        let topo = Arc::new(stitch_mcm(&mcm));
        let bins = synth_calibration(0.012, 0.018, 2000, 5).unwrap();
        let plan = FrequencyPlan::default();
        // Mean link infidelity over many devices approaches ratio * mean.
        let mut link_sum = 0.0;
        let mut link_n = 0usize;
        for trial in 0..400 {
            let d = sample_frequencies(&topo, &plan, 13, trial);
            let d = assign_device_noise(d, &bins, &LinkNoiseConfig::default(), 21).unwrap();
            for (i, e) in d.topology().edges().iter().enumerate() {
                if e.is_link {
                    link_sum += d.edge_infidelities()[i].unwrap();
                    link_n += 1;
                }
            }
        }
        let mean = link_sum / link_n as f64;
        assert!((mean - 4.17 * 0.018).abs() < 0.005, "link mean {mean}");
    }

    #[test]
    fn ratio_one_links_match_on_chip_draws() {
        let spec = ChipletSpec::new(10).unwrap();
        let mcm = McmSpec::new(spec, 2, 2).unwrap();
        let topo = Arc::new(stitch_mcm(&mcm));
        let bins = synth_calibration(0.012, 0.018, 500, 5).unwrap();
        let d = sample_frequencies(&topo, &FrequencyPlan::default(), 1, 0);
        let d = assign_device_noise(d, &bins, &LinkNoiseConfig::new(1.0).unwrap(), 3).unwrap();
        // At ratio 1 a link edge carries exactly the base draw, so the value
        // equals what an on-chip edge at the same seed path would get.
        for (i, e) in d.topology().edges().iter().enumerate() {
            let mut rng = stream_rng(3, Domain::EdgeNoise, 0, i as u64);
            let detuning = d.frequency(e.a) - d.frequency(e.b);
            let base = sample_edge_infidelity(&bins, detuning, &mut rng);
            assert_eq!(d.edge_infidelities()[i].unwrap(), base);
        }
    }

    #[test]
    fn trivial_averages() {
        let spec = ChipletSpec::new(10).unwrap();
        let topo = Arc::new(build_chiplet(&spec));
        let mut d = sample_frequencies(&topo, &FrequencyPlan::default(), 2, 0);
        let edges = topo.edges().len();
        d.set_edge_infidelity(vec![Some(0.01); edges]);
        assert!((avg_infidelity(&d).unwrap() - 0.01).abs() < 1e-15);
        let mut vals = vec![Some(0.01); edges];
        vals[0] = Some(0.03);
        let mut d2 = sample_frequencies(&topo, &FrequencyPlan::default(), 2, 1);
        d2.set_edge_infidelity(vals);
        let expect = (0.03 + 0.01 * (edges - 1) as f64) / edges as f64;
        assert!((avg_infidelity(&d2).unwrap() - expect).abs() < 1e-15);
    }
}
