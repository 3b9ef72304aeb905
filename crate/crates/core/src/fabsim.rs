//! Fabrication-variation sampling and Monte Carlo yield estimation.

use std::sync::Arc;

use num_bigint::BigUint;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::{CollisionThresholds, DeviceChecker};
use crate::error::Error;
use crate::lattice::{self, FrequencyClass, Topology};
use crate::seeds::{stream_rng, Domain};
use crate::Result;

/// Ideal frequency targets, fabrication spread, and collision windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPlan {
    pub f0_ghz: f64,
    pub f1_ghz: f64,
    pub f2_ghz: f64,
    pub sigma_f_ghz: f64,
    pub alpha_ghz: f64,
    pub thresholds: CollisionThresholds,
}

impl Default for FrequencyPlan {
    fn default() -> Self {
        FrequencyPlan {
            f0_ghz: 5.00,
            f1_ghz: 5.06,
            f2_ghz: 5.12,
            sigma_f_ghz: 0.014,
            alpha_ghz: -0.330,
            thresholds: CollisionThresholds::default(),
        }
    }
}

impl FrequencyPlan {
    /// Equal spacing `F1 - F0 = F2 - F1 = step` above `F0 = 5 GHz`.
    pub fn with_step(step_ghz: f64) -> FrequencyPlan {
        FrequencyPlan {
            f1_ghz: 5.00 + step_ghz,
            f2_ghz: 5.00 + 2.0 * step_ghz,
            ..FrequencyPlan::default()
        }
    }

    pub fn with_sigma(mut self, sigma_f_ghz: f64) -> FrequencyPlan {
        self.sigma_f_ghz = sigma_f_ghz;
        self
    }

    pub fn ideal(&self, class: FrequencyClass) -> f64 {
        match class {
            FrequencyClass::F0 => self.f0_ghz,
            FrequencyClass::F1 => self.f1_ghz,
            FrequencyClass::F2 => self.f2_ghz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f0_ghz < self.f1_ghz && self.f1_ghz < self.f2_ghz) {
            return Err(Error::InvalidTopology("frequency targets must satisfy F0 < F1 < F2".into()));
        }
        if self.sigma_f_ghz < 0.0 || !self.sigma_f_ghz.is_finite() {
            return Err(Error::InvalidTopology("sigma_f must be non-negative".into()));
        }
        if self.alpha_ghz >= 0.0 || !self.alpha_ghz.is_finite() {
            return Err(Error::InvalidTopology("anharmonicity must be negative".into()));
        }
        self.thresholds.validate()
    }
}

/// How a device's random draws were derived, for manifests and replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedLineage {
    pub master_seed: u64,
    pub trial: u32,
    pub noise_seed: Option<u64>,
}

/// A topology with sampled per-qubit frequencies and optional per-edge
/// infidelities.
#[derive(Debug, Clone)]
pub struct DeviceInstance {
    topology: Arc<Topology>,
    freq_ghz: Vec<f64>,
    /// Parallel to `topology.edges()`; `None` entries have no noise yet.
    edge_infidelity: Vec<Option<f64>>,
    alpha_ghz: f64,
    lineage: SeedLineage,
}

impl DeviceInstance {
    /// Wrap explicit frequencies; used by tests, imports, and the demo.
    pub fn with_frequencies(topology: Arc<Topology>, freq_ghz: Vec<f64>, alpha_ghz: f64) -> Result<DeviceInstance> {
        if freq_ghz.len() != topology.qubit_count() {
            return Err(Error::MissingFrequency(freq_ghz.len() as u32));
        }
        let d = DeviceInstance {
            topology,
            freq_ghz,
            edge_infidelity: Vec::new(),
            alpha_ghz,
            lineage: SeedLineage { master_seed: 0, trial: 0, noise_seed: None },
        };
        d.validate_frequencies()?;
        Ok(d)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn topology_arc(&self) -> &Arc<Topology> {
        &self.topology
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.freq_ghz
    }

    pub fn frequency(&self, q: u32) -> f64 {
        self.freq_ghz[q as usize]
    }

    pub fn alpha_ghz(&self) -> f64 {
        self.alpha_ghz
    }

    pub fn trial_index(&self) -> u32 {
        self.lineage.trial
    }

    pub fn lineage(&self) -> SeedLineage {
        self.lineage
    }

    /// Per-edge infidelities parallel to `topology().edges()`; empty until
    /// noise assignment.
    pub fn edge_infidelities(&self) -> &[Option<f64>] {
        &self.edge_infidelity
    }

    pub fn has_full_noise(&self) -> bool {
        !self.edge_infidelity.is_empty() && self.edge_infidelity.iter().all(|e| e.is_some())
    }

    pub fn validate_frequencies(&self) -> Result<()> {
        if self.freq_ghz.len() != self.topology.qubit_count() {
            return Err(Error::MissingFrequency(self.freq_ghz.len() as u32));
        }
        for (q, f) in self.freq_ghz.iter().enumerate() {
            if !f.is_finite() {
                return Err(Error::MissingFrequency(q as u32));
            }
        }
        Ok(())
    }

    pub(crate) fn new_raw(
        topology: Arc<Topology>,
        freq_ghz: Vec<f64>,
        edge_infidelity: Vec<Option<f64>>,
        alpha_ghz: f64,
        lineage: SeedLineage,
    ) -> DeviceInstance {
        DeviceInstance { topology, freq_ghz, edge_infidelity, alpha_ghz, lineage }
    }

    pub(crate) fn set_edge_infidelity(&mut self, values: Vec<Option<f64>>) {
        debug_assert_eq!(values.len(), self.topology.edges().len());
        self.edge_infidelity = values;
    }

    pub(crate) fn set_noise_seed(&mut self, seed: u64) {
        self.lineage.noise_seed = Some(seed);
    }
}

/// Write sampled frequencies for `(master_seed, trial)` into `out`.
///
/// Each qubit draws from its own counter-addressed stream, so the map is
/// independent of evaluation order and worker count.
fn sample_into(t: &Topology, plan: &FrequencyPlan, master_seed: u64, trial: u32, out: &mut Vec<f64>) {
    out.clear();
    if plan.sigma_f_ghz == 0.0 {
        out.extend((0..t.qubit_count() as u32).map(|q| plan.ideal(t.class_of(q))));
        return;
    }
    let normal = Normal::new(0.0, plan.sigma_f_ghz).expect("validated sigma");
    for q in 0..t.qubit_count() as u32 {
        let mut rng = stream_rng(master_seed, Domain::Frequency, trial as u64, q as u64);
        out.push(plan.ideal(t.class_of(q)) + normal.sample(&mut rng));
    }
}

/// Sample one fabricated device.
pub fn sample_frequencies(
    topology: &Arc<Topology>,
    plan: &FrequencyPlan,
    master_seed: u64,
    trial: u32,
) -> DeviceInstance {
    let mut freq = Vec::with_capacity(topology.qubit_count());
    sample_into(topology, plan, master_seed, trial, &mut freq);
    DeviceInstance {
        topology: Arc::clone(topology),
        freq_ghz: freq,
        edge_infidelity: Vec::new(),
        alpha_ghz: plan.alpha_ghz,
        lineage: SeedLineage { master_seed, trial, noise_seed: None },
    }
}

/// Collision-free fraction of a Monte Carlo batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldEstimate {
    pub qubits: usize,
    pub batch: usize,
    pub collision_free: usize,
    pub fraction: f64,
    /// 95% half-width from the normal approximation to the binomial.
    pub ci95: f64,
}

impl YieldEstimate {
    fn from_count(qubits: usize, batch: usize, collision_free: usize) -> YieldEstimate {
        let p = collision_free as f64 / batch as f64;
        let ci95 = 1.96 * (p * (1.0 - p) / batch as f64).sqrt();
        YieldEstimate { qubits, batch, collision_free, fraction: p, ci95 }
    }
}

/// Fraction of `batch` sampled devices that pass all seven criteria.
/// Deterministic for a seed regardless of worker count.
pub fn estimate_yield(topology: &Arc<Topology>, plan: &FrequencyPlan, batch: usize, seed: u64) -> Result<YieldEstimate> {
    plan.validate()?;
    let checker = DeviceChecker::new(topology);
    let collision_free = (0..batch as u32)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(topology.qubit_count()),
            |buf, trial| {
                sample_into(topology, plan, seed, trial, buf);
                checker.is_collision_free(buf, plan.alpha_ghz, &plan.thresholds) as usize
            },
        )
        .sum();
    Ok(YieldEstimate::from_count(topology.qubit_count(), batch, collision_free))
}

/// Sample `batch` devices and keep the collision-free ones, in trial order.
pub fn fabricate_collision_free(
    topology: &Arc<Topology>,
    plan: &FrequencyPlan,
    batch: usize,
    seed: u64,
) -> Result<Vec<DeviceInstance>> {
    plan.validate()?;
    let checker = DeviceChecker::new(topology);
    Ok((0..batch as u32)
        .into_par_iter()
        .filter_map(|trial| {
            let d = sample_frequencies(topology, plan, seed, trial);
            checker
                .is_collision_free(d.frequencies(), plan.alpha_ghz, &plan.thresholds)
                .then_some(d)
        })
        .collect())
}

/// One point of a detuning sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub qubits: usize,
    pub chiplet_size: usize,
    pub rows: usize,
    pub cols: usize,
    pub step_ghz: f64,
    pub sigma_ghz: f64,
    pub estimate: YieldEstimate,
}

/// Yield over the (size, step, sigma) grid with `F1 = F0 + step` and
/// `F2 = F0 + 2 step`. All cells share the master seed, so step and sigma
/// comparisons are paired on common normal deviates.
pub fn detuning_sweep(
    sizes: &[usize],
    steps_ghz: &[f64],
    sigmas_ghz: &[f64],
    batch: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if steps_ghz.is_empty() || sigmas_ghz.is_empty() {
        return Err(Error::InvalidTopology("sweep needs at least one step and one sigma".into()));
    }
    let mut out = Vec::new();
    for &size in sizes {
        let (spec, rows, cols) = lattice::monolithic_dims_for(size)?;
        let topology = Arc::new(lattice::build_monolithic(&spec, rows, cols));
        for &step in steps_ghz {
            for &sigma in sigmas_ghz {
                let plan = FrequencyPlan::with_step(step).with_sigma(sigma);
                let estimate = estimate_yield(&topology, &plan, batch, seed)?;
                out.push(SweepPoint {
                    qubits: size,
                    chiplet_size: spec.size(),
                    rows,
                    cols,
                    step_ghz: step,
                    sigma_ghz: sigma,
                    estimate,
                });
            }
        }
    }
    Ok(out)
}

/// Upper bound on assembled MCMs from one wafer's worth of chiplets:
/// `floor(Y_c * (B * q_m / q_c) / (k * m))`.
pub fn mcm_output_upper_bound(y_c: f64, batch: usize, q_m: usize, q_c: usize, k: usize, m: usize) -> Result<u64> {
    if q_c == 0 || k * m == 0 {
        return Err(Error::ZeroDenominator { q_c, slots: k * m });
    }
    let chiplets = batch as f64 * q_m as f64 / q_c as f64;
    Ok((y_c * chiplets / (k * m) as f64).floor() as u64)
}

/// Ordered placements of `slots` chiplets out of `available`:
/// `available! / (available - slots)!`, with its log10.
pub fn config_count(available: u64, slots: u64) -> (BigUint, f64) {
    if slots > available {
        return (BigUint::from(0u32), f64::NEG_INFINITY);
    }
    let mut count = BigUint::from(1u32);
    let mut log10 = 0.0;
    for i in 0..slots {
        let factor = available - i;
        count *= factor;
        log10 += (factor as f64).log10();
    }
    (count, log10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chiplet, ChipletSpec};

    fn chiplet(size: usize) -> Arc<Topology> {
        Arc::new(build_chiplet(&ChipletSpec::new(size).unwrap()))
    }

    #[test]
    fn zero_sigma_reproduces_ideal_frequencies() {
        let t = chiplet(20);
        let plan = FrequencyPlan::default().with_sigma(0.0);
        let d = sample_frequencies(&t, &plan, 1, 0);
        for q in 0..t.qubit_count() as u32 {
            assert_eq!(d.frequency(q), plan.ideal(t.class_of(q)));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let t = chiplet(20);
        let plan = FrequencyPlan::default();
        let a = sample_frequencies(&t, &plan, 42, 7);
        let b = sample_frequencies(&t, &plan, 42, 7);
        assert_eq!(a.frequencies(), b.frequencies());
        let c = sample_frequencies(&t, &plan, 42, 8);
        assert_ne!(a.frequencies(), c.frequencies());
    }

    #[test]
    fn sample_moments_match_plan() {
        // Law of large numbers on a single F0 qubit across trials.
        let t = chiplet(10);
        let q = (0..t.qubit_count() as u32).find(|&q| t.class_of(q) == FrequencyClass::F0).unwrap();
        let plan = FrequencyPlan::default();
        let n = 10_000;
        let samples: Vec<f64> =
            (0..n).map(|trial| sample_frequencies(&t, &plan, 5, trial).frequency(q)).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 5.00).abs() < 0.0005, "mean {mean}");
        assert!((var.sqrt() - 0.014).abs() < 0.0005, "stdev {}", var.sqrt());
    }

    #[test]
    fn zero_sigma_yield_is_one() {
        let t = chiplet(60);
        let plan = FrequencyPlan::default().with_sigma(0.0);
        let est = estimate_yield(&t, &plan, 50, 3).unwrap();
        assert_eq!(est.collision_free, 50);
        assert_eq!(est.fraction, 1.0);
    }

    #[test]
    fn single_qubit_yield_is_one_for_any_sigma() {
        use crate::lattice::Topology;
        let t = Arc::new(
            Topology::from_parts(vec![FrequencyClass::F0], vec![0], vec![]).unwrap(),
        );
        for sigma in [0.006, 0.014, 0.1323] {
            let est = estimate_yield(&t, &FrequencyPlan::default().with_sigma(sigma), 200, 9).unwrap();
            assert_eq!(est.fraction, 1.0, "sigma {sigma}");
        }
    }

    #[test]
    fn yield_worker_invariance() {
        let t = chiplet(20);
        let plan = FrequencyPlan::default();
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let eight = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let a = single.install(|| estimate_yield(&t, &plan, 2_000, 11).unwrap());
        let b = eight.install(|| estimate_yield(&t, &plan, 2_000, 11).unwrap());
        assert_eq!(a.collision_free, b.collision_free);
    }

    #[test]
    fn yield_monotone_in_sigma_and_size() {
        let plan = |sigma| FrequencyPlan::default().with_sigma(sigma);
        let t20 = chiplet(20);
        let batch = 10_000;
        let tight = estimate_yield(&t20, &plan(0.006), batch, 21).unwrap();
        let mid = estimate_yield(&t20, &plan(0.014), batch, 21).unwrap();
        let loose = estimate_yield(&t20, &plan(0.1323), batch, 21).unwrap();
        // 3-sigma binomial slack.
        let slack = 3.0 * (0.25f64 / batch as f64).sqrt();
        assert!(tight.fraction + slack >= mid.fraction);
        assert!(mid.fraction + slack >= loose.fraction);

        let t90 = chiplet(90);
        let small = estimate_yield(&t20, &plan(0.014), batch, 22).unwrap();
        let large = estimate_yield(&t90, &plan(0.014), batch, 22).unwrap();
        assert!(small.fraction + slack >= large.fraction);
    }

    #[test]
    fn upper_bound_matches_worked_example() {
        assert_eq!(mcm_output_upper_bound(0.85, 1000, 100, 10, 2, 5).unwrap(), 850);
        assert_eq!(mcm_output_upper_bound(1.0, 777, 90, 90, 1, 1).unwrap(), 777);
        assert!(mcm_output_upper_bound(0.5, 10, 10, 0, 1, 1).is_err());
    }

    #[test]
    fn config_count_matches_direct_products() {
        let (c, _) = config_count(3, 2);
        assert_eq!(c, BigUint::from(6u32));
        let (c, log10) = config_count(69_421, 4);
        let expect = BigUint::from(69_421u64)
            * BigUint::from(69_420u64)
            * BigUint::from(69_419u64)
            * BigUint::from(69_418u64);
        assert_eq!(c, expect);
        assert!((log10 - 19.37).abs() < 0.01, "log10 {log10}");
        let (c, log10) = config_count(5, 6);
        assert_eq!(c, BigUint::from(0u32));
        assert!(log10.is_infinite() && log10 < 0.0);
    }
}
