//! Known-good-die binning, sort/shuffle MCM assembly, and the bump-bond
//! assembly-yield model.
//!
//! Collision-free chiplets are ranked by average infidelity and consumed
//! best-first: the lowest-error window of `k * m` chiplets is placed into the
//! MCM grid, shuffled up to `max_reconfig` times until no link edge
//! introduces a collision, and committed on success. On timeout the window
//! slides forward by one and the stranded chiplet is never revisited, which
//! keeps consumption best-first and bounds the work by the bin size.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::collision::{pair_collides, spectators_collide, CollisionThresholds};
use crate::error::Error;
use crate::fabsim::{DeviceInstance, SeedLineage};
use crate::lattice::{build_chiplet, stitch_mcm, McmSpec, Topology};
use crate::noise::avg_infidelity;
use crate::seeds::{child_seed, stream_rng, Domain};
use crate::Result;

/// C4 bump-bond success model: each linked qubit needs `bumps_per_link_qubit`
/// bonds, each succeeding with probability `s_l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BondModel {
    pub s_l: f64,
    pub bumps_per_link_qubit: u32,
}

impl Default for BondModel {
    fn default() -> Self {
        BondModel { s_l: 0.999_999_606_42, bumps_per_link_qubit: 25 }
    }
}

impl BondModel {
    /// Sensitivity mode with the per-bump failure probability scaled 100x.
    pub fn sensitivity_x100(&self) -> BondModel {
        BondModel { s_l: 1.0 - 100.0 * (1.0 - self.s_l), ..*self }
    }

    pub fn factor(&self, link_qubits: usize) -> f64 {
        bond_yield_factor(link_qubits, self.s_l, self.bumps_per_link_qubit)
    }
}

/// `(s_l^bumps)^L` where `L` counts the qubits used for inter-chip linking.
///
/// Binary exponentiation over plain multiplications; `powi` is an LLVM
/// intrinsic whose result can differ between call sites, which would break
/// bit-reproducibility.
pub fn bond_yield_factor(link_qubits: usize, s_l: f64, bumps_per_link_qubit: u32) -> f64 {
    let mut exp = bumps_per_link_qubit as u64 * link_qubits as u64;
    let mut base = s_l;
    let mut result = 1.0;
    while exp > 0 {
        if exp & 1 == 1 {
            result *= base;
        }
        base *= base;
        exp >>= 1;
    }
    result
}

/// One characterized, collision-free chiplet awaiting assembly.
#[derive(Debug, Clone)]
pub struct BinEntry {
    pub device: DeviceInstance,
    pub e_avg: f64,
}

/// Collision-free chiplets sorted ascending by average infidelity, plus the
/// fabrication batch they came from (the denominator of post-assembly
/// yield).
#[derive(Debug, Clone)]
pub struct ChipletBin {
    entries: Vec<BinEntry>,
    fabricated_batch: usize,
}

impl ChipletBin {
    pub fn entries(&self) -> &[BinEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn fabricated_batch(&self) -> usize {
        self.fabricated_batch
    }
}

/// Sort characterized chiplets ascending by `E_avg` (ties by trial index).
/// All devices must share one chiplet spec and carry full noise.
pub fn rank_chiplets(devices: Vec<DeviceInstance>, fabricated_batch: usize) -> Result<ChipletBin> {
    if let Some(first) = devices.first() {
        for d in &devices[1..] {
            let same = Arc::ptr_eq(d.topology_arc(), first.topology_arc())
                || d.topology().edges() == first.topology().edges();
            if !same {
                return Err(Error::MixedChipletSpecs);
            }
        }
    }
    let mut entries = devices
        .into_iter()
        .map(|device| {
            let e_avg = avg_infidelity(&device)?;
            Ok(BinEntry { device, e_avg })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| {
        a.e_avg.total_cmp(&b.e_avg).then(a.device.trial_index().cmp(&b.device.trial_index()))
    });
    Ok(ChipletBin { entries, fabricated_batch })
}

/// Outcome of placing one window of chiplets into an MCM.
#[derive(Debug, Clone)]
pub enum McmAttempt {
    /// Stitched device plus the number of reconfigurations that were needed
    /// (0 means the initial best-first order already worked).
    Assembled { device: DeviceInstance, reconfigs: u32 },
    /// No collision-free placement within the reconfiguration budget.
    TimedOut { attempts: u32 },
}

/// Cross-chip checks and index maps for one MCM layout, reusable across
/// windows.
struct Assembler {
    mcm_topology: Arc<Topology>,
    slots: usize,
    /// (stub slot, stub local id, target slot, target local id, stub's
    /// same-chip neighbor local id) per link edge.
    link_checks: Vec<(u32, u32, u32, u32, u32)>,
    /// For every non-link MCM edge: (slot, chiplet edge index).
    edge_origin: Vec<Option<(u32, usize)>>,
}

impl Assembler {
    fn new(spec: &McmSpec) -> Assembler {
        let chip = build_chiplet(&spec.chiplet);
        let mcm = stitch_mcm(spec);
        let mut link_checks = Vec::new();
        let mut edge_origin = Vec::with_capacity(mcm.edges().len());
        for e in mcm.edges() {
            if e.is_link {
                edge_origin.push(None);
                let stub = e.control;
                let target = e.target();
                let same_chip_neighbor = mcm
                    .neighbors(stub)
                    .iter()
                    .copied()
                    .find(|&n| mcm.chiplet_of(n) == mcm.chiplet_of(stub))
                    .expect("link stubs keep their on-chip neighbor");
                link_checks.push((
                    mcm.chiplet_of(stub),
                    mcm.local_index(stub),
                    mcm.chiplet_of(target),
                    mcm.local_index(target),
                    mcm.local_index(same_chip_neighbor),
                ));
            } else {
                let slot = mcm.chiplet_of(e.a);
                let idx = chip
                    .edge_index(mcm.local_index(e.a), mcm.local_index(e.b))
                    .expect("non-link MCM edges map onto chiplet edges");
                edge_origin.push(Some((slot, idx)));
            }
        }
        Assembler { mcm_topology: Arc::new(mcm), slots: spec.slots(), link_checks, edge_origin }
    }

    /// True when no link edge introduces a pair or spectator collision under
    /// the slot assignment `perm` (slot -> chiplet index).
    fn placement_is_collision_free(
        &self,
        perm: &[usize],
        chiplets: &[DeviceInstance],
        alpha: f64,
        th: &CollisionThresholds,
    ) -> bool {
        for &(stub_slot, stub_local, target_slot, target_local, neighbor_local) in &self.link_checks {
            let stub_dev = &chiplets[perm[stub_slot as usize]];
            let target_dev = &chiplets[perm[target_slot as usize]];
            let f_stub = stub_dev.frequency(stub_local);
            let f_target = target_dev.frequency(target_local);
            if pair_collides(f_stub, f_target, true, alpha, th) {
                return false;
            }
            let f_neighbor = stub_dev.frequency(neighbor_local);
            if spectators_collide(f_stub, f_target, f_neighbor, alpha, th) {
                return false;
            }
        }
        true
    }

    fn materialize(&self, perm: &[usize], chiplets: &[DeviceInstance], seed: u64, mcm_index: u32) -> DeviceInstance {
        let t = &self.mcm_topology;
        let freq: Vec<f64> = (0..t.qubit_count() as u32)
            .map(|q| chiplets[perm[t.chiplet_of(q) as usize]].frequency(t.local_index(q)))
            .collect();
        let noise: Vec<Option<f64>> = self
            .edge_origin
            .iter()
            .map(|origin| {
                origin.and_then(|(slot, idx)| {
                    chiplets[perm[slot as usize]].edge_infidelities().get(idx).copied().flatten()
                })
            })
            .collect();
        let alpha = chiplets[0].alpha_ghz();
        DeviceInstance::new_raw(
            Arc::clone(t),
            freq,
            noise,
            alpha,
            SeedLineage { master_seed: seed, trial: mcm_index, noise_seed: None },
        )
    }

    fn attempt(
        &self,
        chiplets: &[DeviceInstance],
        th: &CollisionThresholds,
        max_reconfig: u32,
        seed: u64,
        mcm_index: u32,
    ) -> McmAttempt {
        let alpha = chiplets[0].alpha_ghz();
        let mut perm: Vec<usize> = (0..self.slots).collect();
        let mut rng = stream_rng(seed, Domain::Shuffle, mcm_index as u64, 0);
        for reconfigs in 0..=max_reconfig {
            if reconfigs > 0 {
                perm.shuffle(&mut rng);
            }
            if self.placement_is_collision_free(&perm, chiplets, alpha, th) {
                return McmAttempt::Assembled {
                    device: self.materialize(&perm, chiplets, seed, mcm_index),
                    reconfigs,
                };
            }
        }
        McmAttempt::TimedOut { attempts: max_reconfig }
    }
}

/// Try to stitch exactly `k * m` chiplets into a collision-free MCM. The
/// initial best-first order counts as attempt zero; each following attempt
/// shuffles the slot assignment with the seeded generator.
pub fn attempt_mcm(
    chiplets: &[DeviceInstance],
    spec: &McmSpec,
    thresholds: &CollisionThresholds,
    max_reconfig: u32,
    seed: u64,
) -> Result<McmAttempt> {
    if chiplets.len() != spec.slots() {
        return Err(Error::WrongChipletCount {
            expected: spec.slots(),
            rows: spec.rows,
            cols: spec.cols,
            got: chiplets.len(),
        });
    }
    for d in chiplets {
        d.validate_frequencies()?;
        if d.topology().qubit_count() != spec.chiplet.size() {
            return Err(Error::MixedChipletSpecs);
        }
    }
    Ok(Assembler::new(spec).attempt(chiplets, thresholds, max_reconfig, seed, 0))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssemblySummary {
    pub chiplets_used: usize,
    pub leftovers: usize,
    pub mcm_count: usize,
    pub failed_windows: usize,
    /// Successful windows keyed by how many reconfigurations they needed.
    pub reconfig_histogram: BTreeMap<u32, u32>,
    pub link_qubit_total: usize,
    pub bond_yield_factor: f64,
    pub post_assembly_yield: f64,
}

/// Assembled MCM devices plus the bookkeeping of the run.
#[derive(Debug, Clone)]
pub struct AssemblyResult {
    /// In assembly order, which is ascending in chiplet quality.
    pub mcms: Vec<DeviceInstance>,
    pub chiplets_used: usize,
    pub leftovers: usize,
    pub failed_windows: usize,
    pub reconfig_histogram: BTreeMap<u32, u32>,
    /// Link qubits per MCM of this layout.
    pub link_qubit_total: usize,
    pub bond_yield_factor: f64,
    /// `(chiplets_used / fabricated_batch) * bond_yield_factor`.
    pub post_assembly_yield: f64,
}

impl AssemblyResult {
    pub fn summary(&self) -> AssemblySummary {
        AssemblySummary {
            chiplets_used: self.chiplets_used,
            leftovers: self.leftovers,
            mcm_count: self.mcms.len(),
            failed_windows: self.failed_windows,
            reconfig_histogram: self.reconfig_histogram.clone(),
            link_qubit_total: self.link_qubit_total,
            bond_yield_factor: self.bond_yield_factor,
            post_assembly_yield: self.post_assembly_yield,
        }
    }
}

/// Consume the bin best-first: place the lowest-error window of `k * m`
/// chiplets, commit it on success, slide the window forward one entry on
/// timeout, and stop when fewer than `k * m` chiplets remain reachable.
pub fn assemble_batch(
    bin: ChipletBin,
    spec: &McmSpec,
    thresholds: &CollisionThresholds,
    max_reconfig: u32,
    seed: u64,
    bond: &BondModel,
) -> Result<AssemblyResult> {
    let slots = spec.slots();
    let fabricated_batch = bin.fabricated_batch();
    let bin_size = bin.len();
    for entry in bin.entries() {
        if entry.device.topology().qubit_count() != spec.chiplet.size() {
            return Err(Error::MixedChipletSpecs);
        }
    }
    let assembler = Assembler::new(spec);

    let mut entries = bin.entries;
    let mut start = 0usize;
    let mut window_counter = 0u32;
    let mut mcms = Vec::new();
    let mut reconfig_histogram: BTreeMap<u32, u32> = BTreeMap::new();
    let mut failed_windows = 0usize;
    while start + slots <= entries.len() {
        let window: Vec<DeviceInstance> =
            entries[start..start + slots].iter().map(|e| e.device.clone()).collect();
        let attempt_seed = child_seed(seed, window_counter as u64);
        match assembler.attempt(&window, thresholds, max_reconfig, attempt_seed, mcms.len() as u32) {
            McmAttempt::Assembled { device, reconfigs } => {
                *reconfig_histogram.entry(reconfigs).or_insert(0) += 1;
                mcms.push(device);
                entries.drain(start..start + slots);
            }
            McmAttempt::TimedOut { .. } => {
                failed_windows += 1;
                start += 1;
            }
        }
        window_counter += 1;
    }

    let chiplets_used = mcms.len() * slots;
    let leftovers = entries.len();
    debug_assert_eq!(chiplets_used + leftovers, bin_size);
    let link_qubit_total = assembler.mcm_topology.link_qubits().len();
    let factor = bond.factor(link_qubit_total);
    let post_assembly_yield = if fabricated_batch == 0 {
        0.0
    } else {
        chiplets_used as f64 / fabricated_batch as f64 * factor
    };
    Ok(AssemblyResult {
        mcms,
        chiplets_used,
        leftovers,
        failed_windows,
        reconfig_histogram,
        link_qubit_total,
        bond_yield_factor: factor,
        post_assembly_yield,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::{check_device, check_pair, check_spectators};
    use crate::fabsim::{fabricate_collision_free, sample_frequencies, FrequencyPlan};
    use crate::lattice::ChipletSpec;
    use crate::noise::{assign_device_noise, synth_calibration, LinkNoiseConfig};

    fn ideal_chiplet(spec: &ChipletSpec, trial: u32) -> DeviceInstance {
        let topo = Arc::new(build_chiplet(spec));
        let plan = FrequencyPlan::default().with_sigma(0.0);
        sample_frequencies(&topo, &plan, 0, trial)
    }

    #[test]
    fn bond_factor_reference_values() {
        assert_eq!(bond_yield_factor(0, 0.999_999_606_42, 25), 1.0);
        let one = bond_yield_factor(1, 0.999_999_606_42, 25);
        let mut direct = 1.0;
        for _ in 0..25 {
            direct *= 0.999_999_606_42;
        }
        assert!((one - direct).abs() < 1e-15);
        assert!((one - 0.999_990_16).abs() < 1e-8);
        let sens = BondModel::default().sensitivity_x100();
        assert!(sens.factor(10) < BondModel::default().factor(10));
    }

    #[test]
    fn single_slot_mcm_always_succeeds_without_reconfigs() {
        let spec = ChipletSpec::new(10).unwrap();
        let mcm = McmSpec::new(spec, 1, 1).unwrap();
        let chip = ideal_chiplet(&spec, 0);
        match attempt_mcm(&[chip], &mcm, &CollisionThresholds::default(), 100, 5).unwrap() {
            McmAttempt::Assembled { reconfigs, device } => {
                assert_eq!(reconfigs, 0);
                assert_eq!(device.topology().qubit_count(), 10);
            }
            McmAttempt::TimedOut { .. } => panic!("1x1 cannot time out"),
        }
    }

    #[test]
    fn ideal_chiplets_stitch_on_first_try() {
        let spec = ChipletSpec::new(20).unwrap();
        let mcm = McmSpec::new(spec, 2, 2).unwrap();
        let chips: Vec<_> = (0..4).map(|t| ideal_chiplet(&spec, t)).collect();
        match attempt_mcm(&chips, &mcm, &CollisionThresholds::default(), 100, 5).unwrap() {
            McmAttempt::Assembled { reconfigs, device } => {
                assert_eq!(reconfigs, 0);
                let report = check_device(&device, &CollisionThresholds::default()).unwrap();
                assert!(report.is_collision_free());
            }
            McmAttempt::TimedOut { .. } => panic!("ideal pattern stitches cleanly"),
        }
    }

    #[test]
    fn adversarial_pair_times_out() {
        // Both chiplets put their first right stub exactly on the type-2
        // center against the partner's row-0 port, so both arrangements of a
        // 1x2 MCM collide. Verified below by enumerating the permutations.
        let spec = ChipletSpec::new(10).unwrap();
        let mcm_spec = McmSpec::new(spec, 1, 2).unwrap();
        let topo = Arc::new(build_chiplet(&spec));
        let plan = FrequencyPlan::default().with_sigma(0.0);
        let mut freq: Vec<f64> =
            (0..topo.qubit_count() as u32).map(|q| plan.ideal(topo.class_of(q))).collect();
        let stub = topo.right_stubs()[0];
        freq[stub as usize] = 5.0 + 0.330 / 2.0;
        let dev = DeviceInstance::with_frequencies(Arc::clone(&topo), freq, plan.alpha_ghz).unwrap();
        assert!(check_device(&dev, &plan.thresholds).unwrap().is_collision_free());

        let chips = vec![dev.clone(), dev.clone()];
        let mcm_topo = stitch_mcm(&mcm_spec);
        // Exhaustive oracle over both permutations: every link edge set
        // contains at least one event.
        for perm in [[0usize, 1], [1, 0]] {
            let freq_of = |q: u32| chips[perm[mcm_topo.chiplet_of(q) as usize]].frequency(mcm_topo.local_index(q));
            let mut events = Vec::new();
            for e in mcm_topo.link_edges() {
                events.extend(check_pair(
                    e.control,
                    e.target(),
                    freq_of(e.control),
                    freq_of(e.target()),
                    true,
                    plan.alpha_ghz,
                    &plan.thresholds,
                ));
                for &n in mcm_topo.neighbors(e.control) {
                    if n != e.target() {
                        events.extend(check_spectators(
                            e.control,
                            e.target(),
                            n,
                            freq_of(e.control),
                            freq_of(e.target()),
                            freq_of(n),
                            plan.alpha_ghz,
                            &plan.thresholds,
                        ));
                    }
                }
            }
            assert!(!events.is_empty(), "permutation {perm:?} must collide");
        }

        match attempt_mcm(&chips, &mcm_spec, &plan.thresholds, 100, 9).unwrap() {
            McmAttempt::TimedOut { attempts } => assert_eq!(attempts, 100),
            McmAttempt::Assembled { .. } => panic!("no collision-free arrangement exists"),
        }
    }

    #[test]
    fn ranking_sorts_by_average_infidelity() {
        let spec = ChipletSpec::new(10).unwrap();
        let edges = build_chiplet(&spec).edges().len();
        let devices: Vec<DeviceInstance> = [0.03, 0.01, 0.02]
            .iter()
            .enumerate()
            .map(|(trial, &e)| {
                let mut d = ideal_chiplet(&spec, trial as u32);
                d.set_edge_infidelity(vec![Some(e); edges]);
                d
            })
            .collect();
        let bin = rank_chiplets(devices, 3).unwrap();
        let order: Vec<f64> = bin.entries().iter().map(|e| e.e_avg).collect();
        for (got, want) in order.iter().zip([0.01, 0.02, 0.03]) {
            assert!((got - want).abs() < 1e-12, "{order:?}");
        }

        assert!(rank_chiplets(Vec::new(), 0).unwrap().is_empty());
    }

    #[test]
    fn ranking_rejects_mixed_specs() {
        let ten = ideal_chiplet(&ChipletSpec::new(10).unwrap(), 0);
        let twenty = ideal_chiplet(&ChipletSpec::new(20).unwrap(), 0);
        let err = rank_chiplets(vec![ten, twenty], 2).unwrap_err();
        assert!(matches!(err, Error::MixedChipletSpecs));
    }

    fn noised_bin(spec: &ChipletSpec, batch: usize, seed: u64) -> ChipletBin {
        let topo = Arc::new(build_chiplet(spec));
        let plan = FrequencyPlan::default();
        let bins = synth_calibration(0.012, 0.018, 1000, 4).unwrap();
        let devices = fabricate_collision_free(&topo, &plan, batch, seed).unwrap();
        let noised: Vec<_> = devices
            .into_iter()
            .map(|d| assign_device_noise(d, &bins, &LinkNoiseConfig::default(), seed).unwrap())
            .collect();
        rank_chiplets(noised, batch).unwrap()
    }

    #[test]
    fn assemble_accounts_for_every_chiplet() {
        let spec = ChipletSpec::new(10).unwrap();
        let mcm = McmSpec::new(spec, 2, 2).unwrap();
        let bin = noised_bin(&spec, 500, 17);
        let bin_size = bin.len();
        let th = CollisionThresholds::default();
        let result = assemble_batch(bin, &mcm, &th, 100, 23, &BondModel::default()).unwrap();
        assert_eq!(result.chiplets_used + result.leftovers, bin_size);
        assert_eq!(result.chiplets_used, result.mcms.len() * 4);
        assert!(result.post_assembly_yield > 0.0 && result.post_assembly_yield < 1.0);
        // Stitched MCMs pass the full device check.
        for mcm_dev in &result.mcms {
            assert!(check_device(mcm_dev, &th).unwrap().is_collision_free());
        }
        // Best-first consumption: committed windows have ascending errors.
        let first = avg_on_chip(&result.mcms[0]);
        let last = avg_on_chip(result.mcms.last().unwrap());
        assert!(first <= last, "{first} vs {last}");
    }

    fn avg_on_chip(d: &DeviceInstance) -> f64 {
        let mut sum = 0.0;
        let mut n = 0;
        for (i, e) in d.topology().edges().iter().enumerate() {
            if !e.is_link {
                sum += d.edge_infidelities()[i].unwrap();
                n += 1;
            }
        }
        sum / n as f64
    }

    #[test]
    fn assemble_small_bins() {
        let spec = ChipletSpec::new(10).unwrap();
        let mcm = McmSpec::new(spec, 2, 2).unwrap();
        let th = CollisionThresholds::default();
        // Fewer chiplets than slots: nothing assembles.
        let bin = noised_bin(&spec, 3, 3);
        assert!(bin.len() <= 3);
        let result = assemble_batch(bin, &mcm, &th, 100, 1, &BondModel::default()).unwrap();
        assert!(result.mcms.is_empty());
        assert_eq!(result.chiplets_used, 0);
    }

    #[test]
    fn assembly_is_deterministic() {
        let spec = ChipletSpec::new(20).unwrap();
        let mcm = McmSpec::new(spec, 2, 2).unwrap();
        let th = CollisionThresholds::default();
        let a = assemble_batch(noised_bin(&spec, 300, 5), &mcm, &th, 100, 42, &BondModel::default()).unwrap();
        let b = assemble_batch(noised_bin(&spec, 300, 5), &mcm, &th, 100, 42, &BondModel::default()).unwrap();
        assert_eq!(a.mcms.len(), b.mcms.len());
        assert_eq!(a.reconfig_histogram, b.reconfig_histogram);
        for (x, y) in a.mcms.iter().zip(&b.mcms) {
            assert_eq!(x.frequencies(), y.frequencies());
            assert_eq!(x.edge_infidelities(), y.edge_infidelities());
        }
    }

    #[test]
    fn link_qubit_count_matches_topology() {
        let spec = ChipletSpec::new(10).unwrap();
        let mcm = McmSpec::new(spec, 2, 2).unwrap();
        let topo = stitch_mcm(&mcm);
        let bin = noised_bin(&spec, 200, 8);
        let result =
            assemble_batch(bin, &mcm, &CollisionThresholds::default(), 100, 2, &BondModel::default()).unwrap();
        assert_eq!(result.link_qubit_total, topo.link_qubits().len());
        let expect = bond_yield_factor(result.link_qubit_total, 0.999_999_606_42, 25);
        assert_eq!(result.bond_yield_factor, expect);
    }

    #[test]
    fn stranded_chiplets_grow_with_mcm_dims() {
        // Statistically over seeds: bigger windows strand at least as many
        // chiplets.
        let spec = ChipletSpec::new(10).unwrap();
        let th = CollisionThresholds::default();
        let small = McmSpec::new(spec, 1, 2).unwrap();
        let large = McmSpec::new(spec, 2, 3).unwrap();
        let mut used_small = 0usize;
        let mut used_large = 0usize;
        for seed in 0..6 {
            let bin = noised_bin(&spec, 240, 100 + seed);
            let bin2 = bin.clone();
            used_small +=
                assemble_batch(bin, &small, &th, 100, seed, &BondModel::default()).unwrap().chiplets_used;
            used_large +=
                assemble_batch(bin2, &large, &th, 100, seed, &BondModel::default()).unwrap().chiplets_used;
        }
        // Slack of one window per seed.
        assert!(used_small + 6 * 6 >= used_large, "{used_small} vs {used_large}");
    }

    #[test]
    fn ideal_bin_of_exactly_one_window() {
        let spec = ChipletSpec::new(10).unwrap();
        let mcm = McmSpec::new(spec, 2, 2).unwrap();
        let edges = build_chiplet(&spec).edges().len();
        let devices: Vec<_> = (0..4)
            .map(|t| {
                let mut d = ideal_chiplet(&spec, t);
                d.set_edge_infidelity(vec![Some(0.01); edges]);
                d
            })
            .collect();
        let bin = rank_chiplets(devices, 4).unwrap();
        let result =
            assemble_batch(bin, &mcm, &CollisionThresholds::default(), 100, 0, &BondModel::default()).unwrap();
        assert_eq!(result.mcms.len(), 1);
        assert_eq!(result.leftovers, 0);
    }

    #[test]
    fn f0_class_frequencies_map_through_slots() {
        // Frequencies of a stitched device come from the placed chiplet's
        // local qubits.
        let spec = ChipletSpec::new(10).unwrap();
        let mcm_spec = McmSpec::new(spec, 2, 2).unwrap();
        let topo = Arc::new(build_chiplet(&spec));
        let chips: Vec<_> = (0..4)
            .map(|t| {
                let plan = FrequencyPlan::default().with_sigma(0.0);
                let mut f: Vec<f64> =
                    (0..10u32).map(|q| plan.ideal(topo.class_of(q))).collect();
                // Tag each chiplet with a tiny class-preserving offset.
                for v in &mut f {
                    *v += t as f64 * 1e-6;
                }
                DeviceInstance::with_frequencies(Arc::clone(&topo), f, plan.alpha_ghz).unwrap()
            })
            .collect();
        match attempt_mcm(&chips, &mcm_spec, &CollisionThresholds::default(), 100, 3).unwrap() {
            McmAttempt::Assembled { device, .. } => {
                for q in 0..device.topology().qubit_count() as u32 {
                    let slot = device.topology().chiplet_of(q) as usize;
                    let local = device.topology().local_index(q);
                    assert_eq!(device.frequency(q), chips[slot].frequency(local));
                }
            }
            McmAttempt::TimedOut { .. } => panic!("near-ideal chiplets stitch"),
        }
    }

}
