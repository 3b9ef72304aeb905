//! Benchmark circuit generation, routing, and fidelity products.
//!
//! Seven circuit families cover the workload space; each targets 80% of a
//! device's qubits in the architecture comparisons. Routing is deliberately
//! simple and fully deterministic: BFS layout from qubit 0 and shortest-path
//! SWAP insertion with lexicographic tie-breaks. The success-probability
//! proxy multiplies `1 - infidelity` over every physical two-qubit gate.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_batch, rank_chiplets, BondModel};
use crate::error::Error;
use crate::fabsim::{fabricate_collision_free, DeviceInstance, FrequencyPlan};
use crate::lattice::{build_chiplet, build_monolithic, McmSpec, Topology};
use crate::noise::{assign_device_noise, assign_link_noise, DetuningBins, LinkNoiseConfig};
use crate::seeds::{child_seed, stream_rng, Domain};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BenchFamily {
    Bv,
    Qaoa,
    Ghz,
    Adder,
    Primacy,
    BitCode,
    Hamiltonian,
}

impl BenchFamily {
    pub const ALL: [BenchFamily; 7] = [
        BenchFamily::Bv,
        BenchFamily::Qaoa,
        BenchFamily::Ghz,
        BenchFamily::Adder,
        BenchFamily::Primacy,
        BenchFamily::BitCode,
        BenchFamily::Hamiltonian,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BenchFamily::Bv => "bv",
            BenchFamily::Qaoa => "qaoa",
            BenchFamily::Ghz => "ghz",
            BenchFamily::Adder => "adder",
            BenchFamily::Primacy => "primacy",
            BenchFamily::BitCode => "bitcode",
            BenchFamily::Hamiltonian => "hamiltonian",
        }
    }

    /// Smallest supported logical width.
    pub fn min_qubits(&self) -> usize {
        match self {
            BenchFamily::Bv => 2,
            BenchFamily::Qaoa => 4,
            BenchFamily::Ghz => 2,
            BenchFamily::Adder => 3,
            BenchFamily::Primacy => 2,
            BenchFamily::BitCode => 3,
            BenchFamily::Hamiltonian => 2,
        }
    }

    fn id(&self) -> u64 {
        Self::ALL.iter().position(|f| f == self).unwrap() as u64
    }
}

impl std::str::FromStr for BenchFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BenchFamily::ALL
            .iter()
            .find(|f| f.name() == s)
            .copied()
            .ok_or_else(|| Error::Format(format!("unknown benchmark family {s:?}")))
    }
}

impl std::fmt::Display for BenchFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One- or two-qubit operation on logical (pre-routing) or physical
/// (post-routing) qubit indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(u32),
    X(u32),
    T(u32),
    Tdg(u32),
    Rx(u32, f64),
    Ry(u32, f64),
    Rz(u32, f64),
    Cx(u32, u32),
    Cz(u32, u32),
}

impl Gate {
    pub fn two_qubit_operands(&self) -> Option<(u32, u32)> {
        match *self {
            Gate::Cx(a, b) | Gate::Cz(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.two_qubit_operands().is_some()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Circuit {
    pub family: BenchFamily,
    pub logical_qubit_count: usize,
    pub gates: Vec<Gate>,
    pub seed: u64,
}

impl Circuit {
    pub fn one_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| !g.is_two_qubit()).count()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }
}

/// The hidden bitstring the Bernstein-Vazirani oracle encodes for
/// `(n_logical, seed)`; exposed so tests can check the gate count against
/// its popcount.
pub fn bv_hidden_string(n_logical: usize, seed: u64) -> Vec<bool> {
    let mut rng = stream_rng(seed, Domain::Circuit, BenchFamily::Bv.id(), n_logical as u64);
    (0..n_logical.saturating_sub(1)).map(|_| rng.random_bool(0.5)).collect()
}

/// Deterministic circuit for `(family, n_logical, seed)`.
pub fn generate_circuit(family: BenchFamily, n_logical: usize, seed: u64) -> Result<Circuit> {
    if n_logical < family.min_qubits() {
        return Err(Error::CircuitTooSmall {
            family: family.name(),
            min: family.min_qubits(),
            extra: "",
            got: n_logical,
        });
    }
    let mut rng = stream_rng(seed, Domain::Circuit, family.id(), n_logical as u64);
    let n = n_logical as u32;
    let mut gates = Vec::new();
    match family {
        BenchFamily::Bv => {
            let hidden = bv_hidden_string(n_logical, seed);
            let ancilla = n - 1;
            gates.push(Gate::X(ancilla));
            for q in 0..n {
                gates.push(Gate::H(q));
            }
            for (i, &bit) in hidden.iter().enumerate() {
                if bit {
                    gates.push(Gate::Cx(i as u32, ancilla));
                }
            }
            for q in 0..n - 1 {
                gates.push(Gate::H(q));
            }
        }
        BenchFamily::Qaoa => {
            if n_logical % 2 != 0 {
                return Err(Error::CircuitTooSmall {
                    family: family.name(),
                    min: family.min_qubits(),
                    extra: " (even, for a 3-regular problem graph)",
                    got: n_logical,
                });
            }
            let edges = random_cubic_graph(n_logical, &mut rng);
            let gamma = rng.random_range(0.0..std::f64::consts::PI);
            let beta = rng.random_range(0.0..std::f64::consts::PI);
            for q in 0..n {
                gates.push(Gate::H(q));
            }
            for (a, b) in edges {
                gates.push(Gate::Cx(a, b));
                gates.push(Gate::Rz(b, gamma));
                gates.push(Gate::Cx(a, b));
            }
            for q in 0..n {
                gates.push(Gate::Rx(q, beta));
            }
        }
        BenchFamily::Ghz => {
            gates.push(Gate::H(0));
            for q in 0..n - 1 {
                gates.push(Gate::Cx(q, q + 1));
            }
        }
        BenchFamily::Adder => {
            // Cuccaro ripple-carry on floor((n-1)/2)-bit operands laid out
            // as [cin, b0, a0, b1, a1, ...] with a carry-out when a qubit
            // remains. Toffolis are expanded to the standard 6-CX network.
            let bits = (n_logical - 1) / 2;
            let b_q = |i: u32| 1 + 2 * i;
            let a_q = |i: u32| 2 + 2 * i;
            let carry_out = (n_logical >= 2 * bits + 2).then_some(2 * bits as u32 + 1);
            for i in 0..bits as u32 {
                if rng.random_bool(0.5) {
                    gates.push(Gate::X(a_q(i)));
                }
                if rng.random_bool(0.5) {
                    gates.push(Gate::X(b_q(i)));
                }
            }
            let maj = |gates: &mut Vec<Gate>, c: u32, b: u32, a: u32| {
                gates.push(Gate::Cx(a, b));
                gates.push(Gate::Cx(a, c));
                push_ccx(gates, c, b, a);
            };
            let mut carry = 0u32; // cin
            let mut chain = Vec::new();
            for i in 0..bits as u32 {
                maj(&mut gates, carry, b_q(i), a_q(i));
                chain.push((carry, b_q(i), a_q(i)));
                carry = a_q(i);
            }
            if let Some(z) = carry_out {
                gates.push(Gate::Cx(carry, z));
            }
            for &(c, b, a) in chain.iter().rev() {
                push_ccx(&mut gates, c, b, a);
                gates.push(Gate::Cx(a, c));
                gates.push(Gate::Cx(c, b));
            }
        }
        BenchFamily::Primacy => {
            let half_pi = std::f64::consts::FRAC_PI_2;
            for _ in 0..10 {
                for q in 0..n {
                    match rng.random_range(0..3) {
                        0 => gates.push(Gate::Rx(q, half_pi)),
                        1 => gates.push(Gate::Ry(q, half_pi)),
                        _ => gates.push(Gate::T(q)),
                    }
                }
                let mut order: Vec<u32> = (0..n).collect();
                order.shuffle(&mut rng);
                for pair in order.chunks_exact(2) {
                    gates.push(Gate::Cz(pair[0], pair[1]));
                }
            }
        }
        BenchFamily::BitCode => {
            // ceil((n+1)/2) data and floor((n-1)/2) ancilla interleaved as
            // [d0, a0, d1, a1, ...]; one syndrome round of two CX per
            // ancilla.
            let ancillas = (n_logical - 1) / 2;
            for i in 0..ancillas as u32 {
                let (data_lo, anc, data_hi) = (2 * i, 2 * i + 1, 2 * i + 2);
                gates.push(Gate::Cx(data_lo, anc));
                gates.push(Gate::Cx(data_hi, anc));
            }
        }
        BenchFamily::Hamiltonian => {
            // One first-order Trotter step of a 1D transverse-field Ising
            // chain; each ZZ term costs two CX.
            let field = rng.random_range(0.0..std::f64::consts::PI);
            let coupling = rng.random_range(0.0..std::f64::consts::PI);
            for q in 0..n {
                gates.push(Gate::Rx(q, field));
            }
            for q in 0..n - 1 {
                gates.push(Gate::Cx(q, q + 1));
                gates.push(Gate::Rz(q + 1, coupling));
                gates.push(Gate::Cx(q, q + 1));
            }
        }
    }
    Ok(Circuit { family, logical_qubit_count: n_logical, gates, seed })
}

fn push_ccx(gates: &mut Vec<Gate>, a: u32, b: u32, c: u32) {
    gates.push(Gate::H(c));
    gates.push(Gate::Cx(b, c));
    gates.push(Gate::Tdg(c));
    gates.push(Gate::Cx(a, c));
    gates.push(Gate::T(c));
    gates.push(Gate::Cx(b, c));
    gates.push(Gate::Tdg(c));
    gates.push(Gate::Cx(a, c));
    gates.push(Gate::T(b));
    gates.push(Gate::T(c));
    gates.push(Gate::H(c));
    gates.push(Gate::Cx(a, b));
    gates.push(Gate::T(a));
    gates.push(Gate::Tdg(b));
    gates.push(Gate::Cx(a, b));
}

/// Seeded simple 3-regular graph on `n` (even) vertices via the pairing
/// model with rejection.
fn random_cubic_graph<R: Rng>(n: usize, rng: &mut R) -> Vec<(u32, u32)> {
    loop {
        let mut stubs: Vec<u32> = (0..n as u32).flat_map(|v| [v, v, v]).collect();
        stubs.shuffle(rng);
        let mut edges = Vec::with_capacity(3 * n / 2);
        let mut seen = std::collections::HashSet::new();
        let mut ok = true;
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                ok = false;
                break;
            }
            edges.push((a, b));
        }
        if ok {
            return edges;
        }
    }
}

/// A circuit lowered onto a device: initial layout plus the physical gate
/// list with SWAPs expanded into three CX each.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoutedCircuit {
    /// Initial logical-to-physical placement.
    pub layout: Vec<u32>,
    pub physical_gates: Vec<Gate>,
    pub two_qubit_count: usize,
    pub swap_count: usize,
    /// Longest chain of dependent two-qubit gates.
    pub critical_path_2q: usize,
}

/// Deterministic router: logical qubits take the BFS order from qubit 0 as
/// their initial placement; a two-qubit gate on non-adjacent qubits walks
/// its control along the lexicographically smallest shortest path.
/// `_seed` is accepted for interface stability; this router makes no random
/// choices.
pub fn route_circuit(circuit: &Circuit, topology: &Topology, _seed: u64) -> Result<RoutedCircuit> {
    let n_phys = topology.qubit_count();
    let n_logical = circuit.logical_qubit_count;
    if n_logical * 5 > n_phys * 4 {
        return Err(Error::CircuitTooLarge { logical: n_logical, physical: n_phys });
    }

    // BFS placement from the fixed corner qubit 0.
    let mut order = Vec::with_capacity(n_phys);
    let mut seen = vec![false; n_phys];
    let mut queue = std::collections::VecDeque::from([0u32]);
    seen[0] = true;
    while let Some(q) = queue.pop_front() {
        order.push(q);
        for &nb in topology.neighbors(q) {
            if !seen[nb as usize] {
                seen[nb as usize] = true;
                queue.push_back(nb);
            }
        }
    }
    let layout: Vec<u32> = order[..n_logical].to_vec();
    let mut phys_of: Vec<u32> = layout.clone();
    let mut logical_of: Vec<Option<u32>> = vec![None; n_phys];
    for (l, &p) in phys_of.iter().enumerate() {
        logical_of[p as usize] = Some(l as u32);
    }

    let mut physical_gates = Vec::with_capacity(circuit.gates.len());
    let mut swap_count = 0usize;
    let mut dist = vec![u32::MAX; n_phys];
    for gate in &circuit.gates {
        match gate.two_qubit_operands() {
            None => {
                let mapped = match *gate {
                    Gate::H(q) => Gate::H(phys_of[q as usize]),
                    Gate::X(q) => Gate::X(phys_of[q as usize]),
                    Gate::T(q) => Gate::T(phys_of[q as usize]),
                    Gate::Tdg(q) => Gate::Tdg(phys_of[q as usize]),
                    Gate::Rx(q, a) => Gate::Rx(phys_of[q as usize], a),
                    Gate::Ry(q, a) => Gate::Ry(phys_of[q as usize], a),
                    Gate::Rz(q, a) => Gate::Rz(phys_of[q as usize], a),
                    Gate::Cx(..) | Gate::Cz(..) => unreachable!(),
                };
                physical_gates.push(mapped);
            }
            Some((la, lb)) => {
                let pa = phys_of[la as usize];
                let pb = phys_of[lb as usize];
                if topology.edge_index(pa, pb).is_none() {
                    // Distances to pb, then walk from pa picking the
                    // smallest-id neighbor that moves closer.
                    dist.fill(u32::MAX);
                    dist[pb as usize] = 0;
                    let mut queue = std::collections::VecDeque::from([pb]);
                    while let Some(q) = queue.pop_front() {
                        if q == pa {
                            break;
                        }
                        for &nb in topology.neighbors(q) {
                            if dist[nb as usize] == u32::MAX {
                                dist[nb as usize] = dist[q as usize] + 1;
                                queue.push_back(nb);
                            }
                        }
                    }
                    let mut here = pa;
                    while dist[here as usize] > 1 {
                        let next = topology
                            .neighbors(here)
                            .iter()
                            .copied()
                            .find(|&nb| dist[nb as usize] == dist[here as usize] - 1)
                            .expect("connected topology");
                        // SWAP(here, next) as three CX.
                        physical_gates.push(Gate::Cx(here, next));
                        physical_gates.push(Gate::Cx(next, here));
                        physical_gates.push(Gate::Cx(here, next));
                        swap_count += 1;
                        let (lh, ln) = (logical_of[here as usize], logical_of[next as usize]);
                        if let Some(l) = lh {
                            phys_of[l as usize] = next;
                        }
                        if let Some(l) = ln {
                            phys_of[l as usize] = here;
                        }
                        logical_of.swap(here as usize, next as usize);
                        here = next;
                    }
                }
                let pa = phys_of[la as usize];
                let pb = phys_of[lb as usize];
                debug_assert!(topology.edge_index(pa, pb).is_some());
                physical_gates.push(match gate {
                    Gate::Cx(..) => Gate::Cx(pa, pb),
                    Gate::Cz(..) => Gate::Cz(pa, pb),
                    _ => unreachable!(),
                });
            }
        }
    }

    let two_qubit_count = physical_gates.iter().filter(|g| g.is_two_qubit()).count();
    let mut depth = vec![0usize; n_phys];
    let mut critical = 0usize;
    for g in &physical_gates {
        if let Some((a, b)) = g.two_qubit_operands() {
            let d = depth[a as usize].max(depth[b as usize]) + 1;
            depth[a as usize] = d;
            depth[b as usize] = d;
            critical = critical.max(d);
        }
    }
    Ok(RoutedCircuit { layout, physical_gates, two_qubit_count, swap_count, critical_path_2q: critical })
}

/// Product of `1 - infidelity` over every physical two-qubit gate.
pub fn fidelity_product(rc: &RoutedCircuit, device: &DeviceInstance) -> Result<f64> {
    let t = device.topology();
    let mut product = 1.0;
    for g in &rc.physical_gates {
        if let Some((a, b)) = g.two_qubit_operands() {
            let idx = t.edge_index(a, b).ok_or(Error::GateOffEdge { a, b })?;
            let e = device.edge_infidelities().get(idx).copied().flatten().ok_or(Error::MissingNoise)?;
            product *= 1.0 - e;
        }
    }
    Ok(product)
}

/// Benchmark comparison parameters; the monolithic arm samples `batch`
/// devices, the chiplet arm `batch * slots`.
#[derive(Debug, Clone)]
pub struct CompareConfig {
    pub family: BenchFamily,
    pub spec: McmSpec,
    pub link_ratio: f64,
    pub plan: FrequencyPlan,
    pub batch: usize,
    pub seed: u64,
    pub max_reconfig: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareOutcome {
    pub family: BenchFamily,
    pub chiplet_size: usize,
    pub rows: usize,
    pub cols: usize,
    pub total_qubits: usize,
    pub logical_qubits: usize,
    pub routed_two_qubit_gates: usize,
    pub mono_devices: usize,
    pub mcms_compared: usize,
    pub mono_mean_fidelity: Option<f64>,
    pub mcm_mean_fidelity: Option<f64>,
    /// `F(MCM) / F(mono)`; `None` when the monolithic arm has zero yield.
    pub fidelity_ratio: Option<f64>,
}

impl CompareOutcome {
    pub fn is_infeasible(&self) -> bool {
        self.fidelity_ratio.is_none()
    }
}

/// Mean fidelity product of assembled MCMs against collision-free
/// monolithic devices of equal size, on one benchmark circuit sized to 80%
/// of the device.
pub fn compare_architectures(bins: &DetuningBins, cfg: &CompareConfig) -> Result<CompareOutcome> {
    cfg.plan.validate()?;
    let spec = &cfg.spec;
    let total = spec.total_qubits();
    let n_logical = total * 4 / 5;
    let circuit = generate_circuit(cfg.family, n_logical, cfg.seed)?;

    let mono_topo = Arc::new(build_monolithic(&spec.chiplet, spec.rows, spec.cols));
    let routed = route_circuit(&circuit, &mono_topo, cfg.seed)?;

    let mcm_seed = child_seed(cfg.seed, 0);
    let mono_seed = child_seed(cfg.seed, 1);
    let link = LinkNoiseConfig::new(cfg.link_ratio)?;

    // Monolithic arm.
    let monos = fabricate_collision_free(&mono_topo, &cfg.plan, cfg.batch, mono_seed)?;
    let mono_fids = monos
        .into_iter()
        .map(|d| {
            let d = assign_device_noise(d, bins, &link, mono_seed)?;
            fidelity_product(&routed, &d)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mono_devices = mono_fids.len();

    // Chiplet arm.
    let chip_topo = Arc::new(build_chiplet(&spec.chiplet));
    let scaled_batch = cfg.batch * spec.slots();
    let chiplets = fabricate_collision_free(&chip_topo, &cfg.plan, scaled_batch, mcm_seed)?;
    let noised = chiplets
        .into_iter()
        .map(|d| assign_device_noise(d, bins, &link, mcm_seed))
        .collect::<Result<Vec<_>>>()?;
    let bin = rank_chiplets(noised, scaled_batch)?;
    let asm = assemble_batch(bin, spec, &cfg.plan.thresholds, cfg.max_reconfig, mcm_seed, &BondModel::default())?;

    let compared = mono_devices.min(asm.mcms.len());
    let (mono_mean, mcm_mean, ratio) = if mono_devices == 0 || compared == 0 {
        (None, None, None)
    } else {
        let mono_mean = mono_fids.iter().sum::<f64>() / mono_devices as f64;
        let mcm_fids = asm.mcms[..compared]
            .iter()
            .map(|d| {
                let d = assign_link_noise(d.clone(), bins, &link, mcm_seed)?;
                fidelity_product(&routed, &d)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mcm_mean = mcm_fids.iter().sum::<f64>() / compared as f64;
        (Some(mono_mean), Some(mcm_mean), Some(mcm_mean / mono_mean))
    };

    Ok(CompareOutcome {
        family: cfg.family,
        chiplet_size: spec.chiplet.size(),
        rows: spec.rows,
        cols: spec.cols,
        total_qubits: total,
        logical_qubits: n_logical,
        routed_two_qubit_gates: routed.two_qubit_count,
        mono_devices,
        mcms_compared: compared,
        mono_mean_fidelity: mono_mean,
        mcm_mean_fidelity: mcm_mean,
        fidelity_ratio: ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fabsim::sample_frequencies;
    use crate::lattice::ChipletSpec;

    #[test]
    fn structural_two_qubit_counts() {
        assert_eq!(generate_circuit(BenchFamily::Ghz, 32, 1).unwrap().two_qubit_count(), 31);
        assert_eq!(generate_circuit(BenchFamily::Hamiltonian, 64, 1).unwrap().two_qubit_count(), 126);
        assert_eq!(generate_circuit(BenchFamily::BitCode, 32, 1).unwrap().two_qubit_count(), 30);
        assert_eq!(generate_circuit(BenchFamily::BitCode, 64, 1).unwrap().two_qubit_count(), 62);
        // QAOA on a 3-regular graph: 3n/2 edges, two CX each.
        assert_eq!(generate_circuit(BenchFamily::Qaoa, 16, 1).unwrap().two_qubit_count(), 48);
    }

    #[test]
    fn bv_gate_count_matches_hidden_string() {
        for seed in 0..20 {
            let n = 24;
            let c = generate_circuit(BenchFamily::Bv, n, seed).unwrap();
            let popcount = bv_hidden_string(n, seed).iter().filter(|&&b| b).count();
            assert_eq!(c.two_qubit_count(), popcount);
        }
    }

    #[test]
    fn below_minimum_is_rejected() {
        assert!(generate_circuit(BenchFamily::Ghz, 1, 0).is_err());
        assert!(generate_circuit(BenchFamily::Qaoa, 7, 0).is_err(), "odd width");
    }

    #[test]
    fn generation_is_deterministic() {
        for family in BenchFamily::ALL {
            let a = generate_circuit(family, 16, 9).unwrap();
            let b = generate_circuit(family, 16, 9).unwrap();
            assert_eq!(a.gates, b.gates, "{family}");
            assert!(a.gates.iter().all(|g| match g.two_qubit_operands() {
                Some((x, y)) => x != y && (x as usize) < 16 && (y as usize) < 16,
                None => true,
            }));
        }
    }

    fn device_20q(noise: f64) -> DeviceInstance {
        let spec = ChipletSpec::new(20).unwrap();
        let topo = Arc::new(build_chiplet(&spec));
        let plan = FrequencyPlan::default().with_sigma(0.0);
        let mut d = sample_frequencies(&topo, &plan, 0, 0);
        let edges = topo.edges().len();
        d.set_edge_infidelity(vec![Some(noise); edges]);
        d
    }

    #[test]
    fn routing_ghz_meets_lower_bound_and_is_deterministic() {
        let d = device_20q(0.0);
        let c = generate_circuit(BenchFamily::Ghz, 16, 3).unwrap();
        let r1 = route_circuit(&c, d.topology(), 0).unwrap();
        let r2 = route_circuit(&c, d.topology(), 0).unwrap();
        assert!(r1.two_qubit_count >= 15);
        assert_eq!(r1.physical_gates, r2.physical_gates);
        assert!(r1.critical_path_2q <= r1.two_qubit_count);
        // Every physical 2q gate acts on a device edge.
        for g in &r1.physical_gates {
            if let Some((a, b)) = g.two_qubit_operands() {
                assert!(d.topology().edge_index(a, b).is_some());
            }
        }
    }

    #[test]
    fn adjacent_gates_need_no_swaps() {
        let d = device_20q(0.0);
        // Logical 0 and 1 sit on adjacent physical qubits under BFS layout.
        let c = Circuit {
            family: BenchFamily::Ghz,
            logical_qubit_count: 2,
            gates: vec![Gate::H(0), Gate::Cx(0, 1), Gate::Cx(0, 1)],
            seed: 0,
        };
        let r = route_circuit(&c, d.topology(), 0).unwrap();
        assert_eq!(r.swap_count, 0);
        assert_eq!(r.two_qubit_count, 2);
    }

    #[test]
    fn utilization_cap_is_enforced() {
        let d = device_20q(0.0);
        let c = generate_circuit(BenchFamily::Ghz, 17, 0).unwrap();
        assert!(matches!(route_circuit(&c, d.topology(), 0), Err(Error::CircuitTooLarge { .. })));
        let ok = generate_circuit(BenchFamily::Ghz, 16, 0).unwrap();
        assert!(route_circuit(&ok, d.topology(), 0).is_ok());
    }

    #[test]
    fn fidelity_product_arithmetic() {
        let zero_noise = device_20q(0.0);
        let c = generate_circuit(BenchFamily::Ghz, 16, 3).unwrap();
        let r = route_circuit(&c, zero_noise.topology(), 0).unwrap();
        assert_eq!(fidelity_product(&r, &zero_noise).unwrap(), 1.0);

        let noisy = device_20q(0.01);
        let expected = 0.99f64;
        let two = Circuit {
            family: BenchFamily::Ghz,
            logical_qubit_count: 2,
            gates: vec![Gate::Cx(0, 1), Gate::Cx(0, 1)],
            seed: 0,
        };
        let r = route_circuit(&two, noisy.topology(), 0).unwrap();
        let f = fidelity_product(&r, &noisy).unwrap();
        assert!((f - expected * expected).abs() < 1e-12);
        // Appending a noisy gate strictly lowers the product.
        let three = Circuit {
            family: BenchFamily::Ghz,
            logical_qubit_count: 2,
            gates: vec![Gate::Cx(0, 1), Gate::Cx(0, 1), Gate::Cx(0, 1)],
            seed: 0,
        };
        let r3 = route_circuit(&three, noisy.topology(), 0).unwrap();
        assert!(fidelity_product(&r3, &noisy).unwrap() < f);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn routed_count_dominates_logical(seed in 0u64..200, fam_idx in 0usize..7) {
            let family = BenchFamily::ALL[fam_idx];
            let c = generate_circuit(family, 16, seed).unwrap();
            let spec = ChipletSpec::new(20).unwrap();
            let topo = build_chiplet(&spec);
            let r = route_circuit(&c, &topo, seed).unwrap();
            proptest::prop_assert!(r.two_qubit_count >= c.two_qubit_count());
            proptest::prop_assert_eq!(r.two_qubit_count, c.two_qubit_count() + 3 * r.swap_count);
        }
    }
}
