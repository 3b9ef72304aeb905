//! File formats.
//!
//! Line-oriented text for topologies, device instances, collision reports,
//! and circuits; versioned JSON for calibration snapshots and detuning bins.
//! Topology and device files round-trip exactly (floats are printed in
//! Rust's shortest round-trip form).
//!
//! Topology format (`qmcm-topology v1`):
//!
//! ```text
//! qmcm-topology v1
//! chiplets <count>
//! qubits <n>
//! q <id> <class> <chiplet> <y> <x> <local>
//! edges <m>
//! e <a> <b> <control> <is_link 0|1>
//! right-stubs <id...>
//! bottom-stubs <id...>
//! ```
//!
//! Device format (`qmcm-device v1`) appends to the same sections:
//!
//! ```text
//! alpha <ghz>
//! lineage <master_seed> <trial> <noise_seed|->
//! f <qubit> <ghz>
//! n <edge_index> <infidelity|->
//! ```
//!
//! Circuit format (`qmcm-circuit v1`): one gate per line, `<opcode> <q...>`
//! with rotation angles inlined as `<opcode>(<radians>)`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bench::{Circuit, Gate, RoutedCircuit};
use crate::collision::CollisionReport;
use crate::error::Error;
use crate::fabsim::{DeviceInstance, SeedLineage};
use crate::lattice::{EdgeInfo, FrequencyClass, Topology};
use crate::noise::{CalibrationSnapshot, DetuningBins};
use crate::Result;

const TOPOLOGY_HEADER: &str = "qmcm-topology v1";
const DEVICE_HEADER: &str = "qmcm-device v1";
const REPORT_HEADER: &str = "type,qubits,detuning_ghz,threshold_ghz";
const SNAPSHOT_VERSION: u32 = 1;
const BINS_VERSION: u32 = 1;

pub fn topology_to_string(t: &Topology) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{TOPOLOGY_HEADER}");
    let _ = writeln!(out, "chiplets {}", t.chiplet_count());
    let _ = writeln!(out, "qubits {}", t.qubit_count());
    for q in 0..t.qubit_count() as u32 {
        let (y, x) = t.position(q);
        let _ = writeln!(out, "q {q} {} {} {y} {x} {}", t.class_of(q), t.chiplet_of(q), t.local_index(q));
    }
    let _ = writeln!(out, "edges {}", t.edges().len());
    for e in t.edges() {
        let _ = writeln!(out, "e {} {} {} {}", e.a, e.b, e.control, e.is_link as u8);
    }
    let _ = write!(out, "right-stubs");
    for q in t.right_stubs() {
        let _ = write!(out, " {q}");
    }
    out.push('\n');
    let _ = write!(out, "bottom-stubs");
    for q in t.bottom_stubs() {
        let _ = write!(out, " {q}");
    }
    out.push('\n');
    out
}

pub fn device_to_string(d: &DeviceInstance) -> String {
    let mut out = topology_to_string(d.topology());
    out = out.replacen(TOPOLOGY_HEADER, DEVICE_HEADER, 1);
    let _ = writeln!(out, "alpha {}", d.alpha_ghz());
    let lineage = d.lineage();
    let noise_seed = lineage.noise_seed.map_or("-".to_string(), |s| s.to_string());
    let _ = writeln!(out, "lineage {} {} {noise_seed}", lineage.master_seed, lineage.trial);
    for q in 0..d.topology().qubit_count() as u32 {
        let _ = writeln!(out, "f {q} {}", d.frequency(q));
    }
    if !d.edge_infidelities().is_empty() {
        for (i, v) in d.edge_infidelities().iter().enumerate() {
            match v {
                Some(v) => {
                    let _ = writeln!(out, "n {i} {v}");
                }
                None => {
                    let _ = writeln!(out, "n {i} -");
                }
            }
        }
    }
    out
}

struct Parser<'a> {
    lines: std::iter::Peekable<std::str::Lines<'a>>,
    line_no: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { lines: text.lines().peekable(), line_no: 0 }
    }

    fn next_line(&mut self) -> Result<&'a str> {
        self.line_no += 1;
        self.lines.next().ok_or_else(|| Error::Format("unexpected end of file".into()))
    }

    fn fail(&self, msg: &str) -> Error {
        Error::Format(format!("line {}: {msg}", self.line_no))
    }
}

fn parse_num<T: std::str::FromStr>(token: Option<&str>, what: &str) -> Result<T> {
    token
        .ok_or_else(|| Error::Format(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Format(format!("bad {what}")))
}

fn parse_topology_sections(p: &mut Parser<'_>) -> Result<Topology> {
    let line = p.next_line()?;
    let chiplet_count: usize = {
        let mut it = line.split_whitespace();
        if it.next() != Some("chiplets") {
            return Err(p.fail("expected `chiplets`"));
        }
        parse_num(it.next(), "chiplet count")?
    };
    let line = p.next_line()?;
    let n: usize = {
        let mut it = line.split_whitespace();
        if it.next() != Some("qubits") {
            return Err(p.fail("expected `qubits`"));
        }
        parse_num(it.next(), "qubit count")?
    };
    let mut classes = Vec::with_capacity(n);
    let mut chiplets = Vec::with_capacity(n);
    let mut pos = Vec::with_capacity(n);
    let mut local = Vec::with_capacity(n);
    for expect in 0..n as u32 {
        let mut it = p.next_line()?.split_whitespace();
        if it.next() != Some("q") {
            return Err(p.fail("expected qubit record"));
        }
        let id: u32 = parse_num(it.next(), "qubit id")?;
        if id != expect {
            return Err(p.fail("qubit records must be in id order"));
        }
        classes.push(it.next().ok_or_else(|| p.fail("missing class"))?.parse::<FrequencyClass>()?);
        chiplets.push(parse_num(it.next(), "chiplet")?);
        let y: u32 = parse_num(it.next(), "y")?;
        let x: u32 = parse_num(it.next(), "x")?;
        pos.push((y, x));
        local.push(parse_num(it.next(), "local index")?);
    }
    let line = p.next_line()?;
    let m: usize = {
        let mut it = line.split_whitespace();
        if it.next() != Some("edges") {
            return Err(p.fail("expected `edges`"));
        }
        parse_num(it.next(), "edge count")?
    };
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let mut it = p.next_line()?.split_whitespace();
        if it.next() != Some("e") {
            return Err(p.fail("expected edge record"));
        }
        let a: u32 = parse_num(it.next(), "edge endpoint")?;
        let b: u32 = parse_num(it.next(), "edge endpoint")?;
        let control: u32 = parse_num(it.next(), "control")?;
        let is_link: u8 = parse_num(it.next(), "link flag")?;
        edges.push(EdgeInfo { a, b, control, is_link: is_link != 0 });
    }
    let right = parse_stub_line(p, "right-stubs")?;
    let bottom = parse_stub_line(p, "bottom-stubs")?;
    Topology::from_export_parts(classes, chiplets, pos, local, edges, right, bottom, chiplet_count)
}

fn parse_stub_line(p: &mut Parser<'_>, tag: &str) -> Result<Vec<u32>> {
    let line = p.next_line()?;
    let mut it = line.split_whitespace();
    if it.next() != Some(tag) {
        return Err(p.fail(&format!("expected `{tag}`")));
    }
    it.map(|tok| tok.parse().map_err(|_| Error::Format(format!("bad {tag} id")))).collect()
}

pub fn topology_from_str(text: &str) -> Result<Topology> {
    let mut p = Parser::new(text);
    if p.next_line()? != TOPOLOGY_HEADER {
        return Err(Error::Format(format!("expected `{TOPOLOGY_HEADER}` header")));
    }
    parse_topology_sections(&mut p)
}

pub fn device_from_str(text: &str) -> Result<DeviceInstance> {
    let mut p = Parser::new(text);
    if p.next_line()? != DEVICE_HEADER {
        return Err(Error::Format(format!("expected `{DEVICE_HEADER}` header")));
    }
    let topology = parse_topology_sections(&mut p)?;
    let n = topology.qubit_count();
    let edge_count = topology.edges().len();

    let mut it = p.next_line()?.split_whitespace();
    if it.next() != Some("alpha") {
        return Err(p.fail("expected `alpha`"));
    }
    let alpha: f64 = parse_num(it.next(), "alpha")?;

    let mut it = p.next_line()?.split_whitespace();
    if it.next() != Some("lineage") {
        return Err(p.fail("expected `lineage`"));
    }
    let master_seed: u64 = parse_num(it.next(), "master seed")?;
    let trial: u32 = parse_num(it.next(), "trial")?;
    let noise_seed = match it.next() {
        Some("-") => None,
        tok => Some(parse_num(tok, "noise seed")?),
    };

    let mut freq = vec![f64::NAN; n];
    for expect in 0..n as u32 {
        let mut it = p.next_line()?.split_whitespace();
        if it.next() != Some("f") {
            return Err(p.fail("expected frequency record"));
        }
        let id: u32 = parse_num(it.next(), "qubit id")?;
        if id != expect {
            return Err(p.fail("frequency records must be in id order"));
        }
        freq[id as usize] = parse_num(it.next(), "frequency")?;
    }
    let mut noise: Vec<Option<f64>> = Vec::new();
    if p.lines.peek().is_some() {
        noise = vec![None; edge_count];
        for expect in 0..edge_count {
            let mut it = p.next_line()?.split_whitespace();
            if it.next() != Some("n") {
                return Err(p.fail("expected noise record"));
            }
            let idx: usize = parse_num(it.next(), "edge index")?;
            if idx != expect {
                return Err(p.fail("noise records must be in edge order"));
            }
            noise[idx] = match it.next() {
                Some("-") => None,
                tok => Some(parse_num(tok, "infidelity")?),
            };
        }
    }
    let device = DeviceInstance::new_raw(
        Arc::new(topology),
        freq,
        noise,
        alpha,
        SeedLineage { master_seed, trial, noise_seed },
    );
    device.validate_frequencies()?;
    Ok(device)
}

pub fn write_topology(t: &Topology, path: &Path) -> Result<()> {
    fs::write(path, topology_to_string(t))?;
    Ok(())
}

pub fn read_topology(path: &Path) -> Result<Topology> {
    topology_from_str(&fs::read_to_string(path)?)
}

pub fn write_device(d: &DeviceInstance, path: &Path) -> Result<()> {
    fs::write(path, device_to_string(d))?;
    Ok(())
}

pub fn read_device(path: &Path) -> Result<DeviceInstance> {
    device_from_str(&fs::read_to_string(path)?)
}

/// Collision report as CSV, one row per event; spectator rows carry three
/// qubit ids separated by `;`.
pub fn collision_report_to_csv(report: &CollisionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{REPORT_HEADER}");
    for ev in &report.events {
        let qubits: Vec<String> = ev.qubits.iter().map(|q| q.to_string()).collect();
        let threshold = ev.threshold_ghz.map_or("-".to_string(), |t| t.to_string());
        let _ = writeln!(out, "{},{},{},{threshold}", ev.kind.number(), qubits.join(";"), ev.detuning_ghz);
    }
    out
}

#[derive(Serialize, Deserialize)]
struct VersionedSnapshot {
    version: u32,
    #[serde(flatten)]
    snapshot: CalibrationSnapshot,
}

pub fn snapshot_to_json(snapshot: &CalibrationSnapshot) -> Result<String> {
    Ok(serde_json::to_string_pretty(&VersionedSnapshot {
        version: SNAPSHOT_VERSION,
        snapshot: snapshot.clone(),
    })?)
}

pub fn snapshot_from_json(text: &str) -> Result<CalibrationSnapshot> {
    let v: VersionedSnapshot = serde_json::from_str(text)?;
    if v.version != SNAPSHOT_VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {}", v.version)));
    }
    Ok(v.snapshot)
}

pub fn load_snapshot(path: &Path) -> Result<CalibrationSnapshot> {
    snapshot_from_json(&fs::read_to_string(path)?)
}

#[derive(Serialize, Deserialize)]
struct VersionedBins {
    version: u32,
    bin_width_ghz: f64,
    bins: std::collections::BTreeMap<u32, Vec<f64>>,
}

pub fn bins_to_json(bins: &DetuningBins) -> Result<String> {
    Ok(serde_json::to_string_pretty(&VersionedBins {
        version: BINS_VERSION,
        bin_width_ghz: bins.bin_width_ghz(),
        bins: bins.bins().clone(),
    })?)
}

pub fn bins_from_json(text: &str) -> Result<DetuningBins> {
    let v: VersionedBins = serde_json::from_str(text)?;
    if v.version != BINS_VERSION {
        return Err(Error::Format(format!("unsupported bins version {}", v.version)));
    }
    DetuningBins::from_raw(v.bin_width_ghz, v.bins)
}

pub fn save_bins(bins: &DetuningBins, path: &Path) -> Result<()> {
    fs::write(path, bins_to_json(bins)?)?;
    Ok(())
}

pub fn load_bins(path: &Path) -> Result<DetuningBins> {
    bins_from_json(&fs::read_to_string(path)?)
}

fn gate_line(g: &Gate) -> String {
    match *g {
        Gate::H(q) => format!("h {q}"),
        Gate::X(q) => format!("x {q}"),
        Gate::T(q) => format!("t {q}"),
        Gate::Tdg(q) => format!("tdg {q}"),
        Gate::Rx(q, a) => format!("rx({a}) {q}"),
        Gate::Ry(q, a) => format!("ry({a}) {q}"),
        Gate::Rz(q, a) => format!("rz({a}) {q}"),
        Gate::Cx(a, b) => format!("cx {a} {b}"),
        Gate::Cz(a, b) => format!("cz {a} {b}"),
    }
}

pub fn circuit_to_string(c: &Circuit) -> String {
    let mut out = format!(
        "qmcm-circuit v1 family={} qubits={} seed={}\n",
        c.family,
        c.logical_qubit_count,
        c.seed
    );
    for g in &c.gates {
        out.push_str(&gate_line(g));
        out.push('\n');
    }
    out
}

pub fn routed_circuit_to_string(rc: &RoutedCircuit) -> String {
    let layout: Vec<String> = rc.layout.iter().map(|p| p.to_string()).collect();
    let mut out = format!(
        "qmcm-routed-circuit v1 two_qubit={} swaps={} critical_2q={}\nlayout {}\n",
        rc.two_qubit_count,
        rc.swap_count,
        rc.critical_path_2q,
        layout.join(" ")
    );
    for g in &rc.physical_gates {
        out.push_str(&gate_line(g));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{generate_circuit, BenchFamily};
    use crate::collision::{check_device, CollisionThresholds};
    use crate::fabsim::{sample_frequencies, FrequencyPlan};
    use crate::lattice::{build_chiplet, stitch_mcm, ChipletSpec, McmSpec};
    use crate::noise::{assign_device_noise, synth_calibration, LinkNoiseConfig};

    #[test]
    fn topology_round_trip_is_exact() {
        let spec = ChipletSpec::new(20).unwrap();
        let mcm = stitch_mcm(&McmSpec::new(spec, 2, 2).unwrap());
        let text = topology_to_string(&mcm);
        let back = topology_from_str(&text).unwrap();
        assert_eq!(back, mcm);
        assert_eq!(topology_to_string(&back), text);
    }

    #[test]
    fn device_round_trip_preserves_noise_and_lineage() {
        let spec = ChipletSpec::new(10).unwrap();
        let topo = Arc::new(build_chiplet(&spec));
        let bins = synth_calibration(0.012, 0.018, 300, 4).unwrap();
        let d = sample_frequencies(&topo, &FrequencyPlan::default(), 77, 3);
        let d = assign_device_noise(d, &bins, &LinkNoiseConfig::default(), 5).unwrap();
        let text = device_to_string(&d);
        let back = device_from_str(&text).unwrap();
        assert_eq!(back.frequencies(), d.frequencies());
        assert_eq!(back.edge_infidelities(), d.edge_infidelities());
        assert_eq!(back.lineage(), d.lineage());
        assert_eq!(back.topology(), d.topology());
    }

    #[test]
    fn device_without_noise_round_trips() {
        let spec = ChipletSpec::new(10).unwrap();
        let topo = Arc::new(build_chiplet(&spec));
        let d = sample_frequencies(&topo, &FrequencyPlan::default(), 1, 0);
        let back = device_from_str(&device_to_string(&d)).unwrap();
        assert!(back.edge_infidelities().is_empty());
        assert_eq!(back.frequencies(), d.frequencies());
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(topology_from_str("nope").is_err());
        let spec = ChipletSpec::new(10).unwrap();
        let text = topology_to_string(&build_chiplet(&spec));
        let truncated = &text[..text.len() / 2];
        assert!(topology_from_str(truncated).is_err());
    }

    #[test]
    fn report_csv_has_one_row_per_event() {
        let spec = ChipletSpec::new(10).unwrap();
        let topo = Arc::new(build_chiplet(&spec));
        let plan = FrequencyPlan::default().with_sigma(0.0);
        // Force a degenerate device: all frequencies equal.
        let d = DeviceInstance::with_frequencies(topo, vec![5.0; 10], plan.alpha_ghz).unwrap();
        let report = check_device(&d, &CollisionThresholds::default()).unwrap();
        assert!(!report.is_collision_free());
        let csv = collision_report_to_csv(&report);
        assert_eq!(csv.lines().count(), report.len() + 1);
        assert!(csv.starts_with("type,qubits,detuning_ghz,threshold_ghz"));
    }

    #[test]
    fn bins_round_trip_is_lossless() {
        let bins = synth_calibration(0.012, 0.018, 500, 9).unwrap();
        let back = bins_from_json(&bins_to_json(&bins).unwrap()).unwrap();
        assert_eq!(back, bins);
    }

    #[test]
    fn snapshot_round_trip_and_version_gate() {
        let snap = CalibrationSnapshot {
            qubits: vec![
                crate::noise::CalQubit { id: 0, frequency_ghz: 5.0 },
                crate::noise::CalQubit { id: 1, frequency_ghz: 5.0601234567891234 },
            ],
            gates: vec![crate::noise::CalGate { pair: (0, 1), infidelity: vec![0.01, 0.02] }],
        };
        let json = snapshot_to_json(&snap).unwrap();
        let back = snapshot_from_json(&json).unwrap();
        assert_eq!(back.qubits[1].frequency_ghz, snap.qubits[1].frequency_ghz);
        assert!(snapshot_from_json(&json.replace("\"version\": 1", "\"version\": 9")).is_err());
    }

    #[test]
    fn circuit_export_format() {
        let c = generate_circuit(BenchFamily::Ghz, 4, 0).unwrap();
        let text = circuit_to_string(&c);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "qmcm-circuit v1 family=ghz qubits=4 seed=0");
        assert_eq!(lines.next().unwrap(), "h 0");
        assert_eq!(lines.next().unwrap(), "cx 0 1");
    }
}
