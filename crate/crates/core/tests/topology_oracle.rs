//! Cross-checks of the lattice generator against independent oracles:
//! VF2 graph isomorphism (petgraph) for the monolithic/stitched equivalence
//! and the full collision checker at ideal frequencies.

use std::sync::Arc;

use petgraph::algo::is_isomorphic_matching;
use petgraph::graph::UnGraph;
use qmcm_core::collision::check_device;
use qmcm_core::fabsim::{sample_frequencies, FrequencyPlan};
use qmcm_core::lattice::{
    build_chiplet, build_monolithic, stitch_mcm, validate_frequency_pattern, ChipletSpec,
    FrequencyClass, McmSpec, Topology, SUPPORTED_CHIPLET_SIZES,
};

fn as_petgraph(t: &Topology) -> UnGraph<FrequencyClass, ()> {
    let mut g = UnGraph::new_undirected();
    let nodes: Vec<_> = (0..t.qubit_count() as u32).map(|q| g.add_node(t.class_of(q))).collect();
    for e in t.edges() {
        g.add_edge(nodes[e.a as usize], nodes[e.b as usize], ());
    }
    g
}

fn isomorphic(a: &Topology, b: &Topology) -> bool {
    is_isomorphic_matching(&as_petgraph(a), &as_petgraph(b), |x, y| x == y, |_, _| true)
}

#[test]
fn monolithic_is_isomorphic_to_stitched_mcm() {
    for (size, rows, cols) in [(10, 2, 5), (10, 2, 2), (20, 3, 3), (20, 1, 2), (40, 2, 3), (90, 2, 2)] {
        let spec = ChipletSpec::new(size).unwrap();
        let mono = build_monolithic(&spec, rows, cols);
        let mcm = stitch_mcm(&McmSpec::new(spec, rows, cols).unwrap());
        assert_eq!(mono.qubit_count(), size * rows * cols);
        assert!(isomorphic(&mono, &mcm), "{size}q {rows}x{cols}");
    }
}

#[test]
fn side_by_side_tiles_continue_the_lattice() {
    // Two 10q tiles in a row reproduce the 20q chiplet exactly; the tiling
    // rule is seamless in the horizontal direction.
    let a = build_monolithic(&ChipletSpec::new(10).unwrap(), 1, 2);
    let b = build_chiplet(&ChipletSpec::new(20).unwrap());
    assert!(isomorphic(&a, &b));
}

#[test]
fn different_layouts_are_not_isomorphic() {
    // Sanity check that the oracle can tell layouts apart: the vertical
    // stack is a tree while the 20q chiplet closes a ring.
    let a = build_monolithic(&ChipletSpec::new(10).unwrap(), 2, 1);
    let b = build_chiplet(&ChipletSpec::new(20).unwrap());
    assert_eq!(a.qubit_count(), b.qubit_count());
    assert_eq!(a.edges().len() + 1, b.edges().len());
    assert!(!isomorphic(&a, &b));
}

#[test]
fn every_generated_topology_is_collision_free_at_ideal_frequencies() {
    let plan = FrequencyPlan::default().with_sigma(0.0);
    let mut checked = Vec::new();
    for &size in &SUPPORTED_CHIPLET_SIZES {
        checked.push(build_chiplet(&ChipletSpec::new(size).unwrap()));
    }
    checked.push(stitch_mcm(&McmSpec::new(ChipletSpec::new(20).unwrap(), 3, 3).unwrap()));
    checked.push(stitch_mcm(&McmSpec::new(ChipletSpec::new(10).unwrap(), 5, 5).unwrap()));
    checked.push(build_monolithic(&ChipletSpec::new(60).unwrap(), 2, 2));
    for t in checked {
        assert!(validate_frequency_pattern(&t).is_empty());
        let t = Arc::new(t);
        let d = sample_frequencies(&t, &plan, 0, 0);
        let report = check_device(&d, &plan.thresholds).unwrap();
        assert!(report.is_collision_free(), "{} qubits: {:?}", t.qubit_count(), report.events.first());
    }
}

#[test]
fn every_edge_is_controlled_by_its_f2_endpoint() {
    for &size in &SUPPORTED_CHIPLET_SIZES {
        let spec = ChipletSpec::new(size).unwrap();
        let t = stitch_mcm(&McmSpec::with_cap(spec, 1, 2, 1000).unwrap());
        for e in t.edges() {
            assert_eq!(t.class_of(e.control), FrequencyClass::F2);
            assert_ne!(t.class_of(e.target()), FrequencyClass::F2);
        }
    }
}
