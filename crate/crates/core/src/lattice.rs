//! Heavy-hex topology construction.
//!
//! Devices are generated from a rectangular tiling rule. A tile ("chiplet")
//! has `R` dense rows of `D` qubits laid out on a grid; dense rows carry the
//! period-4 class pattern `F0 F2 F1 F2 ...` with the even-column classes
//! swapping between consecutive rows. Sparse connector qubits (always `F2`)
//! join adjacent dense rows at every fourth column, alternating between the
//! `c % 4 == 0` and `c % 4 == 2` offsets in a brick pattern. `F2` stubs are
//! appended to the right end of every dense row and below the last dense row
//! at the `c % 4 == 2` columns; inside an MCM they carry the inter-chip links
//! and act as the CR controls of those links, on the outer boundary they
//! dangle with degree one.
//!
//! Because a tile spans `D + 1` columns (a multiple of four) and an even
//! number of dense rows, stitching identical tiles edge to edge continues the
//! global heavy-hex pattern seamlessly: a monolithic device built on the same
//! grid is graph-identical to the stitched MCM with the link markings erased.

use std::collections::HashMap;
use std::fmt;

use crate::error::Error;
use crate::Result;

pub type QubitId = u32;

/// Frequency allocation class; `F0 < F1 < F2` and `F2` qubits act as CR
/// controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum FrequencyClass {
    F0,
    F1,
    F2,
}

impl FrequencyClass {
    pub const ALL: [FrequencyClass; 3] = [FrequencyClass::F0, FrequencyClass::F1, FrequencyClass::F2];
}

impl fmt::Display for FrequencyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrequencyClass::F0 => write!(f, "F0"),
            FrequencyClass::F1 => write!(f, "F1"),
            FrequencyClass::F2 => write!(f, "F2"),
        }
    }
}

impl std::str::FromStr for FrequencyClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F0" => Ok(FrequencyClass::F0),
            "F1" => Ok(FrequencyClass::F1),
            "F2" => Ok(FrequencyClass::F2),
            other => Err(Error::Format(format!("unknown frequency class {other:?}"))),
        }
    }
}

/// Undirected coupling with its designated CR control endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeInfo {
    pub a: QubitId,
    pub b: QubitId,
    /// The CR control; always the `F2` endpoint in generated topologies.
    pub control: QubitId,
    /// True when the endpoints lie on different chiplets.
    pub is_link: bool,
}

impl EdgeInfo {
    pub fn other(&self, q: QubitId) -> QubitId {
        if q == self.a {
            self.b
        } else {
            self.a
        }
    }

    /// The non-control endpoint.
    pub fn target(&self) -> QubitId {
        self.other(self.control)
    }
}

/// Qubit coupling graph with class labels, control designations, chiplet
/// membership, and link markings. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    class_of: Vec<FrequencyClass>,
    chiplet_of: Vec<u32>,
    /// Grid bookkeeping: dense rows sit at even `y`, connector rows at odd
    /// `y`; `x` is the global column.
    pos: Vec<(u32, u32)>,
    /// Rank of the qubit inside its own tile's row-major order; equals the
    /// qubit id the same site gets in a standalone chiplet build.
    local_index: Vec<u32>,
    edges: Vec<EdgeInfo>,
    neighbors: Vec<Vec<QubitId>>,
    right_stubs: Vec<QubitId>,
    bottom_stubs: Vec<QubitId>,
    link_qubits: Vec<QubitId>,
    chiplet_count: usize,
}

impl Topology {
    pub fn qubit_count(&self) -> usize {
        self.class_of.len()
    }

    pub fn class_of(&self, q: QubitId) -> FrequencyClass {
        self.class_of[q as usize]
    }

    pub fn chiplet_of(&self, q: QubitId) -> u32 {
        self.chiplet_of[q as usize]
    }

    pub fn position(&self, q: QubitId) -> (u32, u32) {
        self.pos[q as usize]
    }

    pub fn local_index(&self, q: QubitId) -> u32 {
        self.local_index[q as usize]
    }

    pub fn edges(&self) -> &[EdgeInfo] {
        &self.edges
    }

    pub fn link_edges(&self) -> impl Iterator<Item = &EdgeInfo> {
        self.edges.iter().filter(|e| e.is_link)
    }

    pub fn neighbors(&self, q: QubitId) -> &[QubitId] {
        &self.neighbors[q as usize]
    }

    /// Qubits incident to at least one link edge.
    pub fn link_qubits(&self) -> &[QubitId] {
        &self.link_qubits
    }

    /// Outer-boundary `F2` stubs on the east edge, top to bottom.
    pub fn right_stubs(&self) -> &[QubitId] {
        &self.right_stubs
    }

    /// Outer-boundary `F2` stubs on the south edge, left to right.
    pub fn bottom_stubs(&self) -> &[QubitId] {
        &self.bottom_stubs
    }

    pub fn chiplet_count(&self) -> usize {
        self.chiplet_count
    }

    /// Index into `edges()` for the coupling `{a, b}`, if present.
    pub fn edge_index(&self, a: QubitId, b: QubitId) -> Option<usize> {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.edges.binary_search_by_key(&(lo, hi), |e| (e.a, e.b)).ok()
    }

    /// Unordered neighbor pairs `{j, k}` of every qubit that is the
    /// designated control of at least one incident edge, as `(control, j, k)`
    /// with `j < k`.
    pub fn spectator_triples(&self) -> Vec<(QubitId, QubitId, QubitId)> {
        let mut is_control = vec![false; self.qubit_count()];
        for e in &self.edges {
            is_control[e.control as usize] = true;
        }
        let mut triples = Vec::new();
        for q in 0..self.qubit_count() as u32 {
            if !is_control[q as usize] {
                continue;
            }
            let nbrs = self.neighbors(q);
            for i in 0..nbrs.len() {
                for j in i + 1..nbrs.len() {
                    triples.push((q, nbrs[i], nbrs[j]));
                }
            }
        }
        triples
    }

    /// Assemble a topology from explicit parts. Intended for tests and
    /// imports; generated devices come from the builders below. Edge
    /// endpoints are normalized and sorted, positions default to a single
    /// row.
    pub fn from_parts(
        classes: Vec<FrequencyClass>,
        chiplet_of: Vec<u32>,
        edges: Vec<EdgeInfo>,
    ) -> Result<Topology> {
        let n = classes.len();
        if chiplet_of.len() != n {
            return Err(Error::InvalidTopology(format!(
                "chiplet_of has {} entries for {} qubits",
                chiplet_of.len(),
                n
            )));
        }
        let mut norm = Vec::with_capacity(edges.len());
        for e in edges {
            if e.a as usize >= n || e.b as usize >= n || e.a == e.b {
                return Err(Error::InvalidTopology(format!("bad edge ({}, {})", e.a, e.b)));
            }
            if e.control != e.a && e.control != e.b {
                return Err(Error::InvalidTopology(format!(
                    "control {} is not an endpoint of ({}, {})",
                    e.control, e.a, e.b
                )));
            }
            let (a, b) = if e.a < e.b { (e.a, e.b) } else { (e.b, e.a) };
            norm.push(EdgeInfo { a, b, ..e });
        }
        norm.sort_by_key(|e| (e.a, e.b));
        norm.dedup_by_key(|e| (e.a, e.b));
        let pos = (0..n as u32).map(|i| (0, i)).collect();
        Ok(Self::finish(classes, chiplet_of, pos, (0..n as u32).collect(), norm, Vec::new(), Vec::new(), 1))
    }

    /// Rebuild from the fields of an exported topology file.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_export_parts(
        class_of: Vec<FrequencyClass>,
        chiplet_of: Vec<u32>,
        pos: Vec<(u32, u32)>,
        local_index: Vec<u32>,
        mut edges: Vec<EdgeInfo>,
        right_stubs: Vec<QubitId>,
        bottom_stubs: Vec<QubitId>,
        chiplet_count: usize,
    ) -> Result<Topology> {
        let n = class_of.len();
        if chiplet_of.len() != n || pos.len() != n || local_index.len() != n {
            return Err(Error::Format("qubit record count mismatch".into()));
        }
        for e in &mut edges {
            if e.a as usize >= n || e.b as usize >= n || e.a == e.b || (e.control != e.a && e.control != e.b) {
                return Err(Error::Format(format!("bad edge record ({}, {})", e.a, e.b)));
            }
            if e.a > e.b {
                std::mem::swap(&mut e.a, &mut e.b);
            }
        }
        edges.sort_by_key(|e| (e.a, e.b));
        if right_stubs.iter().chain(&bottom_stubs).any(|&q| q as usize >= n) {
            return Err(Error::Format("stub record out of range".into()));
        }
        Ok(Self::finish(class_of, chiplet_of, pos, local_index, edges, right_stubs, bottom_stubs, chiplet_count))
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        class_of: Vec<FrequencyClass>,
        chiplet_of: Vec<u32>,
        pos: Vec<(u32, u32)>,
        local_index: Vec<u32>,
        edges: Vec<EdgeInfo>,
        right_stubs: Vec<QubitId>,
        bottom_stubs: Vec<QubitId>,
        chiplet_count: usize,
    ) -> Topology {
        let mut neighbors = vec![Vec::new(); class_of.len()];
        for e in &edges {
            neighbors[e.a as usize].push(e.b);
            neighbors[e.b as usize].push(e.a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        let mut link_qubits: Vec<QubitId> =
            edges.iter().filter(|e| e.is_link).flat_map(|e| [e.a, e.b]).collect();
        link_qubits.sort_unstable();
        link_qubits.dedup();
        Topology {
            class_of,
            chiplet_of,
            pos,
            local_index,
            edges,
            neighbors,
            right_stubs,
            bottom_stubs,
            link_qubits,
            chiplet_count,
        }
    }
}

/// Supported chiplet sizes in qubits.
pub const SUPPORTED_CHIPLET_SIZES: [usize; 9] = [10, 20, 40, 60, 90, 120, 160, 200, 250];

/// Tiling parameters per supported size: `(size, dense_rows, row_len)`.
///
/// Dense-row count is even so vertical stitching continues the alternating
/// row coloring; row length is `3 (mod 4)` so horizontal stitching through
/// the right stub continues the period-4 column pattern. Each size then
/// comes out exactly as
/// `rows * row_len + rows * (row_len + 1) / 4 + rows` qubits
/// (dense + connectors-and-bottom-stubs + right stubs).
const CHIPLET_TABLE: [(usize, usize, usize); 9] = [
    (10, 2, 3),
    (20, 2, 7),
    (40, 4, 7),
    (60, 4, 11),
    (90, 6, 11),
    (120, 6, 15),
    (160, 8, 15),
    (200, 8, 19),
    (250, 10, 19),
];

/// Generator parameters for one supported chiplet size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChipletSpec {
    size: usize,
    dense_rows: usize,
    row_len: usize,
}

impl ChipletSpec {
    pub fn new(size: usize) -> Result<ChipletSpec> {
        CHIPLET_TABLE
            .iter()
            .find(|(s, _, _)| *s == size)
            .map(|&(size, dense_rows, row_len)| ChipletSpec { size, dense_rows, row_len })
            .ok_or(Error::UnsupportedChipletSize { size, supported: &SUPPORTED_CHIPLET_SIZES })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dense_rows(&self) -> usize {
        self.dense_rows
    }

    pub fn row_len(&self) -> usize {
        self.row_len
    }

    /// Connectors per sparse row (and bottom stubs per tile).
    pub fn sparse_row_len(&self) -> usize {
        (self.row_len + 1) / 4
    }
}

/// Default qubit cap for the MCM evaluation envelope.
pub const DEFAULT_MCM_QUBIT_CAP: usize = 500;

/// A `rows x cols` grid of identical chiplets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McmSpec {
    pub chiplet: ChipletSpec,
    pub rows: usize,
    pub cols: usize,
}

impl McmSpec {
    pub fn new(chiplet: ChipletSpec, rows: usize, cols: usize) -> Result<McmSpec> {
        Self::with_cap(chiplet, rows, cols, DEFAULT_MCM_QUBIT_CAP)
    }

    pub fn with_cap(chiplet: ChipletSpec, rows: usize, cols: usize, cap: usize) -> Result<McmSpec> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidTopology("MCM dims must be at least 1x1".into()));
        }
        let total = rows * cols * chiplet.size();
        if total > cap {
            return Err(Error::McmTooLarge { total, cap });
        }
        Ok(McmSpec { chiplet, rows, cols })
    }

    pub fn slots(&self) -> usize {
        self.rows * self.cols
    }

    pub fn total_qubits(&self) -> usize {
        self.slots() * self.chiplet.size()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SiteKind {
    Dense,
    RightStub,
    Sparse,
}

/// Shared tiling routine. `mark_chiplets` controls whether tile membership
/// and cross-tile links are recorded (stitched MCM) or erased (monolithic).
fn build_lattice(chiplet: &ChipletSpec, tile_rows: usize, tile_cols: usize, mark_chiplets: bool) -> Topology {
    let rows = chiplet.dense_rows();
    let len = chiplet.row_len();
    let stride = len + 1;

    // (y, x, class, tile, kind)
    let mut sites: Vec<(u32, u32, FrequencyClass, u32, SiteKind)> = Vec::new();
    for ti in 0..tile_rows {
        for tj in 0..tile_cols {
            let tile = (ti * tile_cols + tj) as u32;
            let x0 = (tj * stride) as u32;
            for r in 0..rows {
                let grow = ti * rows + r;
                let y = (grow * 2) as u32;
                for c in 0..len {
                    sites.push((y, x0 + c as u32, dense_class(grow, c), tile, SiteKind::Dense));
                }
                sites.push((y, x0 + len as u32, FrequencyClass::F2, tile, SiteKind::RightStub));
                // Connector row below this dense row; below the last dense
                // row it holds the bottom stubs.
                let offset = if grow % 2 == 0 { 0 } else { 2 };
                for c in (offset..len).step_by(4) {
                    sites.push((y + 1, x0 + c as u32, FrequencyClass::F2, tile, SiteKind::Sparse));
                }
            }
        }
    }

    // Row-major ids, stable across runs.
    sites.sort_by_key(|&(y, x, ..)| (y, x));
    let n = sites.len();
    let mut index: HashMap<(u32, u32), u32> = HashMap::with_capacity(n);
    for (id, &(y, x, ..)) in sites.iter().enumerate() {
        index.insert((y, x), id as u32);
    }

    // Rank within the owning tile equals the id a standalone chiplet build
    // assigns to the same site.
    let mut local_index = vec![0u32; n];
    let mut per_tile: HashMap<u32, u32> = HashMap::new();
    for (id, &(_, _, _, tile, _)) in sites.iter().enumerate() {
        let next = per_tile.entry(tile).or_insert(0);
        local_index[id] = *next;
        *next += 1;
    }

    let mut edges = Vec::new();
    let mut push_edge = |a: u32, b: u32| {
        let (ca, cb) = (sites[a as usize].2, sites[b as usize].2);
        debug_assert!((ca == FrequencyClass::F2) != (cb == FrequencyClass::F2));
        let control = if ca == FrequencyClass::F2 { a } else { b };
        let is_link = mark_chiplets && sites[a as usize].3 != sites[b as usize].3;
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        edges.push(EdgeInfo { a, b, control, is_link });
    };
    for (id, &(y, x, _, _, kind)) in sites.iter().enumerate() {
        let id = id as u32;
        match kind {
            SiteKind::Dense | SiteKind::RightStub => {
                if let Some(&right) = index.get(&(y, x + 1)) {
                    push_edge(id, right);
                }
            }
            SiteKind::Sparse => {
                if let Some(&up) = index.get(&(y - 1, x)) {
                    push_edge(id, up);
                }
                if let Some(&down) = index.get(&(y + 1, x)) {
                    push_edge(id, down);
                }
            }
        }
    }
    edges.sort_by_key(|e| (e.a, e.b));

    let class_of: Vec<_> = sites.iter().map(|s| s.2).collect();
    let chiplet_of: Vec<_> =
        sites.iter().map(|s| if mark_chiplets { s.3 } else { 0 }).collect();
    let pos: Vec<_> = sites.iter().map(|&(y, x, ..)| (y, x)).collect();

    let mut right_stubs: Vec<QubitId> = sites
        .iter()
        .enumerate()
        .filter(|(_, s)| s.4 == SiteKind::RightStub && s.1 == (tile_cols * stride - 1) as u32)
        .map(|(id, _)| id as u32)
        .collect();
    right_stubs.sort_by_key(|&q| pos[q as usize].0);
    let last_sparse_y = (tile_rows * rows * 2 - 1) as u32;
    let mut bottom_stubs: Vec<QubitId> = sites
        .iter()
        .enumerate()
        .filter(|(_, s)| s.4 == SiteKind::Sparse && s.0 == last_sparse_y)
        .map(|(id, _)| id as u32)
        .collect();
    bottom_stubs.sort_by_key(|&q| pos[q as usize].1);

    let chiplet_count = if mark_chiplets { tile_rows * tile_cols } else { 1 };
    Topology::finish(class_of, chiplet_of, pos, local_index, edges, right_stubs, bottom_stubs, chiplet_count)
}

fn dense_class(global_row: usize, col: usize) -> FrequencyClass {
    if col % 2 == 1 {
        FrequencyClass::F2
    } else if (col % 4 == 0) == (global_row % 2 == 0) {
        FrequencyClass::F0
    } else {
        FrequencyClass::F1
    }
}

/// A standalone chiplet: one tile, no links, boundary stubs recorded for
/// later stitching.
pub fn build_chiplet(spec: &ChipletSpec) -> Topology {
    let t = build_lattice(spec, 1, 1, true);
    debug_assert_eq!(t.qubit_count(), spec.size());
    t
}

/// A `rows x cols` grid of chiplet copies joined through their right and
/// bottom stubs; every link edge is controlled by its `F2` stub.
pub fn stitch_mcm(spec: &McmSpec) -> Topology {
    build_lattice(&spec.chiplet, spec.rows, spec.cols, true)
}

/// Single-chip device on the same grid as `stitch_mcm` with the same dims;
/// graph-identical to the stitched MCM with link markings erased.
pub fn build_monolithic(chiplet: &ChipletSpec, rows: usize, cols: usize) -> Topology {
    build_lattice(chiplet, rows, cols, false)
}

/// Pick dims for a monolithic device of exactly `total_qubits`: the
/// expressible tiling with the most square grid, preferring larger tiles and
/// `rows <= cols` on ties.
pub fn monolithic_dims_for(total_qubits: usize) -> Result<(ChipletSpec, usize, usize)> {
    let mut best: Option<(f64, usize, ChipletSpec, usize, usize)> = None;
    for &size in SUPPORTED_CHIPLET_SIZES.iter() {
        if total_qubits == 0 || total_qubits % size != 0 {
            continue;
        }
        let spec = ChipletSpec::new(size)?;
        let slots = total_qubits / size;
        for rows in 1..=slots {
            if slots % rows != 0 {
                continue;
            }
            let cols = slots / rows;
            let aspect = rows.max(cols) as f64 / rows.min(cols) as f64;
            let candidate = (aspect, size, spec, rows, cols);
            let better = match &best {
                None => true,
                Some((best_aspect, best_size, _, best_rows, _)) => {
                    (aspect, std::cmp::Reverse(size), rows)
                        < (*best_aspect, std::cmp::Reverse(*best_size), *best_rows)
                }
            };
            if better {
                best = Some(candidate);
            }
        }
    }
    match best {
        Some((_, _, spec, rows, cols)) => Ok((spec, rows, cols)),
        None => {
            let below = if total_qubits < 10 { 10 } else { total_qubits / 10 * 10 };
            let above = total_qubits / 10 * 10 + 10;
            Err(Error::InexpressibleQubitCount { qubits: total_qubits, below, above })
        }
    }
}

/// Monolithic device of exactly `total_qubits` using `monolithic_dims_for`.
pub fn build_monolithic_sized(total_qubits: usize) -> Result<Topology> {
    let (spec, rows, cols) = monolithic_dims_for(total_qubits)?;
    Ok(build_monolithic(&spec, rows, cols))
}

/// One frequency-pattern rule violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternViolation {
    AdjacentSameClass { a: QubitId, b: QubitId, class: FrequencyClass },
    F2DegreeExceeded { qubit: QubitId, degree: usize },
    F2NeighborsSameClass { qubit: QubitId, n1: QubitId, n2: QubitId, class: FrequencyClass },
    ControlNotF2 { a: QubitId, b: QubitId, control: QubitId },
    EdgeWithoutUniqueF2 { a: QubitId, b: QubitId },
    LinkMarkingMismatch { a: QubitId, b: QubitId, marked: bool },
    Disconnected { reached: usize, total: usize },
}

impl fmt::Display for PatternViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternViolation::AdjacentSameClass { a, b, class } => {
                write!(f, "adjacent qubits {a} and {b} share class {class}")
            }
            PatternViolation::F2DegreeExceeded { qubit, degree } => {
                write!(f, "F2 qubit {qubit} has degree {degree} > 2")
            }
            PatternViolation::F2NeighborsSameClass { qubit, n1, n2, class } => {
                write!(f, "F2 qubit {qubit} has neighbors {n1} and {n2} both of class {class}")
            }
            PatternViolation::ControlNotF2 { a, b, control } => {
                write!(f, "edge ({a}, {b}) control {control} is not its F2 endpoint")
            }
            PatternViolation::EdgeWithoutUniqueF2 { a, b } => {
                write!(f, "edge ({a}, {b}) does not have exactly one F2 endpoint")
            }
            PatternViolation::LinkMarkingMismatch { a, b, marked } => {
                write!(f, "edge ({a}, {b}) link marking {marked} does not match chiplet membership")
            }
            PatternViolation::Disconnected { reached, total } => {
                write!(f, "graph is disconnected: reached {reached} of {total} qubits")
            }
        }
    }
}

/// Check every structural invariant; an empty list means the topology is
/// well formed.
pub fn validate_frequency_pattern(t: &Topology) -> Vec<PatternViolation> {
    let mut out = Vec::new();
    for e in t.edges() {
        let (ca, cb) = (t.class_of(e.a), t.class_of(e.b));
        if ca == cb {
            out.push(PatternViolation::AdjacentSameClass { a: e.a, b: e.b, class: ca });
        }
        let f2_count =
            (ca == FrequencyClass::F2) as usize + (cb == FrequencyClass::F2) as usize;
        if f2_count != 1 {
            out.push(PatternViolation::EdgeWithoutUniqueF2 { a: e.a, b: e.b });
        } else {
            let f2 = if ca == FrequencyClass::F2 { e.a } else { e.b };
            if e.control != f2 {
                out.push(PatternViolation::ControlNotF2 { a: e.a, b: e.b, control: e.control });
            }
        }
        let crosses = t.chiplet_of(e.a) != t.chiplet_of(e.b);
        if e.is_link != crosses {
            out.push(PatternViolation::LinkMarkingMismatch { a: e.a, b: e.b, marked: e.is_link });
        }
    }
    for q in 0..t.qubit_count() as u32 {
        if t.class_of(q) != FrequencyClass::F2 {
            continue;
        }
        let nbrs = t.neighbors(q);
        if nbrs.len() > 2 {
            out.push(PatternViolation::F2DegreeExceeded { qubit: q, degree: nbrs.len() });
        }
        for i in 0..nbrs.len() {
            for j in i + 1..nbrs.len() {
                let (c1, c2) = (t.class_of(nbrs[i]), t.class_of(nbrs[j]));
                if c1 == c2 {
                    out.push(PatternViolation::F2NeighborsSameClass {
                        qubit: q,
                        n1: nbrs[i],
                        n2: nbrs[j],
                        class: c1,
                    });
                }
            }
        }
    }
    if t.qubit_count() > 0 {
        let mut seen = vec![false; t.qubit_count()];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut reached = 1;
        while let Some(q) = stack.pop() {
            for &n in t.neighbors(q) {
                if !seen[n as usize] {
                    seen[n as usize] = true;
                    reached += 1;
                    stack.push(n);
                }
            }
        }
        if reached != t.qubit_count() {
            out.push(PatternViolation::Disconnected { reached, total: t.qubit_count() });
        }
    }
    out
}
