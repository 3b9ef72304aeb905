//! Crate error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported chiplet size {size}; supported sizes are {supported:?}")]
    UnsupportedChipletSize { size: usize, supported: &'static [usize] },

    #[error("{qubits} qubits is not expressible by the tiling generator; nearest expressible counts are {below} and {above}")]
    InexpressibleQubitCount { qubits: usize, below: usize, above: usize },

    #[error("MCM of {total} qubits exceeds the configured cap of {cap}")]
    McmTooLarge { total: usize, cap: usize },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("qubit {0} has no sampled frequency")]
    MissingFrequency(u32),

    #[error("device has no noise assigned")]
    MissingNoise,

    #[error("device has no coupled qubit pairs")]
    NoEdges,

    #[error("chiplet batch mixes different chiplet specs")]
    MixedChipletSpecs,

    #[error("bin entry is not collision-free")]
    BinEntryNotCollisionFree,

    #[error("expected {expected} chiplets for a {rows}x{cols} MCM, got {got}")]
    WrongChipletCount { expected: usize, rows: usize, cols: usize, got: usize },

    #[error("zero denominator in MCM output bound (q_c = {q_c}, slots = {slots})")]
    ZeroDenominator { q_c: usize, slots: usize },

    #[error("calibration data: {0}")]
    Calibration(String),

    #[error("all detuning bins are empty")]
    EmptyBins,

    #[error("infeasible synthesis targets: {0}")]
    InfeasibleTargets(String),

    #[error("{family} requires at least {min} logical qubits{extra}, got {got}")]
    CircuitTooSmall { family: &'static str, min: usize, extra: &'static str, got: usize },

    #[error("circuit with {logical} logical qubits exceeds 80% utilization of a {physical}-qubit device")]
    CircuitTooLarge { logical: usize, physical: usize },

    #[error("routed gate acts on ({a}, {b}) which is not a device edge")]
    GateOffEdge { a: u32, b: u32 },

    #[error("file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
