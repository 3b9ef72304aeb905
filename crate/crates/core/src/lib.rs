//! Yield and performance modeling for fixed-frequency transmon quantum chips.
//!
//! The crate builds heavy-hex qubit topologies (single chiplets, monolithic
//! devices, and stitched multi-chip modules), samples fabrication variation,
//! classifies devices against the seven frequency-collision criteria, and
//! compares MCM against monolithic architectures on collision-free yield,
//! average two-qubit gate infidelity, and benchmark fidelity products.
//!
//! Everything is deterministic: sampling is keyed by `(master_seed, trial,
//! qubit)` through counter-based ChaCha streams, so results are identical for
//! any worker count.

pub mod assembly;
pub mod bench;
pub mod collision;
pub mod error;
pub mod fabsim;
pub mod io;
pub mod lattice;
pub mod noise;
pub mod seeds;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
