//! Distributed decision-diagram (QMDD) quantum circuit simulation.
//!
//! The statevector of an `N`-qubit circuit is split into `2^M` equal slices,
//! one per simulated rank, each slice held as a decision diagram in that
//! rank's own [`dd::Package`]. Gates touching only the low `N - M` qubits are
//! applied locally; gates touching the top `M` qubits go through a
//! block-decomposed multiply under a ring or broadcast exchange schedule.
//! SWAP insertion can move upcoming qubits out of the global area first.

pub mod bench;
pub mod circuits;
pub mod dd;
pub mod engine;
pub mod error;
pub mod numerics;
pub mod partition;
pub mod swap;
pub mod transport;

pub use dd::{Edge, MatEdge, NodeId, Package, VecEdge};
pub use numerics::{Complex, ONE, ZERO};
