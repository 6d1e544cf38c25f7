//! Circuit representation, OpenQASM 2.0 input/output and benchmark
//! generators.

mod gate;
mod gate_dd;
pub mod qasm;
mod qcbm;
mod random;
pub mod shor;

pub use gate::{Circuit, Gate, GateKind};
pub use gate_dd::{gate_dd, gate_matrix_dd};
pub use qasm::{parse_qasm, to_qasm};
pub use qcbm::gen_qcbm;
pub use random::random_circuit;
pub use shor::gen_shor;
