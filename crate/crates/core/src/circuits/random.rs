use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Circuit, Gate, GateKind};

const SINGLE: [GateKind; 12] = [
    GateKind::H,
    GateKind::X,
    GateKind::Y,
    GateKind::Z,
    GateKind::S,
    GateKind::Sdg,
    GateKind::T,
    GateKind::Tdg,
    GateKind::Rx,
    GateKind::Ry,
    GateKind::Rz,
    GateKind::Phase,
];

/// Seeded random circuit over the whole gate set: single-qubit gates,
/// CX, controlled phase, SWAP, CCX and CSWAP (the wider ones only when the
/// register is wide enough).
pub fn random_circuit(n_qubits: usize, len: usize, seed: u64) -> Circuit {
    assert!(n_qubits > 0, "random circuit needs at least one qubit");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut qubits: Vec<usize> = (0..n_qubits).collect();
    let mut c = Circuit::new(n_qubits);
    for _ in 0..len {
        let shape = match n_qubits {
            1 => 0,
            2 => rng.gen_range(0..4),
            _ => rng.gen_range(0..6),
        };
        qubits.shuffle(&mut rng);
        let gate = match shape {
            0 => {
                let kind = SINGLE[rng.gen_range(0..SINGLE.len())];
                let params = (0..kind.param_count())
                    .map(|_| rng.gen_range(-std::f64::consts::TAU..std::f64::consts::TAU))
                    .collect();
                Gate::new(kind, params, vec![qubits[0]], vec![])
            }
            1 => Gate::cx(qubits[0], qubits[1]),
            2 => Gate::mcphase(rng.gen_range(0.0..std::f64::consts::TAU), vec![qubits[0]], qubits[1]),
            3 => Gate::swap(qubits[0], qubits[1]),
            4 => Gate::ccx(qubits[0], qubits[1], qubits[2]),
            _ => Gate::cswap(qubits[0], qubits[1], qubits[2]),
        };
        c.push(gate).expect("generated gate is valid");
    }
    c
}
