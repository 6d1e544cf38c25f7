use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Circuit, Gate, GateKind};
use crate::error::CircuitError;

/// Quantum circuit Born machine ansatz. Each layer applies RZ, RX, RZ to
/// every qubit in turn, then a CX ring `q -> q+1 (mod n)`. Angles are drawn
/// uniformly from `[0, 2π)` in gate order from one seeded stream.
pub fn gen_qcbm(n_qubits: usize, layers: usize, seed: u64) -> Result<Circuit, CircuitError> {
    if n_qubits < 2 {
        return Err(CircuitError::Argument(format!(
            "QCBM needs at least 2 qubits, got {n_qubits}"
        )));
    }
    if layers == 0 {
        return Err(CircuitError::Argument("QCBM needs at least one layer".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n_qubits);
    for _ in 0..layers {
        for q in 0..n_qubits {
            for kind in [GateKind::Rz, GateKind::Rx, GateKind::Rz] {
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                c.push(Gate::new(kind, vec![theta], vec![q], vec![]))?;
            }
        }
        for q in 0..n_qubits {
            c.push(Gate::cx(q, (q + 1) % n_qubits))?;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_qubit_layer_fixture() {
        let c = gen_qcbm(3, 1, 11).unwrap();
        let shape: Vec<(&str, Vec<usize>, Vec<usize>)> = c
            .gates()
            .iter()
            .map(|g| (g.kind.name(), g.controls.clone(), g.targets.clone()))
            .collect();
        let expected: Vec<(&str, Vec<usize>, Vec<usize>)> = vec![
            ("rz", vec![], vec![0]),
            ("rx", vec![], vec![0]),
            ("rz", vec![], vec![0]),
            ("rz", vec![], vec![1]),
            ("rx", vec![], vec![1]),
            ("rz", vec![], vec![1]),
            ("rz", vec![], vec![2]),
            ("rx", vec![], vec![2]),
            ("rz", vec![], vec![2]),
            ("x", vec![0], vec![1]),
            ("x", vec![1], vec![2]),
            ("x", vec![2], vec![0]),
        ];
        assert_eq!(shape, expected);
        for g in &c.gates()[..9] {
            assert!((0.0..std::f64::consts::TAU).contains(&g.params[0]));
        }
    }

    #[test]
    fn gate_counts() {
        assert_eq!(gen_qcbm(3, 1, 0).unwrap().len(), 12);
        assert_eq!(gen_qcbm(3, 8, 0).unwrap().len(), 96);
        assert_eq!(gen_qcbm(12, 8, 0).unwrap().len(), 8 * (36 + 12));
    }

    #[test]
    fn seeded() {
        assert_eq!(gen_qcbm(5, 3, 42).unwrap(), gen_qcbm(5, 3, 42).unwrap());
        assert_ne!(gen_qcbm(5, 3, 42).unwrap(), gen_qcbm(5, 3, 43).unwrap());
        assert!(gen_qcbm(1, 3, 0).is_err());
        assert!(gen_qcbm(3, 0, 0).is_err());
    }
}
