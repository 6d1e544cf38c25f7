use super::{Gate, GateKind};
use crate::dd::{MatEdge, Package};
use crate::swap::QubitLayout;

/// Full-width matrix diagram of a gate whose indices are already physical
/// positions. Untouched levels carry the identity.
///
/// # Panics
/// If an index is `>= n_qubits`.
pub fn gate_dd(pkg: &mut Package, gate: &Gate, n_qubits: usize) -> MatEdge {
    assert!(
        gate.qubits().all(|q| q < n_qubits),
        "gate {gate} outside {n_qubits} qubits"
    );
    let e = match gate.kind {
        GateKind::Swap => {
            let (a, b) = (gate.targets[0], gate.targets[1]);
            let mut controls = gate.controls.clone();
            controls.push(a);
            let outer = controlled(pkg, GateKind::X.matrix(&[]), a, &[b], n_qubits);
            let inner = controlled(pkg, GateKind::X.matrix(&[]), b, &controls, n_qubits);
            let half = pkg.mul_mm_rec(inner, outer);
            pkg.mul_mm_rec(outer, half)
        }
        kind => controlled(
            pkg,
            kind.matrix(&gate.params),
            gate.targets[0],
            &gate.controls,
            n_qubits,
        ),
    };
    pkg.finish(e)
}

/// Full-width matrix diagram of a gate on logical qubits, placed at the
/// physical positions given by `layout`.
pub fn gate_matrix_dd(pkg: &mut Package, gate: &Gate, n_qubits: usize, layout: &QubitLayout) -> MatEdge {
    gate_dd(pkg, &layout.remap_gate(gate), n_qubits)
}

/// `U` on `target`, applied when every control is `|1⟩`.
fn controlled(pkg: &mut Package, u: [crate::Complex; 4], target: usize, controls: &[usize], n: usize) -> MatEdge {
    let zero = MatEdge::zero();
    let mut em = u.map(MatEdge::terminal);
    for z in 0..target {
        let is_control = controls.contains(&z);
        for (i, e) in em.iter_mut().enumerate() {
            *e = if is_control {
                let idle = if i == 0 || i == 3 { pkg.identity(z) } else { zero };
                pkg.make_node(z as u32, [idle, zero, zero, *e])
            } else {
                pkg.make_node(z as u32, [*e, zero, zero, *e])
            };
        }
    }
    let mut e = pkg.make_node(target as u32, em);
    for z in target + 1..n {
        e = if controls.contains(&z) {
            let idle = pkg.identity(z);
            pkg.make_node(z as u32, [idle, zero, zero, e])
        } else {
            pkg.make_node(z as u32, [e, zero, zero, e])
        };
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Complex, ONE, ZERO};

    fn dense(pkg: &mut Package, g: &Gate, n: usize) -> Vec<Complex> {
        let e = gate_dd(pkg, g, n);
        pkg.to_dense_mat(e, n)
    }

    #[test]
    fn rz_zero_is_identity() {
        let mut pkg = Package::new();
        for q in 0..3 {
            let e = gate_dd(&mut pkg, &Gate::rz(0.0, q), 3);
            let id = pkg.identity(3);
            assert!(e.same(&id));
        }
    }

    #[test]
    fn h_on_high_qubit_is_h_kron_i() {
        let mut pkg = Package::new();
        let e = gate_dd(&mut pkg, &Gate::h(1), 2);
        assert_eq!(pkg.size(e), 2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = pkg.to_dense_mat(e, 2);
        let expect = [[h, 0.0, h, 0.0], [0.0, h, 0.0, h], [h, 0.0, -h, 0.0], [0.0, h, 0.0, -h]];
        for r in 0..4 {
            for c in 0..4 {
                assert!((m[r * 4 + c] - Complex::new(expect[r][c], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn cx_is_cnot_permutation() {
        let mut pkg = Package::new();
        // control qubit 0, target qubit 1: |q1 q0⟩ = |01⟩ <-> |11⟩
        let m = dense(&mut pkg, &Gate::cx(0, 1), 2);
        let perm = [0usize, 3, 2, 1];
        for r in 0..4 {
            for c in 0..4 {
                let want = if perm[c] == r { ONE } else { ZERO };
                assert_eq!(m[r * 4 + c], want, "({r},{c})");
            }
        }
    }

    #[test]
    fn swap_and_cswap_permute_basis_states() {
        let mut pkg = Package::new();
        let n = 3;
        for g in [
            Gate::swap(0, 2),
            Gate::swap(2, 1),
            Gate::cswap(1, 0, 2),
            Gate::cswap(0, 2, 1),
        ] {
            let m = dense(&mut pkg, &g, n);
            for c in 0..8usize {
                let bit = |q: usize| c >> q & 1;
                let active = g.controls.iter().all(|&q| bit(q) == 1);
                let (a, b) = (g.targets[0], g.targets[1]);
                let r = if active && bit(a) != bit(b) {
                    c ^ (1 << a) ^ (1 << b)
                } else {
                    c
                };
                for row in 0..8 {
                    let want = if row == r { 1.0 } else { 0.0 };
                    assert!(
                        (m[row * 8 + c].re - want).abs() < 1e-14 && m[row * 8 + c].im.abs() < 1e-14,
                        "{g} col {c}"
                    );
                }
            }
        }
    }

    #[test]
    fn layout_places_gate_physically() {
        let mut pkg = Package::new();
        let mut layout = QubitLayout::identity(3);
        layout.swap_positions(0, 2);
        let a = gate_matrix_dd(&mut pkg, &Gate::h(0), 3, &layout);
        let b = gate_dd(&mut pkg, &Gate::h(2), 3);
        assert!(a.same(&b));
    }

    mod props {
        use super::*;
        use crate::circuits::random_circuit;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn gate_dds_are_unitary(n in 1usize..6, seed in any::<u64>()) {
                let mut pkg = Package::new();
                let c = random_circuit(n, 4, seed);
                let dim = 1usize << n;
                for g in c.gates() {
                    let u = dense(&mut pkg, g, n);
                    for i in 0..dim {
                        for j in 0..dim {
                            let mut s = ZERO;
                            for k in 0..dim {
                                s += u[k * dim + i].conj() * u[k * dim + j];
                            }
                            let want = if i == j { ONE } else { ZERO };
                            prop_assert!((s - want).norm() < 1e-9, "{} not unitary", g);
                        }
                    }
                }
            }
        }
    }
}
