//! Qubit layout tracking and SWAP planning that moves upcoming qubits out of
//! the global (top) positions.
//!
//! Two planners are provided. [`plan_swaps_v1`] keeps both areas sorted by
//! original qubit index at the cost of extra swaps; [`plan_swaps_v2`] issues
//! one swap per qubit that has to cross the area boundary.

use serde::{Deserialize, Serialize};

use crate::circuits::{Circuit, Gate};
use crate::partition::PartitionPlan;

/// Bijection between logical qubits and physical positions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitLayout {
    perm: Vec<usize>,
    inv: Vec<usize>,
}

impl QubitLayout {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            inv: (0..n).collect(),
        }
    }

    /// Builds a layout from its logical-to-physical map.
    pub fn from_perm(perm: Vec<usize>) -> Option<Self> {
        let mut inv = vec![usize::MAX; perm.len()];
        for (l, &p) in perm.iter().enumerate() {
            if p >= perm.len() || inv[p] != usize::MAX {
                return None;
            }
            inv[p] = l;
        }
        Some(Self { perm, inv })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(l, &p)| l == p)
    }

    /// Physical position of a logical qubit.
    pub fn physical(&self, logical: usize) -> usize {
        self.perm[logical]
    }

    /// Logical qubit at a physical position.
    pub fn logical(&self, physical: usize) -> usize {
        self.inv[physical]
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn inverse_perm(&self) -> &[usize] {
        &self.inv
    }

    /// Exchanges the qubits held at two physical positions.
    pub fn swap_positions(&mut self, p: usize, q: usize) {
        let (a, b) = (self.inv[p], self.inv[q]);
        self.inv.swap(p, q);
        self.perm[a] = q;
        self.perm[b] = p;
    }

    /// Translates a gate's logical indices to physical positions.
    pub fn remap_gate(&self, gate: &Gate) -> Gate {
        gate.mapped(|q| self.perm[q])
    }

    /// Maps a physical basis index to the logical one.
    pub fn to_logical_index(&self, physical: u64) -> u64 {
        (0..self.len()).fold(0, |acc, p| acc | (physical >> p & 1) << self.inv[p])
    }

    /// Maps a logical basis index to the physical one.
    pub fn to_physical_index(&self, logical: u64) -> u64 {
        (0..self.len()).fold(0, |acc, l| acc | (logical >> l & 1) << self.perm[l])
    }
}

/// Ordered physical-position transpositions and the layout they lead to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwapPlan {
    pub swaps: Vec<(usize, usize)>,
    pub result: QubitLayout,
}

impl SwapPlan {
    pub fn len(&self) -> usize {
        self.swaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.swaps.is_empty()
    }
}

/// Which logical qubits should occupy the global area next.
///
/// Scans forward from gate `from` (inclusive), collecting touched logical
/// qubits in first-use order (targets before controls) until the local area
/// is full. If the circuit ends first, the set is padded with qubits that
/// are local now, lowest physical position first. The complement is
/// returned in ascending order.
pub fn lookahead_globals(circuit: &Circuit, from: usize, plan: &PartitionPlan, layout: &QubitLayout) -> Vec<usize> {
    let n = plan.n_qubits();
    let n_local = plan.n_local();
    let mut is_local = vec![false; n];
    let mut count = 0;
    'scan: for gate in circuit.gates().iter().skip(from) {
        for q in gate.qubits() {
            if count == n_local {
                break 'scan;
            }
            if !is_local[q] {
                is_local[q] = true;
                count += 1;
            }
        }
    }
    for p in 0..n {
        if count == n_local {
            break;
        }
        let q = layout.logical(p);
        if !is_local[q] {
            is_local[q] = true;
            count += 1;
        }
    }
    (0..n).filter(|&q| !is_local[q]).collect()
}

/// Order-preserving plan: local qubits sorted by original index followed by
/// the new global qubits sorted by original index, reached by fixing
/// positions front to back.
pub fn plan_swaps_v1(layout: &QubitLayout, next_global: &[usize]) -> SwapPlan {
    let n = layout.len();
    let mut is_global = vec![false; n];
    for &q in next_global {
        is_global[q] = true;
    }
    let target: Vec<usize> = (0..n)
        .filter(|&q| !is_global[q])
        .chain((0..n).filter(|&q| is_global[q]))
        .collect();
    let mut result = layout.clone();
    let mut swaps = Vec::new();
    for (p, &want) in target.iter().enumerate() {
        if result.logical(p) != want {
            let from = result.physical(want);
            swaps.push((p, from));
            result.swap_positions(p, from);
        }
    }
    SwapPlan { swaps, result }
}

/// Minimal plan: each qubit leaving the global area trades places with one
/// entering it, both sides taken in ascending original index.
pub fn plan_swaps_v2(layout: &QubitLayout, next_global: &[usize], plan: &PartitionPlan) -> SwapPlan {
    let n_local = plan.n_local();
    let n = layout.len();
    let mut wanted = vec![false; n];
    for &q in next_global {
        wanted[q] = true;
    }
    let outgoing: Vec<usize> = (0..n)
        .filter(|&q| layout.physical(q) >= n_local && !wanted[q])
        .collect();
    let incoming: Vec<usize> = (0..n).filter(|&q| layout.physical(q) < n_local && wanted[q]).collect();
    debug_assert_eq!(outgoing.len(), incoming.len());
    let mut result = layout.clone();
    let mut swaps = Vec::new();
    for (&o, &i) in outgoing.iter().zip(&incoming) {
        let (a, b) = (result.physical(o), result.physical(i));
        swaps.push((a.min(b), a.max(b)));
        result.swap_positions(a, b);
    }
    SwapPlan { swaps, result }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(layout: &QubitLayout) -> String {
        (0..layout.len())
            .map(|p| (b'a' + layout.logical(p) as u8) as char)
            .collect()
    }

    #[test]
    fn v1_single_global_example() {
        let l = QubitLayout::identity(5);
        let p = plan_swaps_v1(&l, &[2]);
        assert_eq!(p.swaps, vec![(2, 3), (3, 4)]);
        assert_eq!(names(&p.result), "abdec");
    }

    #[test]
    fn v2_single_global_example() {
        let l = QubitLayout::identity(5);
        let plan = PartitionPlan::new(5, 2).unwrap();
        let p = plan_swaps_v2(&l, &[2], &plan);
        assert_eq!(p.swaps, vec![(2, 4)]);
        assert_eq!(names(&p.result), "abedc");
    }

    #[test]
    fn v1_two_globals() {
        let l = QubitLayout::identity(6);
        let p = plan_swaps_v1(&l, &[1, 4]);
        assert_eq!(names(&p.result), "acdfbe");
        let mut replay = l.clone();
        for &(a, b) in &p.swaps {
            replay.swap_positions(a, b);
        }
        assert_eq!(replay, p.result);
    }

    #[test]
    fn empty_plans_when_in_place() {
        let l = QubitLayout::identity(5);
        let plan = PartitionPlan::new(5, 2).unwrap();
        assert!(plan_swaps_v1(&l, &[4]).is_empty());
        assert!(plan_swaps_v2(&l, &[4], &plan).is_empty());
    }

    #[test]
    fn remap_after_v1_layout() {
        let p = plan_swaps_v1(&QubitLayout::identity(5), &[2]);
        let g = p.result.remap_gate(&Gate::h(2));
        assert_eq!(g, Gate::h(4));
        let back = QubitLayout::from_perm(p.result.inverse_perm().to_vec()).unwrap();
        assert_eq!(back.remap_gate(&g), Gate::h(2));
        assert_eq!(QubitLayout::identity(5).remap_gate(&Gate::cx(1, 3)), Gate::cx(1, 3));
    }

    #[test]
    fn lookahead_examples() {
        let plan = PartitionPlan::new(3, 2).unwrap();
        let c = Circuit::from_gates(3, vec![Gate::h(0), Gate::cx(0, 1), Gate::h(1)]).unwrap();
        assert_eq!(lookahead_globals(&c, 0, &plan, &QubitLayout::identity(3)), vec![2]);

        let plan5 = PartitionPlan::new(5, 2).unwrap();
        let c = Circuit::from_gates(5, vec![Gate::h(4), Gate::cx(0, 1), Gate::x(3), Gate::h(1)]).unwrap();
        assert_eq!(lookahead_globals(&c, 0, &plan5, &QubitLayout::identity(5)), vec![2]);

        // nothing left to scan: the current global set stays
        assert_eq!(lookahead_globals(&c, 4, &plan5, &QubitLayout::identity(5)), vec![4]);
        let mut l = QubitLayout::identity(5);
        l.swap_positions(1, 4);
        assert_eq!(lookahead_globals(&c, 4, &plan5, &l), vec![1]);
    }

    #[test]
    fn index_mapping_round_trip() {
        let l = QubitLayout::from_perm(vec![2, 0, 1]).unwrap();
        // logical qubit 0 lives at position 2
        assert_eq!(l.to_physical_index(0b001), 0b100);
        for i in 0..8 {
            assert_eq!(l.to_logical_index(l.to_physical_index(i)), i);
        }
        assert!(QubitLayout::from_perm(vec![0, 0]).is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use proptest::sample::subsequence;

        fn layout_and_globals() -> impl Strategy<Value = (QubitLayout, Vec<usize>, usize)> {
            (2usize..9).prop_flat_map(|n| {
                (Just((0..n).collect::<Vec<_>>()).prop_shuffle(), 1usize..n)
                    .prop_flat_map(move |(perm, m)| (Just(perm), subsequence((0..n).collect::<Vec<_>>(), m), Just(m)))
                    .prop_map(|(perm, g, m)| (QubitLayout::from_perm(perm).unwrap(), g, m))
            })
        }

        proptest! {
            #[test]
            fn plans_replay_and_v2_is_minimal((layout, globals, m) in layout_and_globals()) {
                let n = layout.len();
                let plan = PartitionPlan::new(n, 1 << m).unwrap();
                let v1 = plan_swaps_v1(&layout, &globals);
                let v2 = plan_swaps_v2(&layout, &globals, &plan);
                for p in [&v1, &v2] {
                    let mut replay = layout.clone();
                    for &(a, b) in &p.swaps {
                        prop_assert_ne!(a, b);
                        replay.swap_positions(a, b);
                    }
                    prop_assert_eq!(&replay, &p.result);
                    let mut now: Vec<usize> = (plan.n_local()..n).map(|q| p.result.logical(q)).collect();
                    now.sort_unstable();
                    prop_assert_eq!(&now, &globals);
                }
                let crossing = globals.iter().filter(|&&q| layout.physical(q) < plan.n_local()).count();
                prop_assert_eq!(v2.len(), crossing);
                prop_assert!(v2.len() <= v1.len());
                let order: Vec<usize> = (0..n).map(|p| v1.result.logical(p)).collect();
                let (local, global) = order.split_at(plan.n_local());
                prop_assert!(local.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(global.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
