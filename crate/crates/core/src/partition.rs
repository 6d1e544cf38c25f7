//! Rank decomposition: the top `M` qubit positions form the global area and
//! select the owning rank (most significant bit first); the remaining
//! `N - M` positions are local to each rank.

use serde::{Deserialize, Serialize};

use crate::circuits::Gate;
use crate::dd::{Arity, Edge, MatEdge, Package, VecEdge};
use crate::error::PartitionError;
use crate::swap::QubitLayout;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPlan {
    n_qubits: usize,
    n_global: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Locality {
    Local,
    Global,
}

impl PartitionPlan {
    /// Plan for `ranks` ranks over `n_qubits` qubits. `ranks` must be a power
    /// of two no larger than `2^n_qubits`.
    pub fn new(n_qubits: usize, ranks: usize) -> Result<Self, PartitionError> {
        if !ranks.is_power_of_two() {
            return Err(PartitionError::NotPowerOfTwo(ranks));
        }
        let n_global = ranks.trailing_zeros() as usize;
        if n_global > n_qubits {
            return Err(PartitionError::TooManyRanks {
                global: n_global,
                total: n_qubits,
            });
        }
        Ok(Self { n_qubits, n_global })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_global(&self) -> usize {
        self.n_global
    }

    pub fn n_local(&self) -> usize {
        self.n_qubits - self.n_global
    }

    pub fn ranks(&self) -> usize {
        1 << self.n_global
    }

    fn check_rank(&self, r: usize) -> Result<(), PartitionError> {
        if r >= self.ranks() {
            return Err(PartitionError::RankIndex {
                index: r,
                ranks: self.ranks(),
            });
        }
        Ok(())
    }

    fn check_width<const K: usize>(&self, pkg: &Package, e: Edge<K>, expected: usize) -> Result<(), PartitionError>
    where
        Package: Arity<K>,
    {
        match pkg.qubits(e) {
            Some(found) if found != expected => Err(PartitionError::Width { expected, found }),
            _ => Ok(()),
        }
    }

    /// Bit `i` (from the top) of rank `r`.
    fn rank_bit(&self, r: usize, i: usize) -> usize {
        r >> (self.n_global - 1 - i) & 1
    }

    /// Whether a gate on logical qubits touches the global area under
    /// `layout`.
    pub fn classify_gate(&self, gate: &Gate, layout: &QubitLayout) -> Locality {
        self.classify_physical(&layout.remap_gate(gate))
    }

    /// Same as [`classify_gate`](Self::classify_gate) for a gate already on
    /// physical positions.
    pub fn classify_physical(&self, gate: &Gate) -> Locality {
        if gate.qubits().any(|p| p >= self.n_local()) {
            Locality::Global
        } else {
            Locality::Local
        }
    }

    /// Splits a state into one slice per rank, path weights folded into each
    /// slice's root edge.
    pub fn split_state(&self, pkg: &mut Package, v: VecEdge) -> Result<Vec<VecEdge>, PartitionError> {
        self.check_width(pkg, v, self.n_qubits)?;
        let mut parts = Vec::with_capacity(self.ranks());
        for r in 0..self.ranks() {
            let mut e = v;
            for i in 0..self.n_global {
                if e.is_zero() {
                    break;
                }
                let c = pkg.child(e, self.rank_bit(r, i));
                e = Edge {
                    weight: e.weight * c.weight,
                    node: c.node,
                };
            }
            parts.push(if e.is_zero() { e } else { pkg.scale(e, crate::ONE) });
        }
        Ok(parts)
    }

    /// Inverse of [`split_state`](Self::split_state).
    pub fn merge_state(&self, pkg: &mut Package, parts: &[VecEdge]) -> Result<VecEdge, PartitionError> {
        if parts.len() != self.ranks() {
            return Err(PartitionError::PartCount {
                expected: self.ranks(),
                found: parts.len(),
            });
        }
        for &p in parts {
            self.check_width(pkg, p, self.n_local())?;
        }
        let mut layer = parts.to_vec();
        for level in self.n_local()..self.n_qubits {
            layer = layer
                .chunks(2)
                .map(|pair| pkg.make_node(level as u32, [pair[0], pair[1]]))
                .collect();
        }
        Ok(pkg.scale(layer[0], crate::ONE))
    }

    /// Block `(r, c)` of a full-width matrix: rows owned by rank `r`,
    /// columns by rank `c`. All-zero blocks come back as the zero edge.
    pub fn extract_block(&self, pkg: &mut Package, m: MatEdge, r: usize, c: usize) -> Result<MatEdge, PartitionError> {
        self.check_rank(r)?;
        self.check_rank(c)?;
        self.check_width(pkg, m, self.n_qubits)?;
        let mut e = m;
        for i in 0..self.n_global {
            if e.is_zero() {
                return Ok(e);
            }
            let ch = pkg.child(e, 2 * self.rank_bit(r, i) + self.rank_bit(c, i));
            e = Edge {
                weight: e.weight * ch.weight,
                node: ch.node,
            };
        }
        Ok(if e.is_zero() { e } else { pkg.scale(e, crate::ONE) })
    }
}
