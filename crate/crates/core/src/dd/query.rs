use rustc_hash::{FxHashMap, FxHashSet};

use super::{Arity, Edge, MatEdge, NodeId, Package, VecEdge};
use crate::error::DdError;
use crate::numerics::{Complex, ONE, ZERO};

impl Package {
    /// Qubit count covered by a non-zero diagram.
    pub fn qubits<const K: usize>(&self, e: Edge<K>) -> Option<usize>
    where
        Self: Arity<K>,
    {
        if e.is_zero() {
            None
        } else {
            Some((self.level(e) + 1) as usize)
        }
    }

    /// Amplitude at `index` (most significant bit first) as the product of
    /// the edge weights along its path.
    pub fn amplitude(&self, v: VecEdge, index: &[bool]) -> Result<Complex, DdError> {
        if v.is_zero() {
            return Ok(ZERO);
        }
        let n = (self.level(v) + 1) as usize;
        if index.len() != n {
            return Err(DdError::IndexLength {
                found: index.len(),
                expected: n,
            });
        }
        let mut w = v.weight;
        let mut e = v;
        for &bit in index {
            let c = self.child(e, bit as usize);
            if c.is_zero() {
                return Ok(ZERO);
            }
            w *= c.weight;
            e = c;
        }
        Ok(w)
    }

    /// Amplitude at an integer index over `n` qubits (bit `n-1` consumed at
    /// the root).
    pub fn amplitude_at(&self, v: VecEdge, n: usize, index: u64) -> Result<Complex, DdError> {
        let bits: Vec<bool> = (0..n).rev().map(|b| index >> b & 1 == 1).collect();
        self.amplitude(v, &bits)
    }

    /// Per-node squared norms of the unit-weight sub-diagrams below `v`.
    pub(crate) fn node_norms(&self, v: VecEdge) -> FxHashMap<NodeId, f64> {
        let mut memo = FxHashMap::default();
        self.norm_rec(v.node, &mut memo);
        memo
    }

    fn norm_rec(&self, id: NodeId, memo: &mut FxHashMap<NodeId, f64>) -> f64 {
        if id.is_terminal() {
            return 1.0;
        }
        if let Some(&n) = memo.get(&id) {
            return n;
        }
        let node = self.vec.get(id);
        let mut total = 0.0;
        for c in &node.children {
            if !c.is_zero() {
                total += c.weight.norm_sqr() * self.norm_rec(c.node, memo);
            }
        }
        memo.insert(id, total);
        total
    }

    /// Sum of squared amplitude magnitudes, computed over shared nodes.
    pub fn squared_norm(&self, v: VecEdge) -> f64 {
        if v.is_zero() {
            return 0.0;
        }
        let mut memo = FxHashMap::default();
        v.weight.norm_sqr() * self.norm_rec(v.node, &mut memo)
    }

    /// Number of distinct non-terminal nodes reachable from `e`.
    pub fn size<const K: usize>(&self, e: Edge<K>) -> usize
    where
        Self: Arity<K>,
    {
        let mut seen = FxHashSet::default();
        let mut stack = vec![e.node];
        while let Some(id) = stack.pop() {
            if id.is_terminal() || !seen.insert(id) {
                continue;
            }
            stack.extend(self.store().get(id).children.iter().map(|c| c.node));
        }
        seen.len()
    }

    /// Dense expansion of a vector diagram over `n` qubits.
    pub fn to_dense_vec(&self, v: VecEdge, n: usize) -> Vec<Complex> {
        let mut out = vec![ZERO; 1 << n];
        self.fill_vec(v, ONE, n, 0, &mut out);
        out
    }

    fn fill_vec(&self, e: VecEdge, acc: Complex, n: usize, offset: usize, out: &mut [Complex]) {
        if e.is_zero() {
            return;
        }
        let w = acc * e.weight;
        if n == 0 {
            out[offset] = w;
            return;
        }
        let half = 1 << (n - 1);
        for b in 0..2 {
            self.fill_vec(self.child(e, b), w, n - 1, offset + b * half, out);
        }
    }

    /// Dense row-major expansion of a matrix diagram over `n` qubits.
    pub fn to_dense_mat(&self, m: MatEdge, n: usize) -> Vec<Complex> {
        let dim = 1usize << n;
        let mut out = vec![ZERO; dim * dim];
        self.fill_mat(m, ONE, n, 0, 0, dim, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn fill_mat(&self, e: MatEdge, acc: Complex, n: usize, row: usize, col: usize, dim: usize, out: &mut [Complex]) {
        if e.is_zero() {
            return;
        }
        let w = acc * e.weight;
        if n == 0 {
            out[row * dim + col] = w;
            return;
        }
        let half = 1 << (n - 1);
        for r in 0..2 {
            for c in 0..2 {
                self.fill_mat(
                    self.child(e, 2 * r + c),
                    w,
                    n - 1,
                    row + r * half,
                    col + c * half,
                    dim,
                    out,
                );
            }
        }
    }

    /// Builds a canonical vector diagram from dense amplitudes.
    pub fn from_dense_vec(&mut self, amps: &[Complex]) -> Result<VecEdge, DdError> {
        if !amps.len().is_power_of_two() {
            return Err(DdError::DenseLength(amps.len()));
        }
        let e = self.build_vec(amps);
        Ok(self.finish(e))
    }

    fn build_vec(&mut self, amps: &[Complex]) -> VecEdge {
        if amps.len() == 1 {
            return VecEdge::terminal(amps[0]);
        }
        let half = amps.len() / 2;
        let lo = self.build_vec(&amps[..half]);
        let hi = self.build_vec(&amps[half..]);
        self.make_node(half.trailing_zeros(), [lo, hi])
    }

    /// Builds a canonical matrix diagram from a dense row-major matrix.
    pub fn from_dense_mat(&mut self, entries: &[Complex]) -> Result<MatEdge, DdError> {
        let dim = (entries.len() as f64).sqrt() as usize;
        if dim * dim != entries.len() || !dim.is_power_of_two() {
            return Err(DdError::DenseLength(entries.len()));
        }
        let e = self.build_mat(entries, dim, 0, 0, dim);
        Ok(self.finish(e))
    }

    fn build_mat(&mut self, entries: &[Complex], dim: usize, row: usize, col: usize, size: usize) -> MatEdge {
        if size == 1 {
            return MatEdge::terminal(entries[row * dim + col]);
        }
        let half = size / 2;
        let mut out = [MatEdge::zero(); 4];
        for r in 0..2 {
            for c in 0..2 {
                out[2 * r + c] = self.build_mat(entries, dim, row + r * half, col + c * half, half);
            }
        }
        self.make_node(half.trailing_zeros(), out)
    }
}
