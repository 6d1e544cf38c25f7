//! Recursive add / multiply / Kronecker operations.
//!
//! The `_rec` functions work on raw (un-interned) edge weights; the public
//! wrappers validate operand levels and intern the returned root weight.

use super::{Arity, Edge, MatEdge, NodeId, Package, VecEdge};
use crate::error::DdError;
use crate::numerics::{approx_zero, bits, Complex, ONE};

impl Package {
    pub(crate) fn add_rec<const K: usize>(&mut self, x: Edge<K>, y: Edge<K>) -> Edge<K>
    where
        Self: Arity<K>,
    {
        let tol = self.tolerance();
        if approx_zero(x.weight, tol) {
            return if approx_zero(y.weight, tol) { Edge::zero() } else { y };
        }
        if approx_zero(y.weight, tol) {
            return x;
        }
        if x.node == y.node {
            let w = x.weight + y.weight;
            return if approx_zero(w, tol) {
                Edge::zero()
            } else {
                Edge {
                    weight: w,
                    node: x.node,
                }
            };
        }
        // Factor x's weight out so the cached result is for a unit-weight x.
        let ratio = y.weight / x.weight;
        let key = (x.node, y.node, bits(ratio));
        if let Some(r) = self.add_cache().get(&key) {
            return r.scaled(x.weight);
        }
        let xn = *self.store().get(x.node);
        let yn = *self.store().get(y.node);
        debug_assert_eq!(xn.level, yn.level, "add operands on different levels");
        let mut out = [Edge::zero(); K];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.add_rec(xn.children[i], yn.children[i].scaled(ratio));
        }
        let r = self.make_node(xn.level, out);
        self.add_cache().insert(key, r);
        r.scaled(x.weight)
    }

    pub(crate) fn mul_mv_rec(&mut self, m: MatEdge, v: VecEdge) -> VecEdge {
        let tol = self.tolerance();
        if approx_zero(m.weight, tol) || approx_zero(v.weight, tol) {
            return VecEdge::zero();
        }
        let w = m.weight * v.weight;
        if m.node.is_terminal() {
            debug_assert!(v.node.is_terminal());
            return VecEdge::terminal(w);
        }
        if self.is_identity_node(m.node) {
            return VecEdge {
                weight: w,
                node: v.node,
            };
        }
        let key = (m.node, v.node);
        if let Some(r) = self.caches.mul_mv.get(&key) {
            return r.scaled(w);
        }
        let mn = *self.mat.get(m.node);
        let vn = *self.vec.get(v.node);
        debug_assert_eq!(mn.level, vn.level, "multiply operands on different levels");
        let mut out = [VecEdge::zero(); 2];
        for (row, slot) in out.iter_mut().enumerate() {
            let a = self.mul_mv_rec(mn.children[2 * row], vn.children[0]);
            let b = self.mul_mv_rec(mn.children[2 * row + 1], vn.children[1]);
            *slot = self.add_rec(a, b);
        }
        let r = self.make_node(mn.level, out);
        self.caches.mul_mv.insert(key, r);
        r.scaled(w)
    }

    pub(crate) fn mul_mm_rec(&mut self, a: MatEdge, b: MatEdge) -> MatEdge {
        let tol = self.tolerance();
        if approx_zero(a.weight, tol) || approx_zero(b.weight, tol) {
            return MatEdge::zero();
        }
        let w = a.weight * b.weight;
        if a.node.is_terminal() {
            debug_assert!(b.node.is_terminal());
            return MatEdge::terminal(w);
        }
        if self.is_identity_node(a.node) {
            return MatEdge {
                weight: w,
                node: b.node,
            };
        }
        if self.is_identity_node(b.node) {
            return MatEdge {
                weight: w,
                node: a.node,
            };
        }
        let key = (a.node, b.node);
        if let Some(r) = self.caches.mul_mm.get(&key) {
            return r.scaled(w);
        }
        let an = *self.mat.get(a.node);
        let bn = *self.mat.get(b.node);
        debug_assert_eq!(an.level, bn.level, "multiply operands on different levels");
        let mut out = [MatEdge::zero(); 4];
        for i in 0..2 {
            for j in 0..2 {
                let p = self.mul_mm_rec(an.children[2 * i], bn.children[j]);
                let q = self.mul_mm_rec(an.children[2 * i + 1], bn.children[2 + j]);
                out[2 * i + j] = self.add_rec(p, q);
            }
        }
        let r = self.make_node(an.level, out);
        self.caches.mul_mm.insert(key, r);
        r.scaled(w)
    }

    /// Kronecker product of the unit-weight diagrams at `hi` and `lo`; `hi`'s
    /// terminal edges are re-rooted onto `lo`.
    fn kron_rec<const K: usize>(&mut self, hi: NodeId, lo: NodeId, lo_qubits: u32) -> Edge<K>
    where
        Self: Arity<K>,
    {
        if hi.is_terminal() {
            return Edge { weight: ONE, node: lo };
        }
        let key = (hi, lo);
        if let Some(r) = self.kron_cache().get(&key) {
            return r;
        }
        let hn = *self.store().get(hi);
        let mut out = [Edge::zero(); K];
        for (i, slot) in out.iter_mut().enumerate() {
            let c = hn.children[i];
            if !c.is_zero() {
                *slot = self.kron_rec(c.node, lo, lo_qubits).scaled(c.weight);
            }
        }
        let r = self.make_node(hn.level + lo_qubits, out);
        self.kron_cache().insert(key, r);
        r
    }

    fn kron<const K: usize>(&mut self, hi: Edge<K>, lo: Edge<K>) -> Edge<K>
    where
        Self: Arity<K>,
    {
        if hi.is_zero() || lo.is_zero() {
            return Edge::zero();
        }
        let lo_qubits = (self.level(lo) + 1) as u32;
        let r = self
            .kron_rec::<K>(hi.node, lo.node, lo_qubits)
            .scaled(hi.weight * lo.weight);
        self.finish(r)
    }

    fn check_levels<const K: usize>(&self, a: Edge<K>, b: Edge<K>) -> Result<(), DdError>
    where
        Self: Arity<K>,
    {
        if a.is_zero() || b.is_zero() {
            return Ok(());
        }
        let (la, lb) = (self.level(a), self.level(b));
        if la != lb {
            return Err(DdError::LevelMismatch(la, lb));
        }
        Ok(())
    }

    /// Elementwise sum of two vector diagrams over the same qubits.
    pub fn add_vec(&mut self, a: VecEdge, b: VecEdge) -> Result<VecEdge, DdError> {
        self.check_levels(a, b)?;
        let r = self.add_rec(a, b);
        Ok(self.finish(r))
    }

    /// Elementwise sum of two matrix diagrams over the same qubits.
    pub fn add_mat(&mut self, a: MatEdge, b: MatEdge) -> Result<MatEdge, DdError> {
        self.check_levels(a, b)?;
        let r = self.add_rec(a, b);
        Ok(self.finish(r))
    }

    /// Matrix-vector product.
    pub fn multiply(&mut self, m: MatEdge, v: VecEdge) -> Result<VecEdge, DdError> {
        if !m.is_zero() && !v.is_zero() {
            let (lm, lv) = (self.level(m), self.level(v));
            if lm != lv {
                return Err(DdError::LevelMismatch(lm, lv));
            }
        }
        let r = self.mul_mv_rec(m, v);
        Ok(self.finish(r))
    }

    /// Matrix-matrix product `a · b`.
    pub fn multiply_mat(&mut self, a: MatEdge, b: MatEdge) -> Result<MatEdge, DdError> {
        self.check_levels(a, b)?;
        let r = self.mul_mm_rec(a, b);
        Ok(self.finish(r))
    }

    /// Kronecker product with `hi` on the more significant qubits.
    pub fn kron_mat(&mut self, hi: MatEdge, lo: MatEdge) -> MatEdge {
        self.kron(hi, lo)
    }

    /// Kronecker (tensor) product of two states, `hi` on the upper qubits.
    pub fn kron_vec(&mut self, hi: VecEdge, lo: VecEdge) -> VecEdge {
        self.kron(hi, lo)
    }

    /// Multiplies an edge by a scalar.
    pub fn scale<const K: usize>(&mut self, e: Edge<K>, c: Complex) -> Edge<K>
    where
        Self: Arity<K>,
    {
        let r = e.scaled(c);
        self.finish(r)
    }
}
