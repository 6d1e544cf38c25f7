//! Canonical QMDD vector and matrix decision diagrams.
//!
//! A [`Package`] owns everything a rank needs to build and combine diagrams:
//! the complex value table, one node store per arity with its unique table,
//! and the compute caches. Diagrams are quasi-reduced: every non-zero edge
//! out of a node at level `l` points to a node at level `l - 1`, or to the
//! terminal when `l == 0`. Qubit 0 is the bottom level and the least
//! significant bit of an amplitude index.
//!
//! Node normalization divides all child weights by the child weight of
//! largest magnitude (lowest index on ties) and pushes the divisor onto the
//! incoming edge, so the chosen child always carries exactly [`ONE`].

mod cache;
mod ops;
mod query;


use rustc_hash::FxHashMap;

use crate::error::DdError;
use crate::numerics::{approx_zero, bits, Complex, ComplexTable, ONE, ZERO};

pub use cache::ComputeTable;

/// Handle of a node inside one [`Package`]'s store.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NodeId(u32);

impl NodeId {
    pub const TERMINAL: NodeId = NodeId(u32::MAX);

    #[inline]
    pub fn is_terminal(self) -> bool {
        self == Self::TERMINAL
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Weighted reference to a node with `K` children (2 for vectors, 4 for
/// matrices) or to the terminal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge<const K: usize> {
    pub weight: Complex,
    pub node: NodeId,
}

pub type VecEdge = Edge<2>;
pub type MatEdge = Edge<4>;

impl<const K: usize> Edge<K> {
    /// The canonical zero edge.
    pub const fn zero() -> Self {
        Self {
            weight: ZERO,
            node: NodeId::TERMINAL,
        }
    }

    /// Terminal edge with weight one (the scalar 1 / a 0-qubit state).
    pub const fn one() -> Self {
        Self {
            weight: ONE,
            node: NodeId::TERMINAL,
        }
    }

    pub const fn terminal(weight: Complex) -> Self {
        Self {
            weight,
            node: NodeId::TERMINAL,
        }
    }

    /// True for the canonical zero edge.
    #[inline]
    pub fn is_zero(&self) -> bool {
        self.node.is_terminal() && self.weight.re == 0.0 && self.weight.im == 0.0
    }

    #[inline]
    pub fn is_terminal(&self) -> bool {
        self.node.is_terminal()
    }

    /// Bitwise identity: same node handle and bit-identical weight.
    #[inline]
    pub fn same(&self, other: &Self) -> bool {
        self.node == other.node && bits(self.weight) == bits(other.weight)
    }

    #[inline]
    pub(crate) fn key(&self) -> EdgeKey {
        let (re, im) = bits(self.weight);
        (re, im, self.node.0)
    }

    #[inline]
    pub(crate) fn scaled(self, w: Complex) -> Self {
        if self.is_zero() {
            self
        } else {
            Self {
                weight: self.weight * w,
                node: self.node,
            }
        }
    }
}

pub(crate) type EdgeKey = (u64, u64, u32);

#[derive(Clone, Copy, Debug)]
pub(crate) struct Node<const K: usize> {
    pub(crate) level: u32,
    pub(crate) children: [Edge<K>; K],
    /// Matrix nodes only: the node is an identity on its levels.
    pub(crate) ident: bool,
}

/// Node storage and unique table for one arity.
#[doc(hidden)]
#[derive(Debug, Default)]
pub struct Store<const K: usize> {
    nodes: Vec<Node<K>>,
    live: Vec<bool>,
    free: Vec<u32>,
    unique: Vec<FxHashMap<[EdgeKey; K], NodeId>>,
}

impl<const K: usize> Store<K> {
    fn new() -> Self {
        Self {
            nodes: Vec::new(),
            live: Vec::new(),
            free: Vec::new(),
            unique: Vec::new(),
        }
    }

    #[inline]
    pub(crate) fn get(&self, id: NodeId) -> &Node<K> {
        &self.nodes[id.index()]
    }

    pub(crate) fn live_count(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    fn lookup_or_insert(&mut self, level: u32, children: [Edge<K>; K], ident: bool) -> NodeId {
        let key: [EdgeKey; K] = std::array::from_fn(|i| children[i].key());
        let lvl = level as usize;
        if self.unique.len() <= lvl {
            self.unique.resize_with(lvl + 1, FxHashMap::default);
        }
        if let Some(&id) = self.unique[lvl].get(&key) {
            return id;
        }
        let node = Node { level, children, ident };
        let id = match self.free.pop() {
            Some(slot) => {
                self.nodes[slot as usize] = node;
                self.live[slot as usize] = true;
                NodeId(slot)
            }
            None => {
                let slot = u32::try_from(self.nodes.len())
                    .ok()
                    .filter(|&s| s != u32::MAX)
                    .expect("node store exhausted");
                self.nodes.push(node);
                self.live.push(true);
                NodeId(slot)
            }
        };
        self.unique[lvl].insert(key, id);
        id
    }

    fn mark(&self, roots: impl IntoIterator<Item = NodeId>, marked: &mut [bool]) {
        let mut stack: Vec<NodeId> = roots.into_iter().filter(|n| !n.is_terminal()).collect();
        while let Some(id) = stack.pop() {
            if marked[id.index()] {
                continue;
            }
            marked[id.index()] = true;
            for c in &self.nodes[id.index()].children {
                if !c.node.is_terminal() && !marked[c.node.index()] {
                    stack.push(c.node);
                }
            }
        }
    }

    fn sweep(&mut self, marked: &[bool]) -> usize {
        let mut freed = 0;
        for (slot, alive) in self.live.iter_mut().enumerate() {
            if *alive && !marked[slot] {
                let node = &self.nodes[slot];
                let key: [EdgeKey; K] = std::array::from_fn(|i| node.children[i].key());
                self.unique[node.level as usize].remove(&key);
                *alive = false;
                self.free.push(slot as u32);
                freed += 1;
            }
        }
        freed
    }

    fn live_weights(&self) -> impl Iterator<Item = Complex> + '_ {
        self.nodes
            .iter()
            .zip(&self.live)
            .filter(|(_, &alive)| alive)
            .flat_map(|(n, _)| n.children.iter().map(|c| c.weight))
    }
}

/// Rank-local decision-diagram manager.
pub struct Package {
    pub(crate) complex: ComplexTable,
    pub(crate) vec: Store<2>,
    pub(crate) mat: Store<4>,
    pub(crate) caches: cache::Caches,
    identities: Vec<MatEdge>,
}

impl Default for Package {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for Package {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Package")
            .field("vector_nodes", &self.vec.live_count())
            .field("matrix_nodes", &self.mat.live_count())
            .field("complex_values", &self.complex.len())
            .finish()
    }
}

/// Selects the store for a given arity.
#[doc(hidden)]
pub trait Arity<const K: usize> {
    fn store(&self) -> &Store<K>;
    fn store_mut(&mut self) -> &mut Store<K>;
    fn add_cache(&mut self) -> &mut ComputeTable<cache::AddKey, Edge<K>>;
    fn kron_cache(&mut self) -> &mut ComputeTable<(NodeId, NodeId), Edge<K>>;
}

impl Arity<2> for Package {
    #[inline]
    fn store(&self) -> &Store<2> {
        &self.vec
    }
    #[inline]
    fn store_mut(&mut self) -> &mut Store<2> {
        &mut self.vec
    }
    #[inline]
    fn add_cache(&mut self) -> &mut ComputeTable<cache::AddKey, VecEdge> {
        &mut self.caches.add_vec
    }
    #[inline]
    fn kron_cache(&mut self) -> &mut ComputeTable<(NodeId, NodeId), VecEdge> {
        &mut self.caches.kron_vec
    }
}

impl Arity<4> for Package {
    #[inline]
    fn store(&self) -> &Store<4> {
        &self.mat
    }
    #[inline]
    fn store_mut(&mut self) -> &mut Store<4> {
        &mut self.mat
    }
    #[inline]
    fn add_cache(&mut self) -> &mut ComputeTable<cache::AddKey, MatEdge> {
        &mut self.caches.add_mat
    }
    #[inline]
    fn kron_cache(&mut self) -> &mut ComputeTable<(NodeId, NodeId), MatEdge> {
        &mut self.caches.kron_mat
    }
}

impl Package {
    pub fn new() -> Self {
        Self::with_tolerance(crate::numerics::DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            complex: ComplexTable::new(tolerance),
            vec: Store::new(),
            mat: Store::new(),
            caches: cache::Caches::new(),
            identities: Vec::new(),
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.complex.tolerance()
    }

    /// Live vector plus matrix nodes.
    pub fn node_count(&self) -> usize {
        self.vec.live_count() + self.mat.live_count()
    }

    pub fn vector_node_count(&self) -> usize {
        self.vec.live_count()
    }

    pub fn matrix_node_count(&self) -> usize {
        self.mat.live_count()
    }

    pub fn complex_count(&self) -> usize {
        self.complex.len()
    }

    /// Interns a weight into this package's value table.
    pub fn intern(&mut self, c: Complex) -> Complex {
        self.complex.intern_value(c)
    }

    /// Level of the node an edge points to; -1 for the terminal.
    #[inline]
    pub fn level<const K: usize>(&self, e: Edge<K>) -> i32
    where
        Self: Arity<K>,
    {
        if e.node.is_terminal() {
            -1
        } else {
            self.store().get(e.node).level as i32
        }
    }

    /// Stored child `i` of the node `e` points to (without `e`'s weight).
    #[inline]
    pub fn child<const K: usize>(&self, e: Edge<K>, i: usize) -> Edge<K>
    where
        Self: Arity<K>,
    {
        self.store().get(e.node).children[i]
    }

    #[inline]
    pub(crate) fn is_identity_node(&self, id: NodeId) -> bool {
        !id.is_terminal() && self.mat.get(id).ident
    }

    /// Normalizing, canonical node construction. Children must already sit at
    /// `level - 1`; the returned edge weight is not interned.
    pub(crate) fn make_node<const K: usize>(&mut self, level: u32, mut children: [Edge<K>; K]) -> Edge<K>
    where
        Self: Arity<K>,
    {
        let tol = self.complex.tolerance();
        let mut pivot: Option<usize> = None;
        let mut pivot_mag = 0.0;
        for (i, c) in children.iter_mut().enumerate() {
            if approx_zero(c.weight, tol) {
                *c = Edge::zero();
                continue;
            }
            debug_assert!(
                self.level(*c) == level as i32 - 1,
                "child at level {} under node at level {level}",
                self.level(*c)
            );
            let mag = c.weight.norm();
            if pivot.is_none() || mag > pivot_mag + tol {
                pivot = Some(i);
                pivot_mag = mag;
            }
        }
        let Some(p) = pivot else {
            return Edge::zero();
        };
        let divisor = children[p].weight;
        for (i, c) in children.iter_mut().enumerate() {
            if i == p {
                c.weight = ONE;
            } else if !c.is_zero() {
                let w = self.complex.intern_value(c.weight / divisor);
                *c = if w == ZERO {
                    Edge::zero()
                } else {
                    Edge {
                        weight: w,
                        node: c.node,
                    }
                };
            }
        }
        let ident = K == 4
            && children[1].is_zero()
            && children[K - 2].is_zero()
            && children[0].same(&children[K - 1])
            && children[0].weight == ONE
            && (children[0].node.is_terminal() || self.mat.get(children[0].node).ident);
        let id = self.store_mut().lookup_or_insert(level, children, ident);
        Edge {
            weight: divisor,
            node: id,
        }
    }

    fn check_children<const K: usize>(&self, level: u32, children: &[Edge<K>; K]) -> Result<(), DdError>
    where
        Self: Arity<K>,
    {
        for (i, c) in children.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let found = self.level(*c);
            if found != level as i32 - 1 {
                return Err(DdError::ChildLevel {
                    child: i,
                    found,
                    expected: level as i32 - 1,
                });
            }
        }
        Ok(())
    }

    /// Builds a normalized vector node; both-zero children give the zero edge.
    pub fn make_vec_node(&mut self, level: u32, children: [VecEdge; 2]) -> Result<VecEdge, DdError> {
        self.check_children(level, &children)?;
        let e = self.make_node(level, children);
        Ok(self.finish(e))
    }

    /// Builds a normalized matrix node with children indexed `2*row + col`.
    pub fn make_mat_node(&mut self, level: u32, children: [MatEdge; 4]) -> Result<MatEdge, DdError> {
        self.check_children(level, &children)?;
        let e = self.make_node(level, children);
        Ok(self.finish(e))
    }

    /// Interns the root weight of an edge handed back to callers.
    #[inline]
    pub(crate) fn finish<const K: usize>(&mut self, e: Edge<K>) -> Edge<K> {
        if e.is_zero() {
            return e;
        }
        let w = self.complex.intern_value(e.weight);
        if w == ZERO {
            Edge::zero()
        } else {
            Edge {
                weight: w,
                node: e.node,
            }
        }
    }

    /// Identity matrix on `qubits` qubits.
    pub fn identity(&mut self, qubits: usize) -> MatEdge {
        if self.identities.is_empty() {
            self.identities.push(MatEdge::one());
        }
        while self.identities.len() <= qubits {
            let k = self.identities.len();
            let below = self.identities[k - 1];
            let e = self.make_node((k - 1) as u32, [below, MatEdge::zero(), MatEdge::zero(), below]);
            let e = self.finish(e);
            self.identities.push(e);
        }
        self.identities[qubits]
    }

    /// Computational basis state `|index⟩` on `qubits` qubits.
    pub fn basis_state(&mut self, qubits: usize, index: u64) -> VecEdge {
        let mut e = VecEdge::one();
        for level in 0..qubits {
            let children = if index >> level & 1 == 1 {
                [VecEdge::zero(), e]
            } else {
                [e, VecEdge::zero()]
            };
            e = self.make_node(level as u32, children);
        }
        self.finish(e)
    }

    /// Drops every compute-cache entry.
    pub fn clear_caches(&mut self) {
        self.caches.clear();
    }

    /// Removes every node not reachable from the given roots and returns the
    /// number of nodes freed. Compute caches are cleared and the value table
    /// is rebuilt from the surviving weights.
    pub fn reclaim(&mut self, vec_roots: &[VecEdge], mat_roots: &[MatEdge]) -> usize {
        let mut vmark = vec![false; self.vec.nodes.len()];
        let mut mmark = vec![false; self.mat.nodes.len()];
        self.vec.mark(vec_roots.iter().map(|e| e.node), &mut vmark);
        self.mat.mark(mat_roots.iter().map(|e| e.node), &mut mmark);
        let freed = self.vec.sweep(&vmark) + self.mat.sweep(&mmark);
        self.caches.clear();
        self.identities.clear();
        let roots = vec_roots
            .iter()
            .map(|e| e.weight)
            .chain(mat_roots.iter().map(|e| e.weight));
        let live: Vec<Complex> = roots
            .chain(self.vec.live_weights())
            .chain(self.mat.live_weights())
            .collect();
        self.complex.rebuild(live);
        freed
    }
}
