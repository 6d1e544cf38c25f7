use std::hash::{BuildHasher, Hash};

use rustc_hash::FxBuildHasher;

use super::{MatEdge, NodeId, VecEdge};

/// Fixed-size, direct-mapped memo table. A colliding insert overwrites the
/// previous occupant, so lookups may miss but never return a stale value for
/// a different key.
pub struct ComputeTable<K, V> {
    slots: Vec<Option<(K, V)>>,
    mask: usize,
    hits: u64,
    lookups: u64,
}

impl<K: Hash + Eq + Copy, V: Copy> ComputeTable<K, V> {
    pub fn new(log2_slots: u32) -> Self {
        let n = 1usize << log2_slots;
        Self {
            slots: vec![None; n],
            mask: n - 1,
            hits: 0,
            lookups: 0,
        }
    }

    #[inline]
    fn slot(&self, key: &K) -> usize {
        FxBuildHasher.hash_one(key) as usize & self.mask
    }

    #[inline]
    pub fn get(&mut self, key: &K) -> Option<V> {
        self.lookups += 1;
        match &self.slots[self.slot(key)] {
            Some((k, v)) if k == key => {
                self.hits += 1;
                Some(*v)
            }
            _ => None,
        }
    }

    #[inline]
    pub fn insert(&mut self, key: K, value: V) {
        let i = self.slot(&key);
        self.slots[i] = Some((key, value));
    }

    pub fn clear(&mut self) {
        self.slots.iter_mut().for_each(|s| *s = None);
    }

    /// (hits, lookups) since construction.
    pub fn stats(&self) -> (u64, u64) {
        (self.hits, self.lookups)
    }
}

pub type AddKey = (NodeId, NodeId, (u64, u64));

pub(crate) struct Caches {
    pub(crate) add_vec: ComputeTable<AddKey, VecEdge>,
    pub(crate) add_mat: ComputeTable<AddKey, MatEdge>,
    pub(crate) mul_mv: ComputeTable<(NodeId, NodeId), VecEdge>,
    pub(crate) mul_mm: ComputeTable<(NodeId, NodeId), MatEdge>,
    pub(crate) kron_vec: ComputeTable<(NodeId, NodeId), VecEdge>,
    pub(crate) kron_mat: ComputeTable<(NodeId, NodeId), MatEdge>,
}

impl Caches {
    pub(crate) fn new() -> Self {
        Self {
            add_vec: ComputeTable::new(16),
            add_mat: ComputeTable::new(12),
            mul_mv: ComputeTable::new(16),
            mul_mm: ComputeTable::new(12),
            kron_vec: ComputeTable::new(10),
            kron_mat: ComputeTable::new(10),
        }
    }

    pub(crate) fn clear(&mut self) {
        self.add_vec.clear();
        self.add_mat.clear();
        self.mul_mv.clear();
        self.mul_mm.clear();
        self.kron_vec.clear();
        self.kron_mat.clear();
    }
}
