//! Redundancy index: co-occurrence counts per candidate pair plus a
//! max-heap with lazy invalidation.
//!
//! Every count change stamps the pair with a fresh version and, when the
//! count is still a viable candidate, pushes a new heap entry. Popped
//! entries whose stamp is not the pair's current stamp are discarded.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use crate::graph::NodeId;

/// Pair packed as `(first << 32) | second`; integer order equals
/// lexicographic order on `(first, second)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct PairKey(u64);

impl PairKey {
    #[inline]
    pub fn ordered(a: NodeId, b: NodeId) -> Self {
        PairKey(((a.0 as u64) << 32) | b.0 as u64)
    }

    #[inline]
    pub fn unordered(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            Self::ordered(a, b)
        } else {
            Self::ordered(b, a)
        }
    }

    #[inline]
    pub fn nodes(self) -> (NodeId, NodeId) {
        (NodeId((self.0 >> 32) as u32), NodeId(self.0 as u32))
    }
}

#[derive(Clone, Copy, Debug)]
struct Slot {
    count: u32,
    stamp: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct HeapEntry {
    count: u32,
    key: Reverse<PairKey>,
    stamp: u64,
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // highest count first, then smallest pair
        (self.count, self.key, self.stamp).cmp(&(other.count, other.key, other.stamp))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug)]
pub(crate) struct RedundancyIndex {
    slots: HashMap<PairKey, Slot>,
    heap: BinaryHeap<HeapEntry>,
    min_redundancy: u32,
    next_stamp: u64,
}

impl RedundancyIndex {
    /// Builds the index from initial counts in one heapify.
    pub fn from_counts(counts: HashMap<PairKey, u32>, min_redundancy: u32) -> Self {
        let mut slots = HashMap::with_capacity(counts.len());
        let mut entries = Vec::new();
        for (stamp, (key, count)) in counts.into_iter().enumerate() {
            let stamp = stamp as u64;
            slots.insert(key, Slot { count, stamp });
            if count >= min_redundancy {
                entries.push(HeapEntry {
                    count,
                    key: Reverse(key),
                    stamp,
                });
            }
        }
        let next_stamp = slots.len() as u64;
        RedundancyIndex {
            slots,
            heap: BinaryHeap::from(entries),
            min_redundancy,
            next_stamp,
        }
    }

    pub fn count(&self, key: PairKey) -> u32 {
        self.slots.get(&key).map_or(0, |s| s.count)
    }

    /// Applies a signed change to one pair's count.
    pub fn adjust(&mut self, key: PairKey, delta: i64) {
        if delta == 0 {
            return;
        }
        let stamp = self.next_stamp;
        self.next_stamp += 1;
        let slot = self.slots.entry(key).or_insert(Slot { count: 0, stamp });
        let count = slot.count as i64 + delta;
        debug_assert!(count >= 0, "pair count went negative");
        if count <= 0 {
            self.slots.remove(&key);
            return;
        }
        slot.count = count as u32;
        slot.stamp = stamp;
        if slot.count >= self.min_redundancy {
            self.heap.push(HeapEntry {
                count: slot.count,
                key: Reverse(key),
                stamp,
            });
        }
    }

    /// Removes and returns the live pair with the highest count (ties go
    /// to the smallest pair), or `None` when no pair reaches the threshold.
    pub fn pop_best(&mut self) -> Option<(PairKey, u32)> {
        while let Some(top) = self.heap.pop() {
            let key = top.key.0;
            match self.slots.get(&key) {
                Some(slot) if slot.stamp == top.stamp => return Some((key, top.count)),
                _ => continue,
            }
        }
        None
    }

    #[cfg(test)]
    pub fn heap_len(&self) -> usize {
        self.heap.len()
    }
}
