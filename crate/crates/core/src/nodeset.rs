//! Compact sets of demand-node ids backed by a single 64-bit word.

use std::fmt;

/// Maximum number of demand nodes per instance; ids 1..=MAX_NODES map to bits.
pub const MAX_NODES: usize = 63;

/// A set of demand-node ids (1-based). Bit `i` of the word holds node `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    /// Set containing every node 1..=n.
    pub fn full(n: usize) -> NodeSet {
        debug_assert!(n <= MAX_NODES);
        if n == 0 {
            NodeSet(0)
        } else {
            NodeSet(((1u64 << n) - 1) << 1)
        }
    }

    pub fn singleton(node: usize) -> NodeSet {
        debug_assert!((1..=MAX_NODES).contains(&node));
        NodeSet(1 << node)
    }

    pub fn from_bits(bits: u64) -> NodeSet {
        debug_assert!(bits & 1 == 0, "bit 0 is reserved (node ids are 1-based)");
        NodeSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, node: usize) -> bool {
        node >= 1 && node <= MAX_NODES && self.0 & (1 << node) != 0
    }

    #[must_use]
    pub fn insert(self, node: usize) -> NodeSet {
        debug_assert!((1..=MAX_NODES).contains(&node));
        NodeSet(self.0 | 1 << node)
    }

    #[must_use]
    pub fn remove(self, node: usize) -> NodeSet {
        NodeSet(self.0 & !(1u64 << node))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 | other.0)
    }

    pub fn intersect(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & other.0)
    }

    pub fn minus(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: NodeSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Smallest member, if any.
    pub fn min(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    /// Iterate members in ascending order.
    pub fn iter(self) -> NodeSetIter {
        NodeSetIter(self.0)
    }
}

pub struct NodeSetIter(u64);

impl Iterator for NodeSetIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            let node = self.0.trailing_zeros() as usize;
            self.0 &= self.0 - 1;
            Some(node)
        }
    }
}

impl IntoIterator for NodeSet {
    type Item = usize;
    type IntoIter = NodeSetIter;

    fn into_iter(self) -> NodeSetIter {
        self.iter()
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> NodeSet {
        let mut set = NodeSet::EMPTY;
        for node in iter {
            set = set.insert(node);
        }
        set
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, node) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{node}")?;
        }
        write!(f, "}}")
    }
}
