//! The power-distribution tree: demand nodes 1..=n rooted at the source
//! (node 1), stored as a parent array with precomputed traversal caches.

use crate::error::{Error, Result};
use crate::nodeset::{NodeSet, MAX_NODES};

/// Directed tree over demand nodes, rooted at the source node 1. Electricity
/// flows from the source, so a node has service only if every node on its
/// source path is fault-free or repaired.
#[derive(Clone, Debug)]
pub struct PowerTree {
    /// parent[i] for node i in 1..=n; 0 marks "no parent" (the source).
    parent: Vec<u32>,
    children: Vec<Vec<u32>>,
    /// Strict ancestors of each node (source-path minus the node itself).
    ancestors: Vec<NodeSet>,
    /// Strict descendants of each node.
    descendants: Vec<NodeSet>,
    depth: usize,
}

impl PowerTree {
    /// Builds and validates a tree from `parents[i-1]` = parent of node i
    /// (`None` for the source, which must be node 1).
    pub fn from_parents(parents: &[Option<usize>]) -> Result<PowerTree> {
        let n = parents.len();
        if n == 0 {
            return Err(Error::InvalidTree(
                "tree must contain at least one node".into(),
            ));
        }
        if n > MAX_NODES {
            return Err(Error::TooManyNodes { n, max: MAX_NODES });
        }
        let mut parent = vec![0u32; n + 1];
        for (idx, &p) in parents.iter().enumerate() {
            let node = idx + 1;
            match p {
                None => {
                    if node != 1 {
                        return Err(Error::InvalidTree(format!(
                            "node {node} has no parent but the source must be node 1"
                        )));
                    }
                }
                Some(p) => {
                    if node == 1 {
                        return Err(Error::InvalidTree(
                            "source node 1 cannot have a parent".into(),
                        ));
                    }
                    if p < 1 || p > n || p == node {
                        return Err(Error::InvalidTree(format!(
                            "node {node} has invalid parent {p}"
                        )));
                    }
                    parent[node] = p as u32;
                }
            }
        }

        let mut children = vec![Vec::new(); n + 1];
        for node in 2..=n {
            children[parent[node] as usize].push(node as u32);
        }
        for list in &mut children {
            list.sort_unstable();
        }

        // Walk each source path; cycles or paths not ending at 1 are invalid.
        let mut ancestors = vec![NodeSet::EMPTY; n + 1];
        let mut depth = 0usize;
        for node in 1..=n {
            let mut seen = NodeSet::singleton(node);
            let mut path = NodeSet::EMPTY;
            let mut cur = node;
            let mut hops = 0usize;
            while parent[cur] != 0 {
                cur = parent[cur] as usize;
                hops += 1;
                if seen.contains(cur) {
                    return Err(Error::InvalidTree(format!("cycle through node {cur}")));
                }
                seen = seen.insert(cur);
                path = path.insert(cur);
            }
            if cur != 1 {
                return Err(Error::InvalidTree(format!(
                    "node {node} is not connected to the source"
                )));
            }
            ancestors[node] = path;
            depth = depth.max(hops);
        }

        let mut descendants = vec![NodeSet::EMPTY; n + 1];
        for node in 1..=n {
            for anc in ancestors[node].iter() {
                descendants[anc] = descendants[anc].insert(node);
            }
        }

        Ok(PowerTree {
            parent,
            children,
            ancestors,
            descendants,
            depth,
        })
    }

    pub fn n(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        match self.parent[node] {
            0 => None,
            p => Some(p as usize),
        }
    }

    pub fn grandparent(&self, node: usize) -> Option<usize> {
        self.parent(node).and_then(|p| self.parent(p))
    }

    pub fn children(&self, node: usize) -> &[u32] {
        &self.children[node]
    }

    /// Strict ancestors (source path excluding the node itself).
    pub fn ancestors(&self, node: usize) -> NodeSet {
        self.ancestors[node]
    }

    /// Full source path including the node itself.
    pub fn source_path(&self, node: usize) -> NodeSet {
        self.ancestors[node].union(NodeSet::singleton(node))
    }

    pub fn descendants(&self, node: usize) -> NodeSet {
        self.descendants[node]
    }

    pub fn descendant_count(&self, node: usize) -> usize {
        self.descendants[node].len()
    }

    /// Longest source-to-leaf path, counted in arcs.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet::full(self.n())
    }

    /// Parent array in file form: entry i-1 is the parent of node i.
    pub fn to_parent_vec(&self) -> Vec<Option<usize>> {
        (1..=self.n()).map(|node| self.parent(node)).collect()
    }
}
