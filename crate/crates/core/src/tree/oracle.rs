//! Exhaustive reference solutions for small graphs.
//!
//! [`exhaustive_min_2level`] enumerates *every* set partition of the vertex
//! set (via restricted-growth strings), scores the corresponding two-level
//! tree, and keeps the best — evaluating the flat tree first so that exact
//! ties resolve toward it. Being brute force it refuses graphs with more
//! than [`ORACLE_MAX_N`] vertices; within that range its answer is the true
//! two-level optimum, which makes it the yardstick the greedy minimizer and
//! the downstream artifact tests are checked against.

use crate::error::{Error, Result};
use crate::graph::Graph;

use super::{cut_weight, structural_entropy, EncodingTree, TreeNode};

/// Largest vertex count the exhaustive search accepts (Bell(10) = 115 975
/// partitions is still fast; growth beyond that is super-exponential).
pub const ORACLE_MAX_N: usize = 10;

/// Iterator over all set partitions of `{0, …, n−1}` in restricted-growth
/// order, coarsest (single block) first, all-singletons last. Blocks arrive
/// ordered by their smallest element, elements ascending within a block.
pub fn set_partitions(n: usize) -> SetPartitions {
    SetPartitions {
        rgs: vec![0; n],
        started: false,
        done: n == 0,
    }
}

pub struct SetPartitions {
    rgs: Vec<usize>,
    started: bool,
    done: bool,
}

impl SetPartitions {
    fn emit(&self) -> Vec<Vec<u32>> {
        let blocks = self.rgs.iter().copied().max().unwrap_or(0) + 1;
        let mut out = vec![Vec::new(); blocks];
        for (vertex, &label) in self.rgs.iter().enumerate() {
            out[label].push(vertex as u32);
        }
        out
    }

    fn advance(&mut self) -> bool {
        let n = self.rgs.len();
        for i in (1..n).rev() {
            let max_prefix = self.rgs[..i].iter().copied().max().unwrap_or(0);
            if self.rgs[i] <= max_prefix {
                self.rgs[i] += 1;
                for j in (i + 1)..n {
                    self.rgs[j] = 0;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for SetPartitions {
    type Item = Vec<Vec<u32>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.emit());
        }
        if self.advance() {
            Some(self.emit())
        } else {
            self.done = true;
            None
        }
    }
}

/// Build the two-level tree realizing `partition`: blocks of two or more
/// vertices become internal community nodes with singleton leaves; blocks of
/// one become leaves directly under the root. The partition must cover every
/// vertex exactly once.
pub fn two_level_tree(g: &Graph, partition: &[Vec<u32>]) -> Result<EncodingTree> {
    let sym = g.symmetrized();
    let n = sym.n();
    let adj = sym.adjacency();
    let degrees = sym.degrees();

    let mut seen = vec![false; n];
    for block in partition {
        if block.is_empty() {
            return Err(Error::Precondition("partition contains an empty block".into()));
        }
        for &v in block {
            if (v as usize) >= n {
                return Err(Error::Precondition(format!(
                    "partition names vertex {v}, but the graph has {n} vertices"
                )));
            }
            if seen[v as usize] {
                return Err(Error::Precondition(format!(
                    "vertex {v} appears in more than one block"
                )));
            }
            seen[v as usize] = true;
        }
    }
    if let Some(v) = seen.iter().position(|&s| !s) {
        return Err(Error::Precondition(format!(
            "partition does not cover vertex {v}"
        )));
    }

    let mut blocks: Vec<Vec<u32>> = partition
        .iter()
        .map(|b| {
            let mut b = b.clone();
            b.sort_unstable();
            b
        })
        .collect();
    blocks.sort_by_key(|b| b[0]);

    let mut nodes: Vec<Option<TreeNode>> = vec![Some(TreeNode {
        parent: None,
        children: Vec::new(),
        vertex: None,
        g: 0.0,
        v: sym.volume(),
        vertices: (0..n as u32).collect(),
    })];
    let mut leaf_of = vec![None; n];
    let mut root_children = Vec::new();

    for block in &blocks {
        if block.len() == 1 {
            let v = block[0];
            let id = nodes.len();
            nodes.push(Some(TreeNode {
                parent: Some(0),
                children: Vec::new(),
                vertex: Some(v),
                g: degrees[v as usize],
                v: degrees[v as usize],
                vertices: vec![v],
            }));
            leaf_of[v as usize] = Some(id);
            root_children.push(id);
        } else {
            let community = nodes.len();
            let vol: f64 = block.iter().map(|&v| degrees[v as usize]).sum();
            nodes.push(Some(TreeNode {
                parent: Some(0),
                children: Vec::new(),
                vertex: None,
                g: cut_weight(adj, block),
                v: vol,
                vertices: block.clone(),
            }));
            let mut kids = Vec::with_capacity(block.len());
            for &v in block {
                let id = nodes.len();
                nodes.push(Some(TreeNode {
                    parent: Some(community),
                    children: Vec::new(),
                    vertex: Some(v),
                    g: degrees[v as usize],
                    v: degrees[v as usize],
                    vertices: vec![v],
                }));
                leaf_of[v as usize] = Some(id);
                kids.push(id);
            }
            nodes[community].as_mut().unwrap().children = kids;
            root_children.push(community);
        }
    }
    nodes[0].as_mut().unwrap().children = root_children;

    Ok(EncodingTree {
        nodes,
        root: 0,
        leaf_of,
        n,
    })
}

/// The provably optimal tree of height at most two: every vertex partition
/// is scored and the strictly best one wins, with exact ties keeping the
/// flat tree. Refuses graphs larger than [`ORACLE_MAX_N`].
pub fn exhaustive_min_2level(g: &Graph) -> Result<EncodingTree> {
    let n = g.n();
    if n > ORACLE_MAX_N {
        return Err(Error::Precondition(format!(
            "exhaustive search is limited to {ORACLE_MAX_N} vertices (got {n}); \
             the number of set partitions grows super-exponentially"
        )));
    }
    let mut best = EncodingTree::flat(g);
    let mut best_h = structural_entropy(g, &best)?;
    for partition in set_partitions(n) {
        let tree = two_level_tree(g, &partition)?;
        let h = structural_entropy(g, &tree)?;
        if h < best_h {
            best = tree;
            best_h = h;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn partition_counts_are_bell_numbers() {
        assert_eq!(set_partitions(1).count(), 1);
        assert_eq!(set_partitions(2).count(), 2);
        assert_eq!(set_partitions(3).count(), 5);
        assert_eq!(set_partitions(4).count(), 15);
        assert_eq!(set_partitions(5).count(), 52);
        assert_eq!(set_partitions(6).count(), 203);
    }

    #[test]
    fn partitions_are_canonical() {
        for p in set_partitions(5) {
            let mins: Vec<u32> = p.iter().map(|b| b[0]).collect();
            let mut sorted = mins.clone();
            sorted.sort_unstable();
            assert_eq!(mins, sorted);
            for b in &p {
                let mut s = b.clone();
                s.sort_unstable();
                assert_eq!(*b, s);
            }
        }
    }

    #[test]
    fn singleton_partition_reproduces_the_flat_tree() {
        let g = Graph::from_adjacency(
            array![
                [0.0, 1.0, 0.0],
                [1.0, 0.0, 1.0],
                [0.0, 1.0, 0.0]
            ],
            false,
        )
        .unwrap();
        let singletons: Vec<Vec<u32>> = (0..3).map(|v| vec![v]).collect();
        let t = two_level_tree(&g, &singletons).unwrap();
        assert_eq!(t.height(), 1);
        assert_eq!(
            structural_entropy(&g, &t).unwrap(),
            structural_entropy(&g, &EncodingTree::flat(&g)).unwrap()
        );
    }

    #[test]
    fn oracle_refuses_large_graphs() {
        let n = ORACLE_MAX_N + 1;
        let mut adj = ndarray::Array2::zeros((n, n));
        for i in 0..n - 1 {
            adj[[i, i + 1]] = 1.0;
            adj[[i + 1, i]] = 1.0;
        }
        let g = Graph::from_adjacency(adj, false).unwrap();
        assert!(exhaustive_min_2level(&g).is_err());
    }
}
