//! Smolyak grids: multi-indices with |i| − d ≤ ℓ over nested 1-D levels.

use alloc::vec;
use alloc::vec::Vec;

use super::nodes::{delta_indices, delta_xi, xi, NodeKey};

/// Multi-index i ∈ ℕ₊^d.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn norm1(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// One grid node: the owning multi-index and a key per dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridNode {
    pub index: MultiIndex,
    pub keys: Vec<NodeKey>,
}

impl GridNode {
    /// Coordinates in [0, 1]^d.
    pub fn point(&self) -> Vec<f64> {
        self.keys.iter().map(|k| k.position()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SparseGrid {
    pub dim: usize,
    pub level: u32,
    /// Ordered by |i|, then multi-index, then node keys.
    pub nodes: Vec<GridNode>,
}

/// Multi-indices with |i| = d + k, in lexicographic order.
pub fn indices_with_excess(d: usize, k: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![1u32; d];
    fn rec(p: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if p + 1 == cur.len() {
            cur[p] = 1 + left;
            out.push(MultiIndex(cur.clone()));
            return;
        }
        for e in 0..=left {
            cur[p] = 1 + e;
            rec(p + 1, left - e, cur, out);
        }
    }
    if d > 0 {
        rec(0, k, &mut cur, &mut out);
    }
    out
}

/// Nodes new at multi-index i: the product of the 1-D increments.
pub fn delta_nodes(i: &MultiIndex) -> Vec<GridNode> {
    let per: Vec<Vec<u32>> = i.0.iter().map(|&l| delta_indices(l)).collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; per.len()];
    loop {
        let keys = pick.iter().zip(&per).zip(&i.0).map(|((&p, ks), &l)| NodeKey { level: l, index: ks[p] }).collect();
        out.push(GridNode { index: i.clone(), keys });
        let mut p = per.len();
        loop {
            if p == 0 {
                return out;
            }
            p -= 1;
            pick[p] += 1;
            if pick[p] < per[p].len() {
                break;
            }
            pick[p] = 0;
        }
    }
}

impl SparseGrid {
    pub fn new(dim: usize, level: u32) -> Self {
        let mut nodes = Vec::new();
        for k in 0..=level {
            nodes.extend(Self::increment(dim, k));
        }
        SparseGrid { dim, level, nodes }
    }

    /// Nodes added when going from level k − 1 to k.
    pub fn increment(dim: usize, k: u32) -> Vec<GridNode> {
        indices_with_excess(dim, k).iter().flat_map(delta_nodes).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Node count of the level-ℓ grid in d dimensions.
pub fn grid_size(d: usize, level: u32) -> u128 {
    // count[s] = Σ over (i_1..i_p) with Σ(i_q − 1) = s of Π Δξ(i_q)
    let l = level as usize;
    let mut count = vec![0u128; l + 1];
    count[0] = 1;
    for _ in 0..d {
        let mut next = vec![0u128; l + 1];
        for (s, &c) in count.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for e in 0..=(l - s) {
                next[s + e] += c * delta_xi(e as u32 + 1) as u128;
            }
        }
        count = next;
    }
    count.iter().sum()
}

/// Points of the full tensor grid with the finest 1-D rule of level ℓ in every
/// direction, ξ(ℓ + 1)^d. None on u128 overflow.
pub fn full_grid_size(d: usize, level: u32) -> Option<u128> {
    let m = xi(level + 1) as u128;
    let mut acc: u128 = 1;
    for _ in 0..d {
        acc = acc.checked_mul(m)?;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn table_counts() {
        let d2 = [1, 5, 13, 29, 65, 145, 321, 705, 1537, 3329, 7169];
        let d3 = [1, 7, 25, 69, 177, 441, 1073, 2561, 6017, 13953, 32001];
        for (l, (&a, &b)) in d2.iter().zip(&d3).enumerate() {
            assert_eq!(grid_size(2, l as u32), a);
            assert_eq!(grid_size(3, l as u32), b);
        }
        let d12 = [1, 25, 313, 2649, 17265];
        for (l, &c) in d12.iter().enumerate() {
            assert_eq!(grid_size(12, l as u32), c);
        }
    }

    #[test]
    fn enumeration_matches_count_and_is_unique() {
        for d in 1..=4 {
            for l in 0..=5 {
                let g = SparseGrid::new(d, l);
                assert_eq!(g.len() as u128, grid_size(d, l));
                let pts: BTreeSet<Vec<u64>> =
                    g.nodes.iter().map(|n| n.point().iter().map(|x| x.to_bits()).collect()).collect();
                assert_eq!(pts.len(), g.len());
            }
        }
    }

    #[test]
    fn full_grid() {
        assert_eq!(full_grid_size(1, 1), Some(3));
        assert_eq!(full_grid_size(5, 0), Some(1));
        assert_eq!(full_grid_size(12, 3), Some(9u128.pow(12)));
        assert_eq!(full_grid_size(12, 4), Some(17u128.pow(12)));
        assert_eq!(full_grid_size(200, 10), None);
    }
}
