//! Nested Chebyshev-extrema nodes and their 1-D Lagrange bases.

use alloc::vec::Vec;

use super::SparseError;
use crate::fmath::cos;

/// Nodes of 1-D level i ≥ 1: 1 for i = 1, 2^(i−1) + 1 beyond.
pub fn xi(i: u32) -> usize {
    if i <= 1 {
        1
    } else {
        (1usize << (i - 1)) + 1
    }
}

/// Nodes first appearing at 1-D level i.
pub fn delta_xi(i: u32) -> usize {
    match i {
        0 => 0,
        1 => 1,
        2 => 2,
        _ => 1usize << (i - 2),
    }
}

/// Chebyshev extrema mapped to [0, 1], ascending; the single node is 0.5.
pub fn chebyshev_nodes(m: usize) -> Result<Vec<f64>, SparseError> {
    if m == 1 {
        return Ok(alloc::vec![0.5]);
    }
    if m < 3 || !(m - 1).is_power_of_two() {
        return Err(SparseError::NodeCount(m));
    }
    Ok((0..m).map(|j| node_position(j as u64, (m - 1) as u64)).collect())
}

/// x for the dyadic angle fraction num/den, ascending in num.
pub(crate) fn node_position(num: u64, den: u64) -> f64 {
    if 2 * num == den {
        return 0.5;
    }
    if num == 0 {
        return 0.0;
    }
    if num == den {
        return 1.0;
    }
    0.5 * (1.0 - cos(core::f64::consts::PI * num as f64 / den as f64))
}

/// A 1-D node identified exactly: angle fraction num / 2^(level−1), reduced,
/// together with the level where it first appears.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodeKey {
    pub level: u32,
    /// Index on the level grid, 0..xi(level).
    pub index: u32,
}

impl NodeKey {
    pub fn position(self) -> f64 {
        if self.level == 1 {
            0.5
        } else {
            node_position(self.index as u64, (xi(self.level) - 1) as u64)
        }
    }
}

/// Indices (on the level-i grid) of the nodes new at level i.
pub fn delta_indices(i: u32) -> Vec<u32> {
    match i {
        1 => alloc::vec![0],
        2 => alloc::vec![0, 2],
        _ => (0..xi(i) as u32).filter(|k| k % 2 == 1).collect(),
    }
}

/// Barycentric data of one 1-D level.
#[derive(Clone, Debug)]
pub struct Level1d {
    pub nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Level1d {
    pub fn new(i: u32) -> Self {
        let m = xi(i);
        let nodes = chebyshev_nodes(m).expect("valid level");
        let weights = (0..m)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j + 1 == m {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Level1d { nodes, weights }
    }

    /// Every Lagrange basis value at x, written into `out`.
    pub fn basis_all(&self, x: f64, out: &mut [f64]) {
        let m = self.nodes.len();
        if m == 1 {
            out[0] = 1.0;
            return;
        }
        if let Some(k) = self.nodes.iter().position(|&n| n == x) {
            out[..m].iter_mut().for_each(|v| *v = 0.0);
            out[k] = 1.0;
            return;
        }
        let mut den = 0.0;
        for j in 0..m {
            let t = self.weights[j] / (x - self.nodes[j]);
            out[j] = t;
            den += t;
        }
        for v in out[..m].iter_mut() {
            *v /= den;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sets() {
        assert_eq!(chebyshev_nodes(1).unwrap(), alloc::vec![0.5]);
        assert_eq!(chebyshev_nodes(3).unwrap(), alloc::vec![0.0, 0.5, 1.0]);
        let n5 = chebyshev_nodes(5).unwrap();
        let c = (0.5f64).sqrt();
        let expect = [0.0, (1.0 - c) / 2.0, 0.5, (1.0 + c) / 2.0, 1.0];
        for (a, b) in n5.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(chebyshev_nodes(4).is_err());
        assert!(chebyshev_nodes(2).is_err());
        assert!(chebyshev_nodes(0).is_err());
    }

    #[test]
    fn nested_exactly() {
        for i in 1..8 {
            let a = chebyshev_nodes(xi(i)).unwrap();
            let b = chebyshev_nodes(xi(i + 1)).unwrap();
            for x in a {
                assert!(b.contains(&x), "level {i} node {x}");
            }
        }
    }

    #[test]
    fn delta_counts() {
        for i in 1..10 {
            assert_eq!(delta_indices(i).len(), delta_xi(i));
            let prev = if i == 1 { 0 } else { xi(i - 1) };
            assert_eq!(prev + delta_xi(i), xi(i));
        }
    }

    #[test]
    fn basis_is_cardinal_and_exact_on_quadratics() {
        let l = Level1d::new(3);
        let mut b = [0.0; 5];
        for (k, &x) in l.nodes.iter().enumerate() {
            l.basis_all(x, &mut b);
            for (j, v) in b.iter().enumerate() {
                assert_eq!(*v, if j == k { 1.0 } else { 0.0 });
            }
        }
        let f = |x: f64| 3.0 * x * x * x * x - x + 0.25;
        for x in [0.013, 0.4, 0.77] {
            l.basis_all(x, &mut b);
            let s: f64 = l.nodes.iter().zip(&b).map(|(n, w)| f(*n) * w).sum();
            assert!((s - f(x)).abs() < 1e-13);
        }
    }
}
