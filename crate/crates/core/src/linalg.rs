//! Sparse symmetric matrices and an envelope Cholesky factorization.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::fmath::sqrt;

/// Compressed sparse rows, full (both triangles) storage, columns sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

/// Triplet accumulator.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        TripletBuilder { n, entries: Vec::new() }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i, j, v));
    }

    /// Sums duplicates in a fixed order so results are reproducible.
    pub fn build(mut self) -> CsrMatrix {
        self.entries.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col = Vec::new();
        let mut val: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(j);
                val.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n: self.n, row_ptr, col, val }
    }
}

impl CsrMatrix {
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col[r.clone()].iter().copied().zip(self.val[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col[r.clone()].binary_search(&j) {
            Ok(k) => self.val[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// Largest |a_ij - a_ji| relative to the largest |a_ij|.
    pub fn asymmetry(&self) -> f64 {
        let mut d: f64 = 0.0;
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d = d.max((v - self.get(j, i)).abs());
                m = m.max(v.abs());
            }
        }
        if m == 0.0 {
            0.0
        } else {
            d / m
        }
    }

    /// Sum of two matrices of equal size.
    pub fn add(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.n, other.n);
        let mut b = TripletBuilder::new(self.n);
        for m in [self, other] {
            for i in 0..m.n {
                for (j, v) in m.row(i) {
                    b.add(i, j, v);
                }
            }
        }
        b.build()
    }

    /// Principal submatrix on the listed indices, renumbered in list order.
    pub fn principal(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k;
        }
        let mut b = TripletBuilder::new(keep.len());
        for (k, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                if map[j] != usize::MAX {
                    b.add(k, map[j], v);
                }
            }
        }
        b.build()
    }
}

/// Reverse Cuthill–McKee ordering of the graph of `a`, restricted to `nodes`.
/// Returns the nodes in their new order.
pub fn rcm_order(a: &CsrMatrix, nodes: &[usize]) -> Vec<usize> {
    let mut active = vec![false; a.n];
    for &i in nodes {
        active[i] = true;
    }
    let degree = |i: usize| a.row(i).filter(|&(j, _)| j != i && active[j]).count();
    let mut visited = vec![false; a.n];
    let mut order = Vec::with_capacity(nodes.len());
    let mut sorted: Vec<usize> = nodes.to_vec();
    sorted.sort_by_key(|&i| (degree(i), i));
    for &seed in &sorted {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(a, &active, seed);
        let mut q = VecDeque::new();
        q.push_back(start);
        visited[start] = true;
        while let Some(v) = q.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> =
                a.row(v).map(|(j, _)| j).filter(|&j| active[j] && !visited[j]).collect();
            nb.sort_by_key(|&j| (degree(j), j));
            for j in nb {
                visited[j] = true;
                q.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(a: &CsrMatrix, active: &[bool], start: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; a.n];
    seen[start] = true;
    let mut levels = vec![vec![start]];
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for (j, _) in a.row(v) {
                if active[j] && !seen[j] {
                    seen[j] = true;
                    next.push(j);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        levels.push(next);
    }
}

fn pseudo_peripheral(a: &CsrMatrix, active: &[bool], seed: usize) -> usize {
    let mut v = seed;
    let mut depth = bfs_levels(a, active, v).len();
    for _ in 0..8 {
        let levels = bfs_levels(a, active, v);
        let last = levels.last().unwrap();
        let deg = |i: usize| a.row(i).filter(|&(j, _)| active[j]).count();
        let cand = *last.iter().min_by_key(|&&i| (deg(i), i)).unwrap();
        let d2 = bfs_levels(a, active, cand).len();
        if d2 > depth {
            depth = d2;
            v = cand;
        } else {
            break;
        }
    }
    v
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FactorError {
    #[error("matrix not positive definite at pivot {0} (value {1})")]
    NotPositiveDefinite(usize, f64),
}

/// Cholesky factor stored row-wise over the lower envelope of a permuted matrix.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors `a` after symmetric permutation: new row k is old row `perm[k]`.
    pub fn factor(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self, FactorError> {
        let n = a.n;
        assert_eq!(perm.len(), n);
        let mut inv = vec![0usize; n];
        for (k, &i) in perm.iter().enumerate() {
            inv[i] = k;
        }
        let mut first = vec![0usize; n];
        for k in 0..n {
            let mut f = k;
            for (j, v) in a.row(perm[k]) {
                if v != 0.0 {
                    f = f.min(inv[j]);
                }
            }
            first[k] = f;
        }
        let mut start = vec![0usize; n + 1];
        for k in 0..n {
            start[k + 1] = start[k] + (k - first[k] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for k in 0..n {
            for (j, v) in a.row(perm[k]) {
                let jj = inv[j];
                if jj <= k && v != 0.0 {
                    data[start[k] + jj - first[k]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let (head, tail) = data.split_at_mut(start[i]);
                let rj = &head[start[j]..start[j + 1]];
                let ri = &mut tail[..i - fi + 1];
                let mut s = ri[j - fi];
                let a_i = &ri[lo - fi..j - fi];
                let a_j = &rj[lo - fj..j - fj];
                s -= dot(a_i, a_j);
                ri[j - fi] = s / rj[j - fj];
            }
            let ri = &mut data[start[i]..start[i + 1]];
            let d = ri[i - fi] - dot(&ri[..i - fi], &ri[..i - fi]);
            if !(d > 0.0) {
                return Err(FactorError::NotPositiveDefinite(perm[i], d));
            }
            ri[i - fi] = sqrt(d);
        }
        Ok(EnvelopeCholesky { n, perm, first, start, data })
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let r = &self.data[self.start[i]..self.start[i + 1]];
            let s = y[i] - dot(&r[..i - fi], &y[fi..i]);
            y[i] = s / r[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let r = &self.data[self.start[i]..self.start[i + 1]];
            y[i] /= r[i - fi];
            let yi = y[i];
            for (k, v) in r[..i - fi].iter().enumerate() {
                y[fi + k] -= v * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (k, &i) in self.perm.iter().enumerate() {
            x[i] = y[k];
        }
        x
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    let n4 = a.len() / 4 * 4;
    let mut k = 0;
    while k < n4 {
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
        k += 4;
    }
    for k in n4..a.len() {
        s0 += a[k] * b[k];
    }
    (s0 + s1) + (s2 + s3)
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
