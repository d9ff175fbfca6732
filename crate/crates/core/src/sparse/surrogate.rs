//! Vector-valued Smolyak interpolant stored as hierarchical surpluses.

use alloc::vec;
use alloc::vec::Vec;

use super::grid::{GridNode, SparseGrid};
use super::nodes::{xi, Level1d};
use super::SparseError;

/// Axis-aligned parameter box. Zero-width sides are allowed and pinned to
/// the grid midpoint.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

const BOX_SLACK: f64 = 1e-12;

impl ParamBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, SparseError> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(SparseError::Dimension);
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(SparseError::InvalidBox);
        }
        Ok(ParamBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(self.lo.iter().zip(&self.hi)).map(|(t, (a, b))| if a == b { *a } else { a + t * (b - a) }).collect()
    }

    /// Unit coordinates of x; None when x lies outside and `clamp_free` is false.
    pub fn to_unit(&self, x: &[f64], allow_outside: bool) -> Result<Vec<f64>, SparseError> {
        if x.len() != self.dim() {
            return Err(SparseError::Dimension);
        }
        let mut u = Vec::with_capacity(x.len());
        for (v, (a, b)) in x.iter().zip(self.lo.iter().zip(&self.hi)) {
            let w = b - a;
            let slack = BOX_SLACK * a.abs().max(b.abs()).max(w);
            if !allow_outside && (*v < a - slack || *v > b + slack) {
                return Err(SparseError::OutsideBox);
            }
            if w == 0.0 {
                u.push(0.5);
            } else {
                let t = (v - a) / w;
                u.push(if allow_outside { t } else { t.clamp(0.0, 1.0) });
            }
        }
        Ok(u)
    }
}

#[derive(Clone, Debug)]
pub struct Surrogate {
    pub grid: SparseGrid,
    pub bounds: ParamBox,
    pub vlen: usize,
    /// Node-major: surplus of node k is surpluses[k*vlen..(k+1)*vlen].
    pub surpluses: Vec<f64>,
    /// Nodes whose sample failed and was replaced by the nearest good node.
    pub failures: Vec<usize>,
    /// Identifies the mesh the vectors live on; 0 when unused.
    pub mesh_hash: u64,
    levels: Vec<Level1d>,
}

/// Batch evaluator: physical points in, one sample per point out (None = failed).
pub trait BatchEval {
    fn eval_batch(&mut self, points: &[Vec<f64>]) -> Vec<Option<Vec<f64>>>;
}

impl<F: FnMut(&[Vec<f64>]) -> Vec<Option<Vec<f64>>>> BatchEval for F {
    fn eval_batch(&mut self, points: &[Vec<f64>]) -> Vec<Option<Vec<f64>>> {
        self(points)
    }
}

/// Wraps a pointwise function as a sequential batch evaluator.
pub fn pointwise(mut f: impl FnMut(&[f64]) -> Option<Vec<f64>>) -> impl BatchEval {
    move |pts: &[Vec<f64>]| pts.iter().map(|p| f(p)).collect::<Vec<_>>()
}

fn level_tables(level: u32) -> Vec<Level1d> {
    (1..=level + 1).map(Level1d::new).collect()
}

impl Surrogate {
    /// Reassembles a surrogate from stored parts.
    pub fn from_parts(
        grid: SparseGrid,
        bounds: ParamBox,
        vlen: usize,
        surpluses: Vec<f64>,
        failures: Vec<usize>,
        mesh_hash: u64,
    ) -> Result<Self, SparseError> {
        if bounds.dim() != grid.dim {
            return Err(SparseError::Dimension);
        }
        if surpluses.len() != grid.len() * vlen {
            return Err(SparseError::VectorLength);
        }
        let levels = level_tables(grid.level);
        Ok(Surrogate { grid, bounds, vlen, surpluses, failures, mesh_hash, levels })
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn level(&self) -> u32 {
        self.grid.level
    }

    pub fn node_count(&self) -> usize {
        self.grid.len()
    }

    pub fn surplus(&self, k: usize) -> &[f64] {
        &self.surpluses[k * self.vlen..(k + 1) * self.vlen]
    }

    /// Physical coordinates of every node.
    pub fn node_points(&self) -> Vec<Vec<f64>> {
        self.grid.nodes.iter().map(|n| self.bounds.from_unit(&n.point())).collect()
    }

    /// Basis-product weight of every node at unit point u.
    pub fn coefficients_unit(&self, u: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let nl = self.levels.len();
        let mut tables: Vec<Vec<Vec<f64>>> = Vec::with_capacity(d);
        for &up in u.iter().take(d) {
            let mut per = Vec::with_capacity(nl);
            for lev in &self.levels {
                let mut b = vec![0.0; lev.nodes.len()];
                lev.basis_all(up, &mut b);
                per.push(b);
            }
            tables.push(per);
        }
        self.grid
            .nodes
            .iter()
            .map(|n| {
                n.keys.iter().enumerate().fold(1.0, |acc, (p, k)| acc * tables[p][k.level as usize - 1][k.index as usize])
            })
            .collect()
    }

    pub fn coefficients(&self, x: &[f64], allow_extrapolation: bool) -> Result<Vec<f64>, SparseError> {
        let u = self.bounds.to_unit(x, allow_extrapolation)?;
        Ok(self.coefficients_unit(&u))
    }

    fn combine(&self, coef: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (k, &c) in coef.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (o, s) in out.iter_mut().zip(self.surplus(k)) {
                *o += c * s;
            }
        }
    }

    /// Interpolant at a physical point inside the box.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, SparseError> {
        self.eval_with(x, false)
    }

    pub fn eval_with(&self, x: &[f64], allow_extrapolation: bool) -> Result<Vec<f64>, SparseError> {
        let coef = self.coefficients(x, allow_extrapolation)?;
        let mut out = vec![0.0; self.vlen];
        self.combine(&coef, &mut out);
        Ok(out)
    }

    fn eval_unit(&self, u: &[f64]) -> Vec<f64> {
        let coef = self.coefficients_unit(u);
        let mut out = vec![0.0; self.vlen];
        self.combine(&coef, &mut out);
        out
    }

    /// Adds the next level; existing surpluses are kept as they are and only
    /// the new nodes are evaluated.
    pub fn refine_level(&self, eval: &mut impl BatchEval) -> Result<Surrogate, SparseError> {
        let level = self.level() + 1;
        let new_nodes = SparseGrid::increment(self.dim(), level);
        let unit: Vec<Vec<f64>> = new_nodes.iter().map(GridNode::point).collect();
        let phys: Vec<Vec<f64>> = unit.iter().map(|u| self.bounds.from_unit(u)).collect();
        let samples = eval.eval_batch(&phys);
        if samples.len() != phys.len() {
            return Err(SparseError::VectorLength);
        }
        let old_unit: Vec<Vec<f64>> = self.grid.nodes.iter().map(GridNode::point).collect();
        let first = self.node_count();
        let mut failures = self.failures.clone();
        let mut filled: Vec<Vec<f64>> = Vec::with_capacity(samples.len());
        let good: Vec<usize> = (0..samples.len()).filter(|&k| samples[k].is_some()).collect();
        for (k, s) in samples.iter().enumerate() {
            match s {
                Some(v) => {
                    if v.len() != self.vlen {
                        return Err(SparseError::VectorLength);
                    }
                    filled.push(v.clone());
                }
                None => {
                    failures.push(first + k);
                    let closest = |it: &mut dyn Iterator<Item = (f64, usize)>| {
                        it.min_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal))
                    };
                    let new = closest(&mut good.iter().map(|&j| (dist2(&unit[k], &unit[j]), j)));
                    let old = closest(&mut old_unit.iter().enumerate().map(|(j, o)| (dist2(&unit[k], o), j)));
                    filled.push(match (new, old) {
                        (Some(n), Some(o)) if n.0 < o.0 => samples[n.1].clone().unwrap_or_default(),
                        (_, Some(o)) => self.eval_unit(&old_unit[o.1]),
                        (Some(n), None) => samples[n.1].clone().unwrap_or_default(),
                        (None, None) => return Err(SparseError::NoSamples),
                    });
                }
            }
        }
        let mut surpluses = self.surpluses.clone();
        surpluses.reserve(new_nodes.len() * self.vlen);
        for (u, s) in unit.iter().zip(&filled) {
            let prev = self.eval_unit(u);
            surpluses.extend(s.iter().zip(&prev).map(|(a, b)| a - b));
        }
        let mut grid = self.grid.clone();
        grid.level = level;
        grid.nodes.extend(new_nodes);
        Surrogate::from_parts(grid, self.bounds.clone(), self.vlen, surpluses, failures, self.mesh_hash)
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Level-by-level construction from the single-node level 0.
pub fn build_surrogate(eval: &mut impl BatchEval, bounds: ParamBox, level: u32) -> Result<Surrogate, SparseError> {
    let grid = SparseGrid::new(bounds.dim(), 0);
    let centre = bounds.from_unit(&grid.nodes[0].point());
    let first = eval.eval_batch(&[centre]).into_iter().next().flatten().ok_or(SparseError::NoSamples)?;
    let vlen = first.len();
    let mut s = Surrogate::from_parts(grid, bounds, vlen, first, Vec::new(), 0)?;
    for _ in 0..level {
        s = s.refine_level(eval)?;
    }
    Ok(s)
}

/// Highest 1-D node count used by a level-ℓ grid.
pub fn max_nodes_1d(level: u32) -> usize {
    xi(level + 1)
}
