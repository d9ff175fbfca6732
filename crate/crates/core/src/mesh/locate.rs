//! Point location by walking from a bucket-grid seed, with exhaustive fallback.

use alloc::vec;
use alloc::vec::Vec;

use super::TriMesh;
use crate::fmath::{ceil, floor, sqrt};
use crate::geometry::Point;

const BARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Location {
    Inside { triangle: usize, bary: [f64; 3] },
    Outside,
}

impl Location {
    pub fn triangle(&self) -> Option<(usize, [f64; 3])> {
        match *self {
            Location::Inside { triangle, bary } => Some((triangle, bary)),
            Location::Outside => None,
        }
    }
}

/// Bucket grid over the mesh bounding box; each cell lists the triangles whose
/// bounding box overlaps it, in increasing index order.
#[derive(Clone, Debug)]
pub struct Locator {
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    nx: usize,
    ny: usize,
    cell_ptr: Vec<usize>,
    cell_idx: Vec<usize>,
}

impl Locator {
    pub fn new(m: &TriMesh) -> Locator {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in m.vertices() {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        let nt = m.triangle_count().max(1);
        let w = (x1 - x0).max(1e-300);
        let h = (y1 - y0).max(1e-300);
        let cells = nt as f64;
        let nx = (sqrt(cells * w / h) as usize).clamp(1, 4096);
        let ny = (sqrt(cells * h / w) as usize).clamp(1, 4096);
        let dx = w / nx as f64;
        let dy = h / ny as f64;
        let mut counts = vec![0usize; nx * ny + 1];
        let range = |t: usize| {
            let tri = m.triangle(t);
            let ps = tri.map(|v| m.vertex(v));
            let (mut a, mut b, mut c, mut d) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
            for p in ps {
                a = a.min(p.x);
                b = b.min(p.y);
                c = c.max(p.x);
                d = d.max(p.y);
            }
            let i0 = clampi(floor((a - x0) / dx) as i64 - 1, nx);
            let i1 = clampi(ceil((c - x0) / dx) as i64, nx);
            let j0 = clampi(floor((b - y0) / dy) as i64 - 1, ny);
            let j1 = clampi(ceil((d - y0) / dy) as i64, ny);
            (i0, i1, j0, j1)
        };
        for t in 0..m.triangle_count() {
            let (i0, i1, j0, j1) = range(t);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    counts[j * nx + i + 1] += 1;
                }
            }
        }
        for k in 0..nx * ny {
            counts[k + 1] += counts[k];
        }
        let mut fill = counts.clone();
        let mut idx = vec![0usize; counts[nx * ny]];
        for t in 0..m.triangle_count() {
            let (i0, i1, j0, j1) = range(t);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    idx[fill[j * nx + i]] = t;
                    fill[j * nx + i] += 1;
                }
            }
        }
        Locator { x0, y0, dx, dy, nx, ny, cell_ptr: counts, cell_idx: idx }
    }

    fn cell(&self, p: Point) -> Option<usize> {
        let fi = floor((p.x - self.x0) / self.dx);
        let fj = floor((p.y - self.y0) / self.dy);
        if !(fi >= -1.0 && fj >= -1.0 && fi <= self.nx as f64 && fj <= self.ny as f64) {
            return None;
        }
        let i = (fi.max(0.0) as usize).min(self.nx - 1);
        let j = (fj.max(0.0) as usize).min(self.ny - 1);
        Some(j * self.nx + i)
    }

    /// Walks from `hint` (or a bucket seed) toward `p`; the result is then
    /// normalised to the lowest-index triangle containing `p`.
    pub fn locate(&self, m: &TriMesh, p: Point, hint: Option<usize>) -> Location {
        let seed = hint.or_else(|| {
            self.cell(p).and_then(|c| self.cell_idx[self.cell_ptr[c]..self.cell_ptr[c + 1]].first().copied())
        });
        if let Some(t0) = seed {
            if let Some(t) = walk(m, p, t0) {
                return self.lowest(m, p, t);
            }
        }
        self.brute(m, p)
    }

    fn lowest(&self, m: &TriMesh, p: Point, t: usize) -> Location {
        let l = bary(m, t, p);
        let on_side = l.iter().any(|&x| x <= BARY_TOL);
        if on_side {
            // Candidates share a vertex with t; the bucket holds all of them.
            if let Some(c) = self.cell(p) {
                for &s in &self.cell_idx[self.cell_ptr[c]..self.cell_ptr[c + 1]] {
                    if s >= t {
                        break;
                    }
                    let ls = bary(m, s, p);
                    if inside(&ls) {
                        return Location::Inside { triangle: s, bary: clean(ls) };
                    }
                }
            }
        }
        Location::Inside { triangle: t, bary: clean(l) }
    }

    fn brute(&self, m: &TriMesh, p: Point) -> Location {
        if let Some(c) = self.cell(p) {
            for &t in &self.cell_idx[self.cell_ptr[c]..self.cell_ptr[c + 1]] {
                let l = bary(m, t, p);
                if inside(&l) {
                    return Location::Inside { triangle: t, bary: clean(l) };
                }
            }
        }
        Location::Outside
    }
}

fn clampi(i: i64, n: usize) -> usize {
    i.clamp(0, n as i64 - 1) as usize
}

fn bary(m: &TriMesh, t: usize, p: Point) -> [f64; 3] {
    let [a, b, c] = m.triangle(t);
    let (pa, pb, pc) = (m.vertex(a), m.vertex(b), m.vertex(c));
    let det = (pb.x - pa.x) * (pc.y - pa.y) - (pc.x - pa.x) * (pb.y - pa.y);
    let l1 = ((p.x - pa.x) * (pc.y - pa.y) - (pc.x - pa.x) * (p.y - pa.y)) / det;
    let l2 = ((pb.x - pa.x) * (p.y - pa.y) - (p.x - pa.x) * (pb.y - pa.y)) / det;
    [1.0 - l1 - l2, l1, l2]
}

fn inside(l: &[f64; 3]) -> bool {
    l.iter().all(|&x| x >= -BARY_TOL)
}

fn clean(l: [f64; 3]) -> [f64; 3] {
    let c = l.map(|x| x.clamp(0.0, 1.0));
    let s = c[0] + c[1] + c[2];
    c.map(|x| x / s)
}

fn walk(m: &TriMesh, p: Point, t0: usize) -> Option<usize> {
    let mut t = t0;
    let limit = 4 * m.triangle_count() + 16;
    for _ in 0..limit {
        let l = bary(m, t, p);
        if inside(&l) {
            return Some(t);
        }
        // Step across the edge opposite the most negative coordinate.
        let mut k = 0;
        for j in 1..3 {
            if l[j] < l[k] {
                k = j;
            }
        }
        let e = m.triangle_edges(t)[k];
        match m.edge_triangles(e) {
            (a, Some(b)) => t = if a == t { b } else { a },
            (_, None) => return None,
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centroid_and_vertex() {
        let m = TriMesh::rectangle(4, 4, 1.0, 2.0, 0.0, 1.0);
        let loc = Locator::new(&m);
        for t in 0..m.triangle_count() {
            let (tt, l) = loc.locate(&m, m.centroid(t), None).triangle().unwrap();
            assert_eq!(tt, t);
            for x in l {
                assert!((x - 1.0 / 3.0).abs() < 1e-12);
            }
        }
        for v in 0..m.vertex_count() {
            let (t, l) = loc.locate(&m, m.vertex(v), Some(m.triangle_count() - 1)).triangle().unwrap();
            let lowest = *m.vertex_triangles(v).iter().min().unwrap();
            assert_eq!(t, lowest);
            assert!(l.iter().any(|&x| (x - 1.0).abs() < 1e-12));
        }
        assert_eq!(loc.locate(&m, Point::new(5.0, 5.0), None), Location::Outside);
        assert_eq!(loc.locate(&m, Point::new(1.5, 1.2), Some(0)), Location::Outside);
    }
}
