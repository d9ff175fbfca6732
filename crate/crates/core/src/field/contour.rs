//! Marching-triangles level sets.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{point_in_polygon, polygon_area, Point};
use crate::mesh::NodalField;

#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    /// Closed polylines repeat their first point at the end.
    pub points: Vec<Point>,
    pub closed: bool,
}

impl Polyline {
    /// Points without the repeated closing point.
    pub fn vertices(&self) -> &[Point] {
        if self.closed && self.points.len() > 1 {
            &self.points[..self.points.len() - 1]
        } else {
            &self.points
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.closed && point_in_polygon(self.vertices(), p)
    }

    pub fn area(&self) -> f64 {
        polygon_area(self.vertices()).abs()
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }
}

fn lex_less(a: Point, b: Point) -> bool {
    a.x < b.x || (a.x == b.x && a.y < b.y)
}

/// Level set of a P1 field. Vertex values equal to `level` count as lying
/// just below it, so every crossing is on an edge interior or at a vertex.
pub fn extract_contour(f: &NodalField, level: f64) -> Vec<Polyline> {
    let m = &*f.mesh;
    let delta = {
        let d = 1e-12 * level.abs();
        if d > 0.0 {
            d
        } else {
            f64::MIN_POSITIVE
        }
    };
    let val = |v: usize| {
        let x = f.values[v];
        if x == level {
            level - delta
        } else {
            x
        }
    };
    let above = |v: usize| val(v) > level;
    let ne = m.edges().len();
    let mut point: Vec<Option<Point>> = vec![None; ne];
    let mut links: Vec<[usize; 2]> = vec![[usize::MAX; 2]; ne];
    let link = |links: &mut Vec<[usize; 2]>, a: usize, b: usize| {
        let slot = if links[a][0] == usize::MAX { 0 } else { 1 };
        links[a][slot] = b;
    };
    for t in 0..m.triangle_count() {
        let tri = m.triangle(t);
        let up = tri.map(above);
        if up[0] == up[1] && up[1] == up[2] {
            continue;
        }
        let te = m.triangle_edges(t);
        let mut cut = Vec::with_capacity(2);
        for k in 0..3 {
            // Edge opposite local vertex k joins the other two.
            let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            if above(a) != above(b) {
                let e = te[k];
                if point[e].is_none() {
                    let [p, q] = m.edges()[e];
                    let (vp, vq) = (val(p), val(q));
                    let s = (level - vp) / (vq - vp);
                    point[e] = Some(m.vertex(p).lerp(m.vertex(q), s));
                }
                cut.push(e);
            }
        }
        debug_assert_eq!(cut.len(), 2);
        link(&mut links, cut[0], cut[1]);
        link(&mut links, cut[1], cut[0]);
    }
    let deg = |e: usize| links[e].iter().filter(|&&x| x != usize::MAX).count();
    let mut seen = vec![false; ne];
    let mut out = Vec::new();
    let walk = |start: usize, seen: &mut Vec<bool>| -> (Vec<usize>, bool) {
        let mut chain = vec![start];
        seen[start] = true;
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            let next = links[cur].iter().copied().find(|&x| x != usize::MAX && x != prev && !seen[x]);
            match next {
                Some(n) => {
                    seen[n] = true;
                    chain.push(n);
                    prev = cur;
                    cur = n;
                }
                None => {
                    let closed = chain.len() > 2 && links[cur].contains(&start);
                    return (chain, closed);
                }
            }
        }
    };
    for e in 0..ne {
        if point[e].is_some() && !seen[e] && deg(e) == 1 {
            let (c, _) = walk(e, &mut seen);
            out.push(finish(c.iter().map(|&e| point[e].unwrap()).collect(), false));
        }
    }
    for e in 0..ne {
        if point[e].is_some() && !seen[e] {
            let (c, closed) = walk(e, &mut seen);
            out.push(finish(c.iter().map(|&e| point[e].unwrap()).collect(), closed));
        }
    }
    out.sort_by(|a, b| {
        let la = leftmost(&a.points);
        let lb = leftmost(&b.points);
        if lex_less(la, lb) {
            core::cmp::Ordering::Less
        } else if lex_less(lb, la) {
            core::cmp::Ordering::Greater
        } else {
            core::cmp::Ordering::Equal
        }
    });
    out
}

fn leftmost(p: &[Point]) -> Point {
    let mut best = p[0];
    for &q in &p[1..] {
        if lex_less(q, best) {
            best = q;
        }
    }
    best
}

/// Canonical orientation: open lines start at their leftmost end; loops start
/// at their leftmost point and run counter-clockwise.
fn finish(mut pts: Vec<Point>, closed: bool) -> Polyline {
    if closed {
        let k = (0..pts.len()).fold(0, |b, i| if lex_less(pts[i], pts[b]) { i } else { b });
        pts.rotate_left(k);
        if polygon_area(&pts) < 0.0 {
            pts[1..].reverse();
        }
        pts.push(pts[0]);
    } else if lex_less(*pts.last().unwrap(), pts[0]) {
        pts.reverse();
    }
    Polyline { points: pts, closed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriMesh;
    use alloc::sync::Arc;

    #[test]
    fn straight_line() {
        let m = Arc::new(TriMesh::rectangle(7, 5, 0.0, 1.0, 0.0, 1.0));
        let f = NodalField::from_fn(m, |p| p.x);
        let c = extract_contour(&f, 0.5);
        assert_eq!(c.len(), 1);
        assert!(!c[0].closed);
        for p in &c[0].points {
            assert!((p.x - 0.5).abs() < 1e-12);
        }
        assert!(c[0].points[0].y < 1e-12 && (c[0].points.last().unwrap().y - 1.0).abs() < 1e-12);
        assert!(extract_contour(&f, 2.0).is_empty());
    }

    #[test]
    fn circle_converges() {
        let mut prev = f64::MAX;
        for n in [8, 16, 32] {
            let m = Arc::new(TriMesh::rectangle(n, n, -2.0, 2.0, -2.0, 2.0));
            let f = NodalField::from_fn(m, |p| p.x * p.x + p.y * p.y);
            let c = extract_contour(&f, 1.0);
            assert_eq!(c.len(), 1);
            assert!(c[0].closed);
            assert_eq!(c[0].points[0], *c[0].points.last().unwrap());
            assert!(c[0].contains(Point::new(0.0, 0.0)));
            let dev = c[0].points.iter().fold(0.0f64, |d, p| d.max((p.norm() - 1.0).abs()));
            assert!(dev < prev / 3.0, "{dev} {prev}");
            prev = dev;
        }
    }

    #[test]
    fn level_at_vertex_values() {
        // On a grid with f = x every vertex column value equals some level.
        let m = Arc::new(TriMesh::rectangle(4, 3, 0.0, 4.0, 0.0, 3.0));
        let f = NodalField::from_fn(m, |p| p.x);
        let c = extract_contour(&f, 2.0);
        assert_eq!(c.len(), 1);
        for p in &c[0].points {
            assert!((p.x - 2.0).abs() < 1e-9);
        }
    }
}
