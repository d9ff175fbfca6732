//! Red/green refinement and separatrix-band marking.

use alloc::vec;
use alloc::vec::Vec;

use super::{MeshError, NodalField, TriMesh};
use crate::fmath::{atan2, cos, sin};
use crate::geometry::Point;

/// Refined mesh plus, for each new vertex, the endpoints of the edge it splits.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub mesh: TriMesh,
    pub parents: Vec<[usize; 2]>,
}

impl Refinement {
    /// Carries a nodal field over by keeping old values and averaging across split edges.
    pub fn interpolate(&self, values: &[f64]) -> Vec<f64> {
        let mut out = values.to_vec();
        out.extend(self.parents.iter().map(|p| 0.5 * (values[p[0]] + values[p[1]])));
        out
    }
}

/// Red-refines marked triangles and closes the mesh with green bisections.
pub fn refine_marked(m: &TriMesh, marked: &[usize]) -> Refinement {
    let nt = m.triangle_count();
    let mut red = vec![false; nt];
    let mut split = vec![false; m.edges().len()];
    for &t in marked {
        red[t] = true;
        for e in m.triangle_edges(t) {
            split[e] = true;
        }
    }
    loop {
        let mut changed = false;
        for t in 0..nt {
            if red[t] {
                continue;
            }
            let es = m.triangle_edges(t);
            if es.iter().filter(|&&e| split[e]).count() >= 2 {
                red[t] = true;
                for e in es {
                    split[e] = true;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let nv = m.vertex_count();
    let mut verts = m.vertices().to_vec();
    let mut axis = m.axis_flags().to_vec();
    let mut gamma = m.gamma_flags().to_vec();
    let mut parents = Vec::new();
    let mut mid = vec![usize::MAX; m.edges().len()];
    for (e, ed) in m.edges().iter().enumerate() {
        if !split[e] {
            continue;
        }
        let (a, b) = (ed[0], ed[1]);
        let (pa, pb) = (m.vertex(a), m.vertex(b));
        let on_gamma = m.is_boundary_edge(e) && m.is_gamma(a) && m.is_gamma(b);
        let p = if on_gamma {
            let r = 0.5 * (pa.norm() + pb.norm());
            let th = 0.5 * (atan2(pa.y, pa.x) + atan2(pb.y, pb.x));
            Point::new(r * cos(th), r * sin(th))
        } else {
            pa.lerp(pb, 0.5)
        };
        let on_axis = m.is_axis(a) && m.is_axis(b);
        mid[e] = verts.len();
        verts.push(if on_axis { Point::new(0.0, p.y) } else { p });
        axis.push(on_axis);
        gamma.push(on_gamma);
        parents.push([a, b]);
    }
    debug_assert_eq!(verts.len(), nv + parents.len());

    let mut tris = Vec::with_capacity(nt + 3 * marked.len());
    let mut tags = Vec::with_capacity(tris.capacity());
    for t in 0..nt {
        let tri = m.triangle(t);
        let es = m.triangle_edges(t);
        let tag = m.tag(t);
        if red[t] {
            // es[k] is opposite tri[k]
            let m0 = mid[es[2]]; // between tri[0], tri[1]
            let m1 = mid[es[0]]; // between tri[1], tri[2]
            let m2 = mid[es[1]]; // between tri[2], tri[0]
            for c in [[tri[0], m0, m2], [m0, tri[1], m1], [m2, m1, tri[2]], [m0, m1, m2]] {
                tris.push(c);
                tags.push(tag);
            }
        } else if let Some(k) = (0..3).find(|&k| split[es[k]]) {
            let mv = mid[es[k]];
            let (v0, v1, v2) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
            for c in [[v0, v1, mv], [v0, mv, v2]] {
                tris.push(c);
                tags.push(tag);
            }
        } else {
            tris.push(tri);
            tags.push(tag);
        }
    }
    let mesh = TriMesh::new(verts, tris, tags, axis, gamma).expect("refinement keeps mesh valid");
    Refinement { mesh, parents }
}

/// Red-refines every in-vessel triangle `levels` times.
pub fn uniform_refine_interior(m: &TriMesh, levels: usize) -> TriMesh {
    let mut cur = m.clone();
    for _ in 0..levels {
        let marked: Vec<usize> =
            (0..cur.triangle_count()).filter(|&t| cur.tag(t).in_vessel()).collect();
        cur = refine_marked(&cur, &marked).mesh;
    }
    cur
}

/// Triangles with a vertex inside the band |f - psi_star| <= alpha |psi_star|,
/// plus those the level set f = psi_star crosses, so that the marked set
/// always covers the contour even when the band is thinner than an element.
pub fn mark_near_separatrix(f: &NodalField, psi_star: f64, alpha: f64) -> Result<Vec<usize>, MeshError> {
    if psi_star == 0.0 {
        return Err(MeshError::DegenerateLevel);
    }
    let w = alpha * psi_star.abs();
    let inside: Vec<bool> = f.values.iter().map(|v| (v - psi_star).abs() <= w).collect();
    Ok((0..f.mesh.triangle_count())
        .filter(|&t| {
            let tri = f.mesh.triangle(t);
            let above = tri.iter().filter(|&&v| f.values[v] > psi_star).count();
            tri.iter().any(|&v| inside[v]) || (above > 0 && above < 3)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RegionTag;
    use alloc::sync::Arc;

    fn two_triangles() -> TriMesh {
        let v = vec![
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
        ];
        TriMesh::new(
            v,
            vec![[0, 1, 2], [0, 2, 3]],
            vec![RegionTag::InsideLimiter; 2],
            vec![false; 4],
            vec![false; 4],
        )
        .unwrap()
    }

    #[test]
    fn empty_marking_is_identity() {
        let m = two_triangles();
        let r = refine_marked(&m, &[]);
        assert_eq!(r.mesh, m);
        assert!(r.parents.is_empty());
    }

    #[test]
    fn single_red_with_green_closure() {
        let m = two_triangles();
        let r = refine_marked(&m, &[0]);
        assert_eq!(r.mesh.triangle_count(), 4 + 2);
        assert_eq!(r.mesh.vertex_count(), 4 + 3);
        assert!(r.mesh.conformity_audit());
        for v in 0..4 {
            assert_eq!(r.mesh.vertex(v), m.vertex(v));
        }
    }

    #[test]
    fn all_marked_adds_one_vertex_per_edge() {
        let m = TriMesh::rectangle(4, 3, 1.0, 2.0, 0.0, 1.0);
        let all: Vec<usize> = (0..m.triangle_count()).collect();
        let r = refine_marked(&m, &all);
        assert_eq!(r.mesh.vertex_count(), m.vertex_count() + m.edges().len());
        assert_eq!(r.mesh.triangle_count(), 4 * m.triangle_count());
    }

    #[test]
    fn uniform_levels_shrink_edges() {
        let m = TriMesh::rectangle(3, 3, 1.0, 2.0, 0.0, 1.0);
        assert_eq!(uniform_refine_interior(&m, 0), m);
        let m1 = uniform_refine_interior(&m, 1);
        assert_eq!(m1.triangle_count(), 4 * m.triangle_count());
        let m2 = uniform_refine_interior(&m, 2);
        let h0 = m.max_edge_length(|t| t.in_vessel());
        let h2 = m2.max_edge_length(|t| t.in_vessel());
        assert!(h2 <= 0.25 * h0 + 1e-14);
    }

    #[test]
    fn band_marking() {
        let m = Arc::new(TriMesh::rectangle(10, 10, 0.0, 2.0, 0.0, 2.0));
        let f = NodalField::from_fn(m.clone(), |p| p.x);
        let marked = mark_near_separatrix(&f, 1.0, 0.05).unwrap();
        for t in 0..m.triangle_count() {
            let vals = m.triangle(t).map(|v| f.values[v]);
            let touches = vals.iter().any(|v| (v - 1.0).abs() <= 0.05)
                || (vals.iter().any(|&v| v > 1.0) && vals.iter().any(|&v| v <= 1.0));
            assert_eq!(marked.contains(&t), touches);
        }
        let all = mark_near_separatrix(&NodalField::from_fn(m.clone(), |_| 3.0), 3.0, 0.05).unwrap();
        assert_eq!(all.len(), m.triangle_count());
        assert!(mark_near_separatrix(&f, 0.0, 0.05).is_err());
    }

    #[test]
    fn interpolation_exact_for_affine() {
        let m = TriMesh::rectangle(3, 3, 1.0, 2.0, 0.0, 1.0);
        let vals: Vec<f64> = m.vertices().iter().map(|p| 2.0 * p.x - p.y).collect();
        let r = refine_marked(&m, &[0, 4, 7]);
        let fine = r.interpolate(&vals);
        for (p, v) in r.mesh.vertices().iter().zip(&fine) {
            assert!((2.0 * p.x - p.y - v).abs() < 1e-14);
        }
    }
}
