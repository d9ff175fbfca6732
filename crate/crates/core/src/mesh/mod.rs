//! Unstructured triangular meshes of the region inside Γ.

mod locate;
mod project;
mod refine;

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::fmath::atan2;
use crate::geometry::{Point, ReactorGeometry, RegionTag};

pub use locate::{Location, Locator};
pub use project::{project_field, Projection, Projector};
pub use refine::{mark_near_separatrix, refine_marked, uniform_refine_interior, Refinement};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("triangle {0} has zero area")]
    Degenerate(usize),
    #[error("triangle {0} references vertex {1} out of range")]
    BadIndex(usize, usize),
    #[error("edge ({0}, {1}) shared by more than two triangles")]
    NonManifold(usize, usize),
    #[error("array lengths disagree: {0}")]
    Length(&'static str),
    #[error("degenerate marking level")]
    DegenerateLevel,
    #[error("mass matrix factorization failed")]
    Singular,
}

/// Conforming P1 triangulation with topology tables built at construction.
#[derive(Clone, Debug)]
pub struct TriMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    tags: Vec<RegionTag>,
    axis: Vec<bool>,
    gamma: Vec<bool>,
    edges: Vec<[usize; 2]>,
    edge_tris: Vec<[usize; 2]>,
    tri_edges: Vec<[usize; 3]>,
    vt_ptr: Vec<usize>,
    vt_idx: Vec<usize>,
    vn_ptr: Vec<usize>,
    vn_idx: Vec<usize>,
    on_boundary: Vec<bool>,
}

impl PartialEq for TriMesh {
    fn eq(&self, o: &Self) -> bool {
        self.vertices == o.vertices
            && self.triangles == o.triangles
            && self.tags == o.tags
            && self.axis == o.axis
            && self.gamma == o.gamma
    }
}

impl TriMesh {
    /// Builds a mesh; clockwise triangles are reoriented.
    pub fn new(
        vertices: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
        tags: Vec<RegionTag>,
        axis: Vec<bool>,
        gamma: Vec<bool>,
    ) -> Result<TriMesh, MeshError> {
        let nv = vertices.len();
        if tags.len() != triangles.len() {
            return Err(MeshError::Length("tags vs triangles"));
        }
        if axis.len() != nv || gamma.len() != nv {
            return Err(MeshError::Length("flags vs vertices"));
        }
        for (t, tri) in triangles.iter_mut().enumerate() {
            for &v in tri.iter() {
                if v >= nv {
                    return Err(MeshError::BadIndex(t, v));
                }
            }
            let a = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if a == 0.0 {
                return Err(MeshError::Degenerate(t));
            }
            if a < 0.0 {
                tri.swap(1, 2);
            }
        }
        let mut keyed: Vec<(usize, usize, usize, usize)> = Vec::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                keyed.push((a.min(b), a.max(b), t, k));
            }
        }
        keyed.sort_unstable();
        let mut edges = Vec::new();
        let mut edge_tris = Vec::new();
        let mut tri_edges = vec![[NONE; 3]; triangles.len()];
        let mut i = 0;
        while i < keyed.len() {
            let (a, b, t, k) = keyed[i];
            let e = edges.len();
            edges.push([a, b]);
            let mut pair = [t, NONE];
            tri_edges[t][k] = e;
            let mut j = i + 1;
            while j < keyed.len() && keyed[j].0 == a && keyed[j].1 == b {
                if pair[1] != NONE {
                    return Err(MeshError::NonManifold(a, b));
                }
                pair[1] = keyed[j].2;
                tri_edges[keyed[j].2][keyed[j].3] = e;
                j += 1;
            }
            edge_tris.push(pair);
            i = j;
        }
        let mut on_boundary = vec![false; nv];
        for (e, p) in edges.iter().zip(&edge_tris) {
            if p[1] == NONE {
                on_boundary[e[0]] = true;
                on_boundary[e[1]] = true;
            }
        }
        let (vt_ptr, vt_idx) = csr_from_pairs(
            nv,
            triangles.iter().enumerate().flat_map(|(t, tri)| tri.iter().map(move |&v| (v, t))),
        );
        let (vn_ptr, mut vn_idx) =
            csr_from_pairs(nv, edges.iter().flat_map(|e| [(e[0], e[1]), (e[1], e[0])]));
        for v in 0..nv {
            let p = vertices[v];
            vn_idx[vn_ptr[v]..vn_ptr[v + 1]].sort_by(|&a, &b| {
                let ta = atan2(vertices[a].y - p.y, vertices[a].x - p.x);
                let tb = atan2(vertices[b].y - p.y, vertices[b].x - p.x);
                ta.partial_cmp(&tb).unwrap().then(a.cmp(&b))
            });
        }
        Ok(TriMesh {
            vertices,
            triangles,
            tags,
            axis,
            gamma,
            edges,
            edge_tris,
            tri_edges,
            vt_ptr,
            vt_idx,
            vn_ptr,
            vn_idx,
            on_boundary,
        })
    }

    /// Structured rectangle mesh split along one diagonal per cell, all tagged inside the limiter.
    /// Vertices on x = 0 are flagged axis.
    pub fn rectangle(nx: usize, ny: usize, x0: f64, x1: f64, y0: f64, y1: f64) -> TriMesh {
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                let x = x0 + (x1 - x0) * i as f64 / nx as f64;
                let y = y0 + (y1 - y0) * j as f64 / ny as f64;
                vertices.push(Point::new(x, y));
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let axis = vertices.iter().map(|p| p.x == 0.0).collect();
        let n = vertices.len();
        let nt = triangles.len();
        TriMesh::new(vertices, triangles, vec![RegionTag::InsideLimiter; nt], axis, vec![false; n])
            .expect("structured mesh")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    pub fn tags(&self) -> &[RegionTag] {
        &self.tags
    }

    pub fn tag(&self, t: usize) -> RegionTag {
        self.tags[t]
    }

    pub fn is_axis(&self, v: usize) -> bool {
        self.axis[v]
    }

    pub fn is_gamma(&self, v: usize) -> bool {
        self.gamma[v]
    }

    pub fn axis_flags(&self) -> &[bool] {
        &self.axis
    }

    pub fn gamma_flags(&self) -> &[bool] {
        &self.gamma
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Triangles on each side of edge `e`; the second is `None` on the mesh boundary.
    pub fn edge_triangles(&self, e: usize) -> (usize, Option<usize>) {
        let p = self.edge_tris[e];
        (p[0], if p[1] == NONE { None } else { Some(p[1]) })
    }

    /// Edge opposite local vertex k of triangle t.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_tris[e][1] == NONE
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn vertex_triangles(&self, v: usize) -> &[usize] {
        &self.vt_idx[self.vt_ptr[v]..self.vt_ptr[v + 1]]
    }

    /// Neighbours of v sorted counter-clockwise by angle.
    pub fn vertex_neighbors(&self, v: usize) -> &[usize] {
        &self.vn_idx[self.vn_ptr[v]..self.vn_ptr[v + 1]]
    }

    /// Boundary edges whose endpoints are both on Γ, ordered by angle.
    pub fn gamma_edges(&self) -> Vec<[usize; 2]> {
        let mut out: Vec<[usize; 2]> = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(e, ed)| self.is_boundary_edge(e) && self.gamma[ed[0]] && self.gamma[ed[1]])
            .map(|(_, ed)| {
                let (a, b) = (ed[0], ed[1]);
                if self.angle(a) <= self.angle(b) {
                    [a, b]
                } else {
                    [b, a]
                }
            })
            .collect();
        out.sort_by(|p, q| self.angle(p[0]).partial_cmp(&self.angle(q[0])).unwrap());
        out
    }

    fn angle(&self, v: usize) -> f64 {
        atan2(self.vertices[v].y, self.vertices[v].x)
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        Point::new((pa.x + pb.x + pc.x) / 3.0, (pa.y + pb.y + pc.y) / 3.0)
    }

    /// Point at barycentric coordinates l within triangle t.
    pub fn bary_point(&self, t: usize, l: [f64; 3]) -> Point {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        Point::new(
            l[0] * pa.x + l[1] * pb.x + l[2] * pc.x,
            l[0] * pa.y + l[1] * pb.y + l[2] * pc.y,
        )
    }

    /// Gradients of the three P1 basis functions on triangle t.
    pub fn basis_gradients(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        let two_a = 2.0 * signed_area(pa, pb, pc);
        [
            Point::new((pb.y - pc.y) / two_a, (pc.x - pb.x) / two_a),
            Point::new((pc.y - pa.y) / two_a, (pa.x - pc.x) / two_a),
            Point::new((pa.y - pb.y) / two_a, (pb.x - pa.x) / two_a),
        ]
    }

    pub fn max_edge_length(&self, pred: impl Fn(RegionTag) -> bool) -> f64 {
        let mut h: f64 = 0.0;
        for (t, tri) in self.triangles.iter().enumerate() {
            if !pred(self.tags[t]) {
                continue;
            }
            for k in 0..3 {
                h = h.max(self.vertices[tri[k]].dist(self.vertices[tri[(k + 1) % 3]]));
            }
        }
        h
    }

    /// Mean length of the edges incident to v.
    pub fn local_edge_length(&self, v: usize) -> f64 {
        let nb = self.vertex_neighbors(v);
        if nb.is_empty() {
            return 0.0;
        }
        nb.iter().map(|&w| self.vertices[v].dist(self.vertices[w])).sum::<f64>() / nb.len() as f64
    }

    /// Recomputes triangle tags from the geometry at each centroid.
    pub fn retag(&mut self, g: &ReactorGeometry) {
        for t in 0..self.triangles.len() {
            self.tags[t] = g.classify_point(self.centroid(t));
        }
    }

    /// Submesh of the kept triangles plus the map from new to old vertex indices.
    pub fn submesh(&self, keep: impl Fn(usize) -> bool) -> (TriMesh, Vec<usize>) {
        let mut map = vec![NONE; self.vertices.len()];
        let mut old = Vec::new();
        let mut tris = Vec::new();
        let mut tags = Vec::new();
        for t in 0..self.triangles.len() {
            if !keep(t) {
                continue;
            }
            let mut nt = [0; 3];
            for k in 0..3 {
                let v = self.triangles[t][k];
                if map[v] == NONE {
                    map[v] = old.len();
                    old.push(v);
                }
                nt[k] = map[v];
            }
            tris.push(nt);
            tags.push(self.tags[t]);
        }
        let verts = old.iter().map(|&v| self.vertices[v]).collect();
        let axis = old.iter().map(|&v| self.axis[v]).collect();
        let gamma = old.iter().map(|&v| self.gamma[v]).collect();
        (TriMesh::new(verts, tris, tags, axis, gamma).expect("submesh of valid mesh"), old)
    }

    /// Every edge shared by one or two triangles and no vertex lying inside another edge.
    pub fn conformity_audit(&self) -> bool {
        let n = self.vertices.len();
        let mut used = vec![false; n];
        for tri in &self.triangles {
            for &v in tri {
                used[v] = true;
            }
        }
        for (e, ed) in self.edges.iter().enumerate() {
            let (a, b) = (self.vertices[ed[0]], self.vertices[ed[1]]);
            // A hanging node is a vertex on the open segment of a boundary-like edge.
            if self.is_boundary_edge(e) && !(self.gamma[ed[0]] && self.gamma[ed[1]]) {
                for (w, p) in self.vertices.iter().enumerate() {
                    if w == ed[0] || w == ed[1] || !used[w] {
                        continue;
                    }
                    let ab = b.sub(a);
                    let ap = p.sub(a);
                    let t = ap.dot(ab) / ab.dot(ab);
                    if t > 1e-9 && t < 1.0 - 1e-9 && ab.cross(ap).abs() <= 1e-12 * ab.dot(ab) {
                        return false;
                    }
                }
            }
        }
        self.triangles.iter().all(|tri| {
            signed_area(self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]) > 0.0
        })
    }
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

fn csr_from_pairs(n: usize, pairs: impl Iterator<Item = (usize, usize)> + Clone) -> (Vec<usize>, Vec<usize>) {
    let mut ptr = vec![0usize; n + 1];
    for (a, _) in pairs.clone() {
        ptr[a + 1] += 1;
    }
    for i in 0..n {
        ptr[i + 1] += ptr[i];
    }
    let mut fill = ptr.clone();
    let mut idx = vec![0usize; ptr[n]];
    for (a, b) in pairs {
        idx[fill[a]] = b;
        fill[a] += 1;
    }
    (ptr, idx)
}

/// Piecewise-linear field: one value per vertex of its mesh.
#[derive(Clone, Debug)]
pub struct NodalField {
    pub mesh: Arc<TriMesh>,
    pub values: Vec<f64>,
}

impl NodalField {
    pub fn new(mesh: Arc<TriMesh>, values: Vec<f64>) -> Self {
        assert_eq!(mesh.vertex_count(), values.len());
        NodalField { mesh, values }
    }

    pub fn from_fn(mesh: Arc<TriMesh>, f: impl Fn(Point) -> f64) -> Self {
        let values = mesh.vertices().iter().map(|&p| f(p)).collect();
        NodalField { mesh, values }
    }

    /// Value at a point inside triangle t given barycentric coordinates.
    pub fn eval_bary(&self, t: usize, l: [f64; 3]) -> f64 {
        let [a, b, c] = self.mesh.triangle(t);
        l[0] * self.values[a] + l[1] * self.values[b] + l[2] * self.values[c]
    }
}
