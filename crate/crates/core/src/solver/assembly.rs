//! Interior stiffness, Γ coupling blocks and coil loads.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use super::kernels::{kernel_m_unchecked, kernel_n};
use crate::fmath::{atan2, cos, sin};
use crate::geometry::{CurrentVector, Point, ReactorGeometry, RegionTag};
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::mesh::TriMesh;
use crate::quad::{gauss_legendre, TRI3};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssemblyError {
    #[error("triangle {0}: quadrature point at x <= 0 off the axis")]
    AxisQuadrature(usize),
    #[error("boundary edge ({0}, {1}) is not on gamma")]
    EdgeOffGamma(usize, usize),
    #[error("coil index {0} has no current")]
    MissingCurrent(usize),
}

/// Unknown numbering: every vertex except the axis ones.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub vertex_to_dof: Vec<Option<usize>>,
    pub dof_to_vertex: Vec<usize>,
}

impl DofMap {
    pub fn new(m: &TriMesh) -> DofMap {
        let mut vertex_to_dof = vec![None; m.vertex_count()];
        let mut dof_to_vertex = Vec::new();
        for v in 0..m.vertex_count() {
            if !m.is_axis(v) {
                vertex_to_dof[v] = Some(dof_to_vertex.len());
                dof_to_vertex.push(v);
            }
        }
        DofMap { vertex_to_dof, dof_to_vertex }
    }

    pub fn len(&self) -> usize {
        self.dof_to_vertex.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dof_to_vertex.is_empty()
    }

    pub fn restrict(&self, vertex_values: &[f64]) -> Vec<f64> {
        self.dof_to_vertex.iter().map(|&v| vertex_values[v]).collect()
    }

    pub fn extend(&self, dof_values: &[f64], nv: usize) -> Vec<f64> {
        let mut out = vec![0.0; nv];
        for (d, &v) in self.dof_to_vertex.iter().enumerate() {
            out[v] = dof_values[d];
        }
        out
    }
}

/// P1 stiffness of ∫ (1/(μx)) ∇ψ·∇φ on the non-axis vertices.
pub fn assemble_interior(m: &TriMesh, mu: f64, dofs: &DofMap) -> Result<CsrMatrix, AssemblyError> {
    let mut b = TripletBuilder::new(dofs.len());
    for t in 0..m.triangle_count() {
        let tri = m.triangle(t);
        let mut coef = 0.0;
        for (l, w) in TRI3 {
            let p = m.bary_point(t, l);
            if p.x <= 0.0 {
                return Err(AssemblyError::AxisQuadrature(t));
            }
            coef += w / (mu * p.x);
        }
        coef *= m.area(t);
        let g = m.basis_gradients(t);
        for i in 0..3 {
            let Some(di) = dofs.vertex_to_dof[tri[i]] else { continue };
            for j in 0..3 {
                let Some(dj) = dofs.vertex_to_dof[tri[j]] else { continue };
                b.add(di, dj, coef * g[i].dot(g[j]));
            }
        }
    }
    Ok(b.build())
}

/// Dense Γ block over all Γ vertices (poles included), split into its two parts.
#[derive(Clone, Debug)]
pub struct BoundaryMatrix {
    pub vertices: Vec<usize>,
    /// ∫ ψ N φ.
    pub n_part: Vec<f64>,
    /// ½ ∫∫ (ψ₁ − ψ₂) M (φ₁ − φ₂).
    pub m_part: Vec<f64>,
}

impl BoundaryMatrix {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    pub fn total(&self, i: usize, j: usize) -> f64 {
        let n = self.size();
        self.n_part[i * n + j] + self.m_part[i * n + j]
    }
}

/// Geometric grading ratio and depth for the log-singular directions.
const GRADE_SIGMA: f64 = 0.15;
const GRADE_LEVELS: usize = 10;

fn graded_rule(q: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(q);
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    let mut hi = 1.0;
    for k in 0..=GRADE_LEVELS {
        let lo = if k == GRADE_LEVELS { 0.0 } else { hi * GRADE_SIGMA };
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(lo + (hi - lo) * x);
            ws.push((hi - lo) * w);
        }
        hi = lo;
    }
    (xs, ws)
}

struct Edge {
    verts: [usize; 2],
    th: [f64; 2],
}

impl Edge {
    fn len(&self) -> f64 {
        self.th[1] - self.th[0]
    }
}

/// Assembles the Γ coupling block with Gauss order `q` per edge.
pub fn assemble_boundary(m: &TriMesh, rho: f64, q: usize) -> Result<BoundaryMatrix, AssemblyError> {
    let gedges = m.gamma_edges();
    let mut vertices: Vec<usize> = gedges.iter().flat_map(|e| [e[0], e[1]]).collect();
    vertices.sort_unstable();
    vertices.dedup();
    let angle = |v: usize| {
        let p = m.vertex(v);
        atan2(p.y, p.x)
    };
    vertices.sort_by(|&a, &b| angle(a).partial_cmp(&angle(b)).unwrap());
    let nb = vertices.len();
    let local = |v: usize| vertices.iter().position(|&w| w == v).unwrap();
    let mut edges = Vec::with_capacity(gedges.len());
    for e in &gedges {
        for &v in e {
            let r = m.vertex(v).norm();
            if (r - rho).abs() > 1e-9 * rho {
                return Err(AssemblyError::EdgeOffGamma(e[0], e[1]));
            }
        }
        edges.push(Edge { verts: [local(e[0]), local(e[1])], th: [angle(e[0]), angle(e[1])] });
    }
    let at = |th: f64| Point::new(rho * cos(th), rho * sin(th));

    let mut n_part = vec![0.0; nb * nb];
    let (gx, gw) = gauss_legendre(q);
    for e in &edges {
        let l = e.len();
        for (x, w) in gx.iter().zip(&gw) {
            let th = e.th[0] + l * x;
            let p = at(th);
            let nval = kernel_n(p, rho).unwrap_or(0.0);
            let phi = [1.0 - x, *x];
            for a in 0..2 {
                for b in 0..2 {
                    n_part[e.verts[a] * nb + e.verts[b]] += w * l * rho * nval * phi[a] * phi[b];
                }
            }
        }
    }

    let mut m_part = vec![0.0; nb * nb];
    let (g2x, g2w) = gauss_legendre(2 * q);
    let (grx, grw) = graded_rule(q);
    let pole = |e: &Edge| e.th[0] <= -FRAC_PI_2 + 1e-12 || e.th[1] >= FRAC_PI_2 - 1e-12;
    for (i, e) in edges.iter().enumerate() {
        for (j, f) in edges.iter().enumerate().skip(i) {
            let mut acc = [[0.0f64; 4]; 4];
            let ids = [e.verts[0], e.verts[1], f.verts[0], f.verts[1]];
            // c holds φ(X) − φ(Y) per slot of (e0, e1, f0, f1) at X = e(s), Y = f(t).
            // Near the diagonal M blows up like the inverse square distance, so the
            // differences are formed from the offsets directly rather than as
            // 1 − s − (1 − t), which would cancel catastrophically.
            let mut add = |s: f64, t: f64, c: &[(usize, f64)], w: f64| {
                let x = at(e.th[0] + e.len() * s);
                let y = at(f.th[0] + f.len() * t);
                let k = kernel_m_unchecked(x, y) * w;
                for &(a, ca) in c {
                    for &(b, cb) in c {
                        acc[a][b] += k * ca * cb;
                    }
                }
            };
            let jac = e.len() * f.len() * rho * rho;
            if i == j {
                // Split along the diagonal: t = s ± w, graded in w.
                let (zx, zw) = if pole(e) { graded_rule(q) } else { (g2x.clone(), g2w.clone()) };
                let pole_at_start = e.th[0] <= -FRAC_PI_2 + 1e-12;
                for (wv, ww) in grx.iter().zip(&grw) {
                    for (z, zwt) in zx.iter().zip(&zw) {
                        let z = if pole(e) && !pole_at_start { 1.0 - z } else { *z };
                        let s = (1.0 - wv) * z;
                        let wt = jac * ww * zwt * (1.0 - wv);
                        add(s, s + wv, &[(0, *wv), (1, -wv)], wt);
                        add(s + wv, s, &[(0, -wv), (1, *wv)], wt);
                    }
                }
            } else if e.verts[1] == f.verts[0] {
                // Shared vertex at s = 1, t = 0; Duffy about that corner with
                // s = 1 − σ and t = τ.
                let mut corner = |sg: f64, tau: f64, w: f64| add(1.0 - sg, tau, &[(0, sg), (1, tau - sg), (3, -tau)], w);
                for (u, uw) in grx.iter().zip(&grw) {
                    for (v, vw) in g2x.iter().zip(&g2w) {
                        let wt = jac * uw * vw * u;
                        corner(*u, u * v, wt);
                        corner(u * v, *u, wt);
                    }
                }
            } else {
                let gap = (f.th[0] - e.th[1]).max(0.0);
                let ratio = gap / e.len().max(f.len());
                let n = if ratio >= 1.5 { q } else if ratio >= 0.5 { 2 * q } else { 3 * q };
                let (hx, hw) = if n == 2 * q { (g2x.clone(), g2w.clone()) } else { gauss_legendre(n) };
                for (s, sw) in hx.iter().zip(&hw) {
                    for (t, tw) in hx.iter().zip(&hw) {
                        add(*s, *t, &[(0, 1.0 - s), (1, *s), (2, t - 1.0), (3, -t)], jac * sw * tw);
                    }
                }
            }
            // The (e, f) and (f, e) orderings contribute equally; with the ½ in front
            // of the double integral, distinct pairs count once and e = f counts ½.
            let factor = if i == j { 0.5 } else { 1.0 };
            for a in 0..4 {
                for b in 0..4 {
                    m_part[ids[a] * nb + ids[b]] += factor * acc[a][b];
                }
            }
        }
    }
    // Symmetrize away rounding differences.
    for a in 0..nb {
        for b in a + 1..nb {
            let s = 0.5 * (m_part[a * nb + b] + m_part[b * nb + a]);
            m_part[a * nb + b] = s;
            m_part[b * nb + a] = s;
            let s = 0.5 * (n_part[a * nb + b] + n_part[b * nb + a]);
            n_part[a * nb + b] = s;
            n_part[b * nb + a] = s;
        }
    }
    let vertices = vertices;
    Ok(BoundaryMatrix { vertices, n_part, m_part })
}

/// Nodal load ∫ (I_i/S_i) φ over coil triangles.
pub fn coil_load(m: &TriMesh, g: &ReactorGeometry, currents: &CurrentVector) -> Result<Vec<f64>, AssemblyError> {
    let dens = g
        .coil_current_density(currents)
        .map_err(|_| AssemblyError::MissingCurrent(currents.len()))?;
    let mut out = vec![0.0; m.vertex_count()];
    for t in 0..m.triangle_count() {
        if let RegionTag::Coil(i) = m.tag(t) {
            let d = *dens.get(i).ok_or(AssemblyError::MissingCurrent(i))?;
            let share = d * m.area(t) / 3.0;
            for v in m.triangle(t) {
                out[v] += share;
            }
        }
    }
    Ok(out)
}
