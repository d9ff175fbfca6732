//! L² projection between meshes.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{Locator, MeshError, NodalField, TriMesh};
use crate::linalg::{rcm_order, CsrMatrix, EnvelopeCholesky, TripletBuilder};
use crate::quad::TRI3;

/// Projected field plus the destination vertices that fell outside the source mesh.
#[derive(Clone, Debug)]
pub struct Projection {
    pub field: NodalField,
    pub outside: Vec<usize>,
}

/// Factored P1 mass matrix of a destination mesh, reusable across many sources.
#[derive(Clone, Debug)]
pub struct Projector {
    mesh: Arc<TriMesh>,
    chol: EnvelopeCholesky,
}

pub fn mass_matrix(m: &TriMesh) -> CsrMatrix {
    let mut b = TripletBuilder::new(m.vertex_count());
    for t in 0..m.triangle_count() {
        let tri = m.triangle(t);
        let a = m.area(t);
        for i in 0..3 {
            for j in 0..3 {
                b.add(tri[i], tri[j], if i == j { a / 6.0 } else { a / 12.0 });
            }
        }
    }
    b.build()
}

impl Projector {
    pub fn new(mesh: Arc<TriMesh>) -> Result<Projector, MeshError> {
        let mm = mass_matrix(&mesh);
        let nodes: Vec<usize> = (0..mesh.vertex_count()).collect();
        let perm = rcm_order(&mm, &nodes);
        let chol = EnvelopeCholesky::factor(&mm, perm).map_err(|_| MeshError::Singular)?;
        Ok(Projector { mesh, chol })
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn project(&self, src: &NodalField) -> Projection {
        let dst = &*self.mesh;
        let sm = &*src.mesh;
        let loc = Locator::new(sm);
        let mut rhs = vec![0.0; dst.vertex_count()];
        let mut hint = None;
        for t in 0..dst.triangle_count() {
            let tri = dst.triangle(t);
            let a = dst.area(t);
            for (l, w) in TRI3 {
                let p = dst.bary_point(t, l);
                let v = match loc.locate(sm, p, hint).triangle() {
                    Some((s, ls)) => {
                        hint = Some(s);
                        src.eval_bary(s, ls)
                    }
                    None => 0.0,
                };
                for k in 0..3 {
                    rhs[tri[k]] += w * a * l[k] * v;
                }
            }
        }
        let values = self.chol.solve(&rhs);
        let outside = (0..dst.vertex_count())
            .filter(|&v| loc.locate(sm, dst.vertex(v), None).triangle().is_none())
            .collect();
        Projection { field: NodalField::new(self.mesh.clone(), values), outside }
    }
}

/// One-shot projection of `src` onto `dst`.
pub fn project_field(src: &NodalField, dst: Arc<TriMesh>) -> Result<Projection, MeshError> {
    Ok(Projector::new(dst)?.project(src))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::refine_marked;

    #[test]
    fn identity_on_same_mesh() {
        let m = Arc::new(TriMesh::rectangle(6, 5, 1.0, 2.0, -1.0, 1.0));
        let f = NodalField::from_fn(m.clone(), |p| (3.0 * p.x).sin() * p.y * p.y);
        let r = project_field(&f, m.clone()).unwrap();
        for (a, b) in r.field.values.iter().zip(&f.values) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(r.outside.is_empty());
    }

    #[test]
    fn affine_reproduced_on_refinement() {
        let m = Arc::new(TriMesh::rectangle(4, 4, 1.0, 2.0, -1.0, 1.0));
        let f = NodalField::from_fn(m.clone(), |p| p.x + 2.0 * p.y);
        let fine = Arc::new(refine_marked(&m, &[0, 3, 5, 6, 20]).mesh);
        let r = project_field(&f, fine.clone()).unwrap();
        for (p, v) in fine.vertices().iter().zip(&r.field.values) {
            assert!((p.x + 2.0 * p.y - v).abs() < 1e-10);
        }
    }
}
