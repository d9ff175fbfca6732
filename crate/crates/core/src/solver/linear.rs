//! The fixed linear operator of one mesh level, factored once.

use alloc::vec::Vec;

use super::assembly::{assemble_boundary, assemble_interior, AssemblyError, BoundaryMatrix, DofMap};
use crate::linalg::{rcm_order, CsrMatrix, EnvelopeCholesky, FactorError, TripletBuilder};
use crate::mesh::TriMesh;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperatorError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Factor(#[from] FactorError),
}

/// Interior stiffness plus the Γ coupling, restricted to the non-axis vertices.
#[derive(Clone, Debug)]
pub struct FixedOperator {
    pub dofs: DofMap,
    pub matrix: CsrMatrix,
    chol: EnvelopeCholesky,
}

impl FixedOperator {
    pub fn new(m: &TriMesh, mu0: f64, rho: f64, q: usize) -> Result<FixedOperator, OperatorError> {
        let bm = assemble_boundary(m, rho, q)?;
        FixedOperator::with_boundary(m, mu0, &bm)
    }

    /// The Γ terms carry the same 1/μ₀ as the interior form.
    pub fn with_boundary(m: &TriMesh, mu0: f64, bm: &BoundaryMatrix) -> Result<FixedOperator, OperatorError> {
        let dofs = DofMap::new(m);
        let a = assemble_interior(m, mu0, &dofs)?;
        let nb = bm.size();
        let mut b = TripletBuilder::new(dofs.len());
        for i in 0..nb {
            let Some(di) = dofs.vertex_to_dof[bm.vertices[i]] else { continue };
            for j in 0..nb {
                let Some(dj) = dofs.vertex_to_dof[bm.vertices[j]] else { continue };
                let v = bm.total(i, j);
                b.add(di, dj, v / mu0);
            }
        }
        let matrix = a.add(&b.build());
        let nodes: Vec<usize> = (0..dofs.len()).collect();
        let perm = rcm_order(&matrix, &nodes);
        let chol = EnvelopeCholesky::factor(&matrix, perm)?;
        Ok(FixedOperator { dofs, matrix, chol })
    }

    /// Solves for nodal values given a per-vertex load; axis values are 0.
    pub fn solve(&self, load: &[f64]) -> Vec<f64> {
        let rhs = self.dofs.restrict(load);
        let x = self.chol.solve(&rhs);
        self.dofs.extend(&x, load.len())
    }
}
