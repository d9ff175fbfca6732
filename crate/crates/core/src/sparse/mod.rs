//! Smolyak sparse-grid interpolation on nested Chebyshev extrema.

pub mod grid;
pub mod nodes;
pub mod surrogate;

pub use grid::{delta_nodes, full_grid_size, grid_size, indices_with_excess, GridNode, MultiIndex, SparseGrid};
pub use nodes::{chebyshev_nodes, delta_xi, xi, Level1d, NodeKey};
pub use surrogate::{build_surrogate, max_nodes_1d, pointwise, BatchEval, ParamBox, Surrogate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SparseError {
    #[error("node count {0} is not 1 or 2^k + 1")]
    NodeCount(usize),
    #[error("dimension mismatch")]
    Dimension,
    #[error("parameter box needs finite lo <= hi")]
    InvalidBox,
    #[error("point lies outside the parameter box")]
    OutsideBox,
    #[error("sample vectors differ in length")]
    VectorLength,
    #[error("no successful sample to build from")]
    NoSamples,
}

#[cfg(test)]
mod tests;
