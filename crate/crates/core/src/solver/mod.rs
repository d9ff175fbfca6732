//! Free-boundary equilibrium solver.

pub mod anderson;
pub mod assembly;
pub mod kernels;
pub mod linear;
pub mod newton;
pub mod picard;
pub mod source;

pub use assembly::{assemble_boundary, assemble_interior, coil_load, AssemblyError, BoundaryMatrix, DofMap};
pub use kernels::{elliptic_ke, elliptic_ke_split, kappa, kernel_m, kernel_n, KernelError};
pub use linear::{FixedOperator, OperatorError};
pub use newton::NewtonOptions;
pub use picard::{
    analyze_state, solve_free_boundary, solve_from, EquilibriumSolution, FailureKind, InitialEllipse, NonlinearMethod,
    SolveError, SolveFailure, SolverOptions,
};
pub use source::{initial_guess, plasma_load, plasma_region, plasma_source, PlasmaState, ProfileParams, SourceError, MU0};
