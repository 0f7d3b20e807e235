//! Least-squares finite elements for the linear transport equation
//! `div(beta u) + gamma u = f`, `u = g` on the inflow boundary.
//!
//! The equation is rewritten as the first-order flux system
//! `sigma - beta u = 0`, `div sigma + gamma u = f` and discretized by
//! minimizing the residual functional over `RT_k x P_k` (H(div)-conforming
//! Raviart-Thomas flux, discontinuous solution). The inflow condition
//! `sigma.n = (beta.n) g` is imposed either strongly in the flux space or
//! weakly through a boundary functional. The element-local value of the
//! functional is an exact a-posteriori indicator in the least-squares norm
//! and drives adaptive refinement.

pub mod adaptivity;
pub mod assembly;
pub mod cut;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod spaces;

pub use adaptivity::{
    amr_loop, compute_indicators, dorfler_mark, overshoot, uniform_loop, AmrConfig, AmrRecord,
    AmrRun, Indicators, StopReason, UniformConfig,
};
pub use assembly::{
    apply_strong_bc, assemble, project_inflow_g, solve, BoundaryData, MethodKind, Solution,
    SolveOutput,
};
pub use linalg::{cg_solve, direct_solve, Preconditioner, SolveReport, SparseSym};
pub use mesh::{build_mesh, criss_cross, BoundaryClass, GeometryDescriptor, Mesh, MeshError};
pub use problems::{catalog, exact_errors, problem, ErrorReport, Interface, ProblemSpec};
pub use quadrature::{quadrature, QuadDomain, QuadratureRule};
pub use spaces::{
    interpolate_rt, piola_map, project_l2, reference_basis, BasisEval, DofMap, SpaceKind,
};
