//! Sparsity-regularized reconstruction of conductivity from partial boundary
//! data, with spatially distributed regularization weights.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod fem;
pub mod field;
pub mod forward;
pub mod harmonics;
pub mod mesh;
pub mod metrics;
pub mod patterns;
pub mod phantom;
pub mod reconstruct;
pub mod vtk;

pub use error::{EitError, Result};
pub use fem::{FemSpace, NeumannSystem, SolverOptions};
pub use field::NodalField;
pub use forward::{CauchyDataSet, NDTrace};
pub use mesh::{generate_ball_mesh, BoundaryRegion, BoundarySubset, SimplicialMesh};
pub use patterns::{BoundaryPattern, PatternFamily, PatternSupport};
pub use phantom::{build_phantom, prior_field, PhantomSpec};
pub use reconstruct::{Reconstruction, RegularizationPlan, SolverConfig, Termination};
