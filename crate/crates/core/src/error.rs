use thiserror::Error;

pub type Result<T, E = EitError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum EitError {
    #[error("refinement must be at least 1")]
    InvalidRefinement,

    #[error("unsupported mesh dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("cell {cell} has non-positive volume {volume:e}")]
    DegenerateCell { cell: usize, volume: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("boundary selection is empty")]
    EmptySelection,

    #[error("point {point:?} lies outside the mesh (distance {distance:e} exceeds snap tolerance {tolerance:e})")]
    PointOutsideMesh {
        point: [f64; 3],
        distance: f64,
        tolerance: f64,
    },

    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error(
        "Neumann data violates compatibility: |integral of g| = {integral:e} exceeds {bound:e}"
    )]
    Compatibility { integral: f64, bound: f64 },

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex {vertex} lies inside both inclusion {first} and inclusion {second}")]
    OverlappingInclusions {
        vertex: usize,
        first: usize,
        second: usize,
    },

    #[error("fine mesh has {fine} vertices, less than {factor}x the {coarse} of the reconstruction mesh")]
    InverseCrime {
        fine: usize,
        coarse: usize,
        factor: f64,
    },

    #[error("mesh hash mismatch: data was generated on {expected}, got {found}")]
    MeshHashMismatch { expected: String, found: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
