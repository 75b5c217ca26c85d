use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate dual edge {edge}: length {length:e}")]
    DegenerateDualEdge { edge: usize, length: f64 },
    #[error("triangle {cell} has non-positive area {area:e}")]
    InvertedTriangle { cell: usize, area: f64 },
    #[error("edge between vertices {a} and {b} is shared by {count} triangles, expected 2")]
    NonManifoldEdge { a: usize, b: usize, count: usize },
    #[error("Delaunay repair did not terminate after {0} passes")]
    DelaunayRepair(usize),
}

/// Numerical faults raised while evaluating tendencies or advancing a step.
#[derive(Debug, Error)]
pub enum NumericalError {
    #[error("non-positive depth {value:e} at {location}")]
    NonPositiveDepth { location: String, value: f64 },
    #[error("continuity solve did not converge: residual {residual:e} after {iterations} iterations")]
    LinearSolve { residual: f64, iterations: usize },
    #[error("momentum fixed point did not converge: update {update:e} after {iterations} iterations")]
    FixedPoint { update: f64, iterations: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("checkpoint is truncated or empty")]
    Truncated,
    #[error("checkpoint mesh hash does not match the current mesh")]
    MeshMismatch,
    #[error("checkpoint field sizes ({edges} edges, {cells} cells) do not match the mesh")]
    SizeMismatch { edges: usize, cells: usize },
}
