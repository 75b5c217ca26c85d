//! Selective-decay variational shallow-water solver on triangular C-grids.

pub mod cases;
pub mod diagnostics;
pub mod dissipation;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod integrator;
pub mod mesh;
pub mod operators;

pub use error::{CheckpointError, MeshError, NumericalError};
pub use fields::{CellField, DualField, EdgeField};
pub use dynamics::State;
pub use mesh::{Geometry, Mesh};

