//! Discrete fields living on the three entity classes of a mesh.
//!
//! [`EdgeField`] stores one value per unordered primal edge in the edge's
//! canonical orientation (normal pointing from `cells[0]` to `cells[1]`).
//! [`CellField`] stores one value per triangle and [`DualField`] one value
//! per dual cell (primal vertex).

use std::ops::{Index, IndexMut};

macro_rules! scalar_field {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Default)]
        pub struct $name(Vec<f64>);

        impl $name {
            pub fn zeros(len: usize) -> Self {
                Self(vec![0.0; len])
            }

            pub fn constant(len: usize, value: f64) -> Self {
                Self(vec![value; len])
            }

            pub fn from_vec(values: Vec<f64>) -> Self {
                Self(values)
            }

            pub fn from_fn(len: usize, f: impl FnMut(usize) -> f64) -> Self {
                Self((0..len).map(f).collect())
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn values(&self) -> &[f64] {
                &self.0
            }

            pub fn values_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.0
            }

            pub fn iter(&self) -> std::slice::Iter<'_, f64> {
                self.0.iter()
            }

            /// Largest absolute entry, 0 for an empty field.
            pub fn max_abs(&self) -> f64 {
                self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
            }

            /// `self + scale * other`, entrywise.
            pub fn axpy(&self, scale: f64, other: &Self) -> Self {
                assert_eq!(self.len(), other.len(), "field length mismatch");
                Self(self.0.iter().zip(&other.0).map(|(a, b)| a + scale * b).collect())
            }

            pub fn scaled(&self, scale: f64) -> Self {
                Self(self.0.iter().map(|v| scale * v).collect())
            }

            pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
                Self(self.0.iter().map(|&v| f(v)).collect())
            }
        }

        impl Index<usize> for $name {
            type Output = f64;
            fn index(&self, idx: usize) -> &f64 {
                &self.0[idx]
            }
        }

        impl IndexMut<usize> for $name {
            fn index_mut(&mut self, idx: usize) -> &mut f64 {
                &mut self.0[idx]
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(values: Vec<f64>) -> Self {
                Self(values)
            }
        }
    };
}

scalar_field!(
    /// One real per primal edge, read as a normal component in the edge's
    /// canonical orientation. Velocities, commutators and Casimir gradients
    /// all live here.
    EdgeField
);
scalar_field!(
    /// One real per triangle (depth, topography, divergences).
    CellField
);
scalar_field!(
    /// One real per dual cell (vorticity, Coriolis parameter, potential vorticity).
    DualField
);

impl EdgeField {
    /// Value of edge `edge` read with its normal pointing out of `from_cell`.
    ///
    /// Reading from the second cell of the edge negates the stored value.
    pub fn oriented(&self, mesh: &crate::mesh::Mesh, edge: usize, from_cell: usize) -> f64 {
        let e = &mesh.edges()[edge];
        if e.cells[0] == from_cell {
            self.0[edge]
        } else {
            debug_assert_eq!(e.cells[1], from_cell);
            -self.0[edge]
        }
    }

    /// The same field expressed in the reversed orientation of every edge.
    pub fn reversed(&self) -> Self {
        self.scaled(-1.0)
    }
}
