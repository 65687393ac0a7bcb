use std::ops::{Deref, DerefMut};

use crate::error::{EitError, Result};
use crate::mesh::{Point, SimplicialMesh};

/// Piecewise-linear scalar field stored as one coefficient per mesh vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalField {
    values: Vec<f64>,
}

impl NodalField {
    pub fn zeros(mesh: &SimplicialMesh) -> Self {
        Self::constant(mesh, 0.0)
    }

    pub fn constant(mesh: &SimplicialMesh, value: f64) -> Self {
        NodalField {
            values: vec![value; mesh.n_vertices()],
        }
    }

    pub fn from_values(mesh: &SimplicialMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_vertices() {
            return Err(EitError::LengthMismatch {
                what: "nodal field",
                expected: mesh.n_vertices(),
                found: values.len(),
            });
        }
        Ok(NodalField { values })
    }

    pub(crate) fn from_vec(values: Vec<f64>) -> Self {
        NodalField { values }
    }

    pub fn from_fn(mesh: &SimplicialMesh, f: impl Fn(&Point) -> f64) -> Self {
        NodalField {
            values: mesh.vertices().iter().map(f).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn check_mesh(&self, mesh: &SimplicialMesh) -> Result<()> {
        if self.values.len() != mesh.n_vertices() {
            return Err(EitError::LengthMismatch {
                what: "nodal field",
                expected: mesh.n_vertices(),
                found: self.values.len(),
            });
        }
        Ok(())
    }
}

impl Deref for NodalField {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl DerefMut for NodalField {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}
