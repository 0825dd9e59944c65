//! Nodal fields. Storage is row-major over the grid (`k = j (nx+2) + i`).

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
}

/// Symmetric 2x2 tensor at each node.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    pub s11: Vec<f64>,
    pub s12: Vec<f64>,
    pub s22: Vec<f64>,
}

/// Values on the interface row, clamped endpoints included (`nx+2` entries).
#[derive(Debug, Clone, PartialEq)]
pub struct BeamField(pub Vec<f64>);

impl ScalarField {
    pub fn zeros(g: &Grid) -> Self {
        Self(vec![0.0; g.num_nodes()])
    }

    pub fn from_fn(g: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut v = Vec::with_capacity(g.num_nodes());
        for j in 0..g.my() {
            for i in 0..g.mx() {
                v.push(f(g.x(i), g.y(j)));
            }
        }
        Self(v)
    }

    pub fn check(&self, g: &Grid) -> Result<()> {
        check_len(self.0.len(), g.num_nodes())
    }

    pub fn at(&self, g: &Grid, i: usize, j: usize) -> f64 {
        self.0[g.idx(i, j)]
    }
}

impl VectorField {
    pub fn zeros(g: &Grid) -> Self {
        let n = g.num_nodes();
        Self { c1: vec![0.0; n], c2: vec![0.0; n] }
    }

    pub fn from_fn(g: &Grid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let mut out = Self::zeros(g);
        for j in 0..g.my() {
            for i in 0..g.mx() {
                let v = f(g.x(i), g.y(j));
                let k = g.idx(i, j);
                out.c1[k] = v[0];
                out.c2[k] = v[1];
            }
        }
        out
    }

    pub fn check(&self, g: &Grid) -> Result<()> {
        check_len(self.c1.len(), g.num_nodes())?;
        check_len(self.c2.len(), g.num_nodes())
    }
}

impl BeamField {
    pub fn zeros(g: &Grid) -> Self {
        Self(vec![0.0; g.mx()])
    }

    pub fn from_fn(g: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Self((0..g.mx()).map(|i| f(g.x(i))).collect())
    }

    pub fn check(&self, g: &Grid) -> Result<()> {
        check_len(self.0.len(), g.mx())
    }
}

pub(crate) fn check_len(got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got })
    }
}
