//! Uniform node-centred grid on the rectangle `[0, Lx] x [-Ly, 0]`.
//!
//! Nodes are `x_i = i hx` for `i = 0..=nx+1` and `y_j = -Ly + j hy` for
//! `j = 0..=ny+1`. The top row `j = ny+1` lies on the elastic interface; its
//! two end nodes are tagged as rigid wall because the beam is clamped there.

use crate::error::{Error, Result};

pub const MIN_INTERIOR: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    Interior,
    /// elastic interface, top edge without its corners
    Omega,
    /// rigid wall
    S,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub hx: f64,
    pub hy: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < MIN_INTERIOR || ny < MIN_INTERIOR {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_INTERIOR} interior nodes per direction, got {nx}x{ny}"
            )));
        }
        if !(lx.is_finite() && ly.is_finite() && lx > 0.0 && ly > 0.0) {
            return Err(Error::InvalidGrid(format!("lengths must be positive, got {lx} x {ly}")));
        }
        Ok(Self { nx, ny, lx, ly, hx: lx / (nx + 1) as f64, hy: ly / (ny + 1) as f64 })
    }

    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, n, 1.0, 1.0)
    }

    /// nodes per row, boundary included
    #[inline]
    pub fn mx(&self) -> usize {
        self.nx + 2
    }

    #[inline]
    pub fn my(&self) -> usize {
        self.ny + 2
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.mx() * self.my()
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.mx() + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.mx(), k / self.mx())
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        if j == self.ny + 1 {
            0.0
        } else {
            -self.ly + j as f64 * self.hy
        }
    }

    #[inline]
    pub fn top(&self) -> usize {
        self.ny + 1
    }

    pub fn tag(&self, i: usize, j: usize) -> BoundaryTag {
        let edge_x = i == 0 || i == self.nx + 1;
        if j == self.top() && !edge_x {
            BoundaryTag::Omega
        } else if edge_x || j == 0 || j == self.top() {
            BoundaryTag::S
        } else {
            BoundaryTag::Interior
        }
    }

    /// 1-D trapezoid weights along x (length `nx+2`).
    pub fn weights_x(&self) -> Vec<f64> {
        trapezoid(self.mx(), self.hx)
    }

    pub fn weights_y(&self) -> Vec<f64> {
        trapezoid(self.my(), self.hy)
    }

    /// Tensor trapezoid weights at every node.
    pub fn node_weights(&self) -> Vec<f64> {
        let wx = self.weights_x();
        let wy = self.weights_y();
        let mut w = Vec::with_capacity(self.num_nodes());
        for j in 0..self.my() {
            for i in 0..self.mx() {
                w.push(wx[i] * wy[j]);
            }
        }
        w
    }

    /// Beam quadrature on the full interface row, endpoints included.
    pub fn beam_weights_full(&self) -> Vec<f64> {
        self.weights_x()
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

pub(crate) fn trapezoid(m: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; m];
    w[0] = 0.5 * h;
    w[m - 1] = 0.5 * h;
    w
}
