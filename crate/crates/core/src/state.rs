//! The discrete state `(p, u, w1, w2)` and its packing into a flat vector.
//!
//! Packed unknowns: `p` at every node; `u1` where `1 <= i <= nx` (it vanishes
//! on the vertical walls); `u2` where `1 <= j <= ny` (it vanishes on the bottom
//! wall and is slaved to the beam on the interface); `w1`, `w2` at the `nx`
//! interior beam nodes. On the interface the normal velocity is reconstructed
//! as `u2 = w2 + U1 d1 w1`, which is the impermeability condition.

use crate::ambient::AmbientField;
use crate::error::{Error, Result};
use crate::field::{BeamField, ScalarField, VectorField};
use crate::grid::Grid;
use crate::linalg::{Coo, SpMat};
use crate::ops;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub p: ScalarField,
    pub u: VectorField,
    pub w1: BeamField,
    pub w2: BeamField,
}

impl State {
    pub fn zeros(g: &Grid) -> Self {
        Self { p: ScalarField::zeros(g), u: VectorField::zeros(g), w1: BeamField::zeros(g), w2: BeamField::zeros(g) }
    }
}

#[derive(Debug, Clone)]
pub struct Layout {
    pub grid: Grid,
    pub u1_nodes: Vec<usize>,
    pub u2_nodes: Vec<usize>,
    /// ambient tangential velocity at the interior interface nodes
    pub u1_top: Vec<f64>,
}

impl Layout {
    pub fn new(g: &Grid, ambient: &AmbientField) -> Result<Self> {
        g.check_same(&ambient.grid)?;
        let mut u1_nodes = Vec::new();
        let mut u2_nodes = Vec::new();
        for j in 0..g.my() {
            for i in 0..g.mx() {
                if (1..=g.nx).contains(&i) {
                    u1_nodes.push(g.idx(i, j));
                }
                if (1..=g.ny).contains(&j) {
                    u2_nodes.push(g.idx(i, j));
                }
            }
        }
        let u1_top = (1..=g.nx).map(|i| ambient.u.c1[g.idx(i, g.top())]).collect();
        Ok(Self { grid: *g, u1_nodes, u2_nodes, u1_top })
    }

    pub fn np(&self) -> usize {
        self.grid.num_nodes()
    }
    pub fn n1(&self) -> usize {
        self.u1_nodes.len()
    }
    pub fn n2(&self) -> usize {
        self.u2_nodes.len()
    }
    pub fn nb(&self) -> usize {
        self.grid.nx
    }
    pub fn off_u1(&self) -> usize {
        self.np()
    }
    pub fn off_u2(&self) -> usize {
        self.np() + self.n1()
    }
    pub fn off_w1(&self) -> usize {
        self.off_u2() + self.n2()
    }
    pub fn off_w2(&self) -> usize {
        self.off_w1() + self.nb()
    }
    pub fn dim(&self) -> usize {
        self.off_w2() + self.nb()
    }

    pub fn p<'a>(&self, y: &'a [f64]) -> &'a [f64] {
        &y[..self.np()]
    }
    pub fn w1<'a>(&self, y: &'a [f64]) -> &'a [f64] {
        &y[self.off_w1()..self.off_w2()]
    }
    pub fn w2<'a>(&self, y: &'a [f64]) -> &'a [f64] {
        &y[self.off_w2()..]
    }

    fn check(&self, y: &[f64]) -> Result<()> {
        if y.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: self.dim(), got: y.len() })
        }
    }

    /// Full nodal velocity `(u1, u2)` including the interface reconstruction.
    pub fn velocity(&self, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let g = &self.grid;
        let n = g.num_nodes();
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        for (k, &node) in self.u1_nodes.iter().enumerate() {
            u1[node] = y[self.off_u1() + k];
        }
        for (k, &node) in self.u2_nodes.iter().enumerate() {
            u2[node] = y[self.off_u2() + k];
        }
        let dw = ops::beam_d1(self.w1(y), g.hx);
        let w2 = self.w2(y);
        for i in 1..=g.nx {
            u2[g.idx(i, g.top())] = w2[i - 1] + self.u1_top[i - 1] * dw[i - 1];
        }
        (u1, u2)
    }

    pub fn unpack(&self, y: &[f64]) -> Result<State> {
        self.check(y)?;
        let g = &self.grid;
        let (c1, c2) = self.velocity(y);
        let mut w1 = BeamField::zeros(g);
        let mut w2 = BeamField::zeros(g);
        w1.0[1..=g.nx].copy_from_slice(self.w1(y));
        w2.0[1..=g.nx].copy_from_slice(self.w2(y));
        Ok(State { p: ScalarField(self.p(y).to_vec()), u: VectorField { c1, c2 }, w1, w2 })
    }

    /// Pack a state. Wall and interface velocity values are not unknowns and
    /// are dropped; beam endpoint values must be clamped.
    pub fn pack(&self, s: &State) -> Result<Vec<f64>> {
        let g = &self.grid;
        s.p.check(g)?;
        s.u.check(g)?;
        s.w1.check(g)?;
        s.w2.check(g)?;
        for w in [&s.w1, &s.w2] {
            let (l, r) = (w.0[0], w.0[g.mx() - 1]);
            if l.abs() > 1e-12 || r.abs() > 1e-12 {
                return Err(Error::NotClamped(format!("beam endpoint values {l:.3e}, {r:.3e}")));
            }
        }
        let mut y = Vec::with_capacity(self.dim());
        y.extend_from_slice(&s.p.0);
        y.extend(self.u1_nodes.iter().map(|&k| s.u.c1[k]));
        y.extend(self.u2_nodes.iter().map(|&k| s.u.c2[k]));
        y.extend_from_slice(&s.w1.0[1..=g.nx]);
        y.extend_from_slice(&s.w2.0[1..=g.nx]);
        Ok(y)
    }

    /// Pressure selector `N x dim`.
    pub fn pressure_matrix(&self) -> SpMat {
        let mut c = Coo::new(self.np(), self.dim());
        for k in 0..self.np() {
            c.push(k, k, 1.0);
        }
        c.build()
    }

    /// Velocity reconstruction `2N x dim` (first `N` rows `u1`, then `u2`).
    /// With `tie = false` the interface rows are left at zero.
    pub fn velocity_matrix(&self, tie: bool) -> SpMat {
        let g = &self.grid;
        let n = g.num_nodes();
        let mut c = Coo::new(2 * n, self.dim());
        for (k, &node) in self.u1_nodes.iter().enumerate() {
            c.push(node, self.off_u1() + k, 1.0);
        }
        for (k, &node) in self.u2_nodes.iter().enumerate() {
            c.push(n + node, self.off_u2() + k, 1.0);
        }
        if tie {
            let nb = self.nb();
            let h = g.hx;
            for i in 0..nb {
                let row = n + g.idx(i + 1, g.top());
                c.push(row, self.off_w2() + i, 1.0);
                let a = self.u1_top[i] * 0.5 / h;
                if i + 1 < nb {
                    c.push(row, self.off_w1() + i + 1, a);
                }
                if i > 0 {
                    c.push(row, self.off_w1() + i - 1, -a);
                }
            }
        }
        c.build()
    }

    /// Retained-velocity selector `(n1 + n2) x 2N`.
    pub fn velocity_restriction(&self) -> SpMat {
        let n = self.np();
        let mut c = Coo::new(self.n1() + self.n2(), 2 * n);
        for (k, &node) in self.u1_nodes.iter().enumerate() {
            c.push(k, node, 1.0);
        }
        for (k, &node) in self.u2_nodes.iter().enumerate() {
            c.push(self.n1() + k, n + node, 1.0);
        }
        c.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::Preset;

    #[test]
    fn pack_unpack_roundtrip() {
        let g = Grid::new(8, 9, 1.0, 1.0).unwrap();
        let a = AmbientField::preset(Preset::Compressive, 0.01, &g).unwrap();
        let l = Layout::new(&g, &a).unwrap();
        let y: Vec<f64> = (0..l.dim()).map(|k| ((k * 37) % 11) as f64 - 5.0).collect();
        let s = l.unpack(&y).unwrap();
        assert_eq!(l.pack(&s).unwrap(), y);
        let (u1, u2) = l.velocity(&y);
        let pu = crate::linalg::matvec(&l.velocity_matrix(true), &y);
        for k in 0..g.num_nodes() {
            assert!((pu[k] - u1[k]).abs() < 1e-14);
            assert!((pu[g.num_nodes() + k] - u2[k]).abs() < 1e-14);
        }
    }
}
