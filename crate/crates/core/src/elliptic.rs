//! Auxiliary elliptic solves: the Neumann potential (`-Lap psi = f`, flux
//! `chi` on the interface, zero flux on the wall, mean-zero gauge) and the
//! harmonic Dirichlet extension of interface data.
//!
//! Both factorizations are built once per grid and are read-only afterwards.

use crate::error::{Error, Result};
use crate::field::{BeamField, ScalarField};
use crate::grid::Grid;
use crate::linalg::{matvec, norm2, Coo, RealLu, SpMat};
use crate::ops;

pub struct NeumannData {
    pub f: ScalarField,
    pub chi: BeamField,
}

/// Narrow five-point Neumann stiffness with trapezoid edge weights:
/// `psi^T S psi = sum_edges w (psi_a - psi_b)^2 / h`. `S 1 = 0` exactly.
pub fn neumann_stiffness(g: &Grid) -> SpMat {
    let n = g.num_nodes();
    let wx = g.weights_x();
    let wy = g.weights_y();
    let mut c = Coo::new(n, n);
    let mut edge = |a: usize, b: usize, w: f64| {
        c.push(a, a, w);
        c.push(b, b, w);
        c.push(a, b, -w);
        c.push(b, a, -w);
    };
    for j in 0..g.my() {
        for i in 0..g.mx() - 1 {
            edge(g.idx(i, j), g.idx(i + 1, j), wy[j] / g.hx);
        }
    }
    for j in 0..g.my() - 1 {
        for i in 0..g.mx() {
            edge(g.idx(i, j), g.idx(i, j + 1), wx[i] / g.hy);
        }
    }
    c.build()
}

pub struct NeumannSolver {
    grid: Grid,
    stiffness: SpMat,
    weights: Vec<f64>,
    area: f64,
    lu: RealLu,
}

impl NeumannSolver {
    pub fn new(g: &Grid) -> Result<Self> {
        let s = neumann_stiffness(g);
        let w = g.node_weights();
        let n = g.num_nodes();
        let mut c = Coo::new(n + 1, n + 1);
        for (r, col, v) in crate::linalg::to_triplets(&s) {
            c.push(r, col, v);
        }
        for k in 0..n {
            c.push(k, n, w[k]);
            c.push(n, k, w[k]);
        }
        let lu = RealLu::new(&c.build())?;
        let area = w.iter().sum();
        Ok(Self { grid: *g, stiffness: s, weights: w, area, lu })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Load vector `H f + E^T Hb chi` of the weak form.
    pub fn load(&self, f: &[f64], chi_row: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let mut b: Vec<f64> = f.iter().zip(&self.weights).map(|(a, w)| a * w).collect();
        let wx = g.weights_x();
        let t = g.top();
        for i in 0..g.mx() {
            b[g.idx(i, t)] += wx[i] * chi_row[i];
        }
        b
    }

    /// Solve with the bordered gauge system for an arbitrary load `b`. The
    /// multiplier removes the mean of `b`, so the map is defined (and linear)
    /// for incompatible loads too; it is the exact inverse on compatible ones.
    pub fn solve_load(&self, b: &[f64]) -> Vec<f64> {
        let n = self.grid.num_nodes();
        let mut x = Vec::with_capacity(n + 1);
        x.extend_from_slice(b);
        x.push(0.0);
        self.lu.solve_in_place(&mut x);
        x.truncate(n);
        x
    }

    pub fn solve(&self, data: &NeumannData) -> Result<ScalarField> {
        let g = &self.grid;
        data.f.check(g)?;
        data.chi.check(g)?;
        let defect = ops::integrate(g, &data.f.0) + ops::integrate_beam(g, &data.chi);
        let scale = ops::norm_h(g, &data.f.0) + beam_l2(g, &data.chi.0);
        let tol = 1e-10 * (scale + f64::MIN_POSITIVE);
        if defect.abs() > tol {
            return Err(Error::IncompatibleData { defect, tol });
        }
        let b = self.load(&data.f.0, &data.chi.0);
        let psi = self.solve_load(&b);
        let r = matvec(&self.stiffness, &psi);
        let res: Vec<f64> = r.iter().zip(&b).map(|(x, y)| x - y).collect();
        let rel = norm2(&res) / (norm2(&b) + f64::MIN_POSITIVE);
        if rel > 1e-10 && norm2(&b) > 0.0 {
            return Err(Error::Solver(format!("Neumann residual {rel:.3e}")));
        }
        Ok(ScalarField(psi))
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn stiffness(&self) -> &SpMat {
        &self.stiffness
    }
}

pub fn neumann_potential(g: &Grid, data: &NeumannData) -> Result<ScalarField> {
    NeumannSolver::new(g)?.solve(data)
}

/// Five-point Dirichlet Laplacian on the `nx * ny` interior nodes.
pub struct DirichletSolver {
    grid: Grid,
    lu: RealLu,
    lap: SpMat,
}

impl DirichletSolver {
    pub fn new(g: &Grid) -> Result<Self> {
        let lap = dirichlet_laplacian(g);
        let lu = RealLu::new(&lap)?;
        Ok(Self { grid: *g, lu, lap })
    }

    #[inline]
    fn interior(&self, i: usize, j: usize) -> usize {
        (j - 1) * self.grid.nx + (i - 1)
    }

    /// Harmonic extension of interior beam values (`nx` entries, endpoints zero)
    /// as a full nodal field.
    pub fn extend(&self, phi_int: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let mut rhs = vec![0.0; g.nx * g.ny];
        let c = 1.0 / (g.hy * g.hy);
        for i in 1..=g.nx {
            rhs[self.interior(i, g.ny)] = c * phi_int[i - 1];
        }
        self.lu.solve_in_place(&mut rhs);
        let mut out = vec![0.0; g.num_nodes()];
        for j in 1..=g.ny {
            for i in 1..=g.nx {
                out[g.idx(i, j)] = rhs[self.interior(i, j)];
            }
        }
        for i in 1..=g.nx {
            out[g.idx(i, g.top())] = phi_int[i - 1];
        }
        out
    }

    /// Transpose of [`Self::extend`].
    pub fn extend_transpose(&self, z: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let mut zi = vec![0.0; g.nx * g.ny];
        for j in 1..=g.ny {
            for i in 1..=g.nx {
                zi[self.interior(i, j)] = z[g.idx(i, j)];
            }
        }
        let v = self.lu.solve_transpose(&zi);
        let c = 1.0 / (g.hy * g.hy);
        (1..=g.nx).map(|i| z[g.idx(i, g.top())] + c * v[self.interior(i, g.ny)]).collect()
    }

    pub fn solve(&self, phi: &BeamField) -> Result<ScalarField> {
        let g = &self.grid;
        phi.check(g)?;
        let (left, right) = (phi.0[0], phi.0[g.mx() - 1]);
        if left.abs() > 1e-12 || right.abs() > 1e-12 {
            return Err(Error::NonzeroEndpoints { left, right });
        }
        let out = self.extend(&phi.0[1..=g.nx]);
        // interior residual of the discrete Laplace equation
        let mut rhs = vec![0.0; g.nx * g.ny];
        let c = 1.0 / (g.hy * g.hy);
        for i in 1..=g.nx {
            rhs[self.interior(i, g.ny)] = c * phi.0[i];
        }
        let mut xi = vec![0.0; g.nx * g.ny];
        for j in 1..=g.ny {
            for i in 1..=g.nx {
                xi[self.interior(i, j)] = out[g.idx(i, j)];
            }
        }
        let r: Vec<f64> = matvec(&self.lap, &xi).iter().zip(&rhs).map(|(a, b)| a - b).collect();
        let nb = norm2(&rhs);
        if nb > 0.0 && norm2(&r) / nb > 1e-10 {
            return Err(Error::Solver(format!("Dirichlet residual {:.3e}", norm2(&r) / nb)));
        }
        Ok(ScalarField(out))
    }
}

pub fn dirichlet_map(g: &Grid, phi: &BeamField) -> Result<ScalarField> {
    DirichletSolver::new(g)?.solve(phi)
}

fn dirichlet_laplacian(g: &Grid) -> SpMat {
    let (nx, ny) = (g.nx, g.ny);
    let n = nx * ny;
    let cx = 1.0 / (g.hx * g.hx);
    let cy = 1.0 / (g.hy * g.hy);
    let id = |i: usize, j: usize| (j - 1) * nx + (i - 1);
    let mut c = Coo::new(n, n);
    for j in 1..=ny {
        for i in 1..=nx {
            let k = id(i, j);
            c.push(k, k, 2.0 * cx + 2.0 * cy);
            if i > 1 {
                c.push(k, id(i - 1, j), -cx);
            }
            if i < nx {
                c.push(k, id(i + 1, j), -cx);
            }
            if j > 1 {
                c.push(k, id(i, j - 1), -cy);
            }
            if j < ny {
                c.push(k, id(i, j + 1), -cy);
            }
        }
    }
    c.build()
}

fn beam_l2(g: &Grid, w: &[f64]) -> f64 {
    g.beam_weights_full().iter().zip(w).map(|(a, b)| a * b * b).sum::<f64>().sqrt()
}

/// Discrete `H^1` norm with trapezoid weights.
pub fn h1_norm(g: &Grid, f: &[f64]) -> f64 {
    let a = ops::dx(g, f);
    let b = ops::dy(g, f);
    (ops::inner_h(g, f, f) + ops::inner_h(g, &a, &a) + ops::inner_h(g, &b, &b)).sqrt()
}

/// Discrete `H^2` norm of an interface datum (full row).
pub fn beam_h2_norm(g: &Grid, phi: &[f64]) -> f64 {
    let w = g.beam_weights_full();
    let n = phi.len();
    let d1 = ops::d1_line(phi, g.hx);
    let h2 = g.hx * g.hx;
    let mut s = 0.0;
    for i in 0..n {
        let d2 = if i == 0 || i == n - 1 { 0.0 } else { (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / h2 };
        s += w[i] * (phi[i] * phi[i] + d1[i] * d1[i] + d2 * d2);
    }
    s.sqrt()
}

pub fn beam_l2_norm(g: &Grid, phi: &[f64]) -> f64 {
    beam_l2(g, phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_gives_zero() {
        let g = Grid::unit(8).unwrap();
        let psi = neumann_potential(&g, &NeumannData { f: ScalarField::zeros(&g), chi: BeamField::zeros(&g) }).unwrap();
        assert!(psi.0.iter().all(|v| *v == 0.0));
        let d = dirichlet_map(&g, &BeamField::zeros(&g)).unwrap();
        assert!(d.0.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn incompatible_and_discontinuous_data_rejected() {
        let g = Grid::unit(8).unwrap();
        let r = neumann_potential(&g, &NeumannData { f: ScalarField::from_fn(&g, |_, _| 1.0), chi: BeamField::zeros(&g) });
        assert!(matches!(r, Err(Error::IncompatibleData { .. })));
        let mut phi = BeamField::zeros(&g);
        phi.0[0] = 1.0;
        assert!(matches!(dirichlet_map(&g, &phi), Err(Error::NonzeroEndpoints { .. })));
    }

    #[test]
    fn stiffness_annihilates_constants() {
        let g = Grid::new(9, 11, 1.5, 0.7).unwrap();
        let s = neumann_stiffness(&g);
        let r = matvec(&s, &vec![1.0; g.num_nodes()]);
        assert!(r.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn dirichlet_transpose_pairing() {
        let g = Grid::new(9, 10, 1.0, 1.3).unwrap();
        let d = DirichletSolver::new(&g).unwrap();
        let phi: Vec<f64> = (0..g.nx).map(|i| (i as f64 * 0.7).sin()).collect();
        let z: Vec<f64> = (0..g.num_nodes()).map(|k| (k as f64 * 0.31).cos()).collect();
        let lhs = crate::linalg::dot(&d.extend(&phi), &z);
        let rhs = crate::linalg::dot(&phi, &d.extend_transpose(&z));
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }
}
