//! The weighted inner product on the packed state.
//!
//! With the standard (energy) Gram matrix `N` and the unipotent map
//! `L = I + E`, where `E` sends `(p, w1)` into the velocity and `w2` slots,
//!
//! ```text
//! (L y)_u  = u - alpha D(g d1 w1) e2 + xi grad psi(p, w1)
//! (L y)_w2 = w2 + h_alpha d1 w1 + xi w1
//! ```
//!
//! the weighted Gram matrix is `W = L^T N L`. `E^2 = 0`, so `L^{-1} = I - E`
//! and `W^{-1} = (I - E) N^{-1} (I - E)^T`. Nothing is formed densely.

use std::sync::Arc;

use faer::{c64, Mat};

use crate::ambient::{r_of, u_star_norm, AmbientField};
use crate::elliptic::{DirichletSolver, NeumannSolver};
use crate::error::{Error, Result};
use crate::field::BeamField;
use crate::linalg::{dot, matvec, matvec_t, SpMat};
use crate::ops;
use crate::state::{Layout, State};

/// Smallest nonnegative root of `(C1 + C2 r) xi^2 + (C2 r - 1/2) xi + C2 r = 0`.
pub fn xi_root(c1: f64, c2: f64, r: f64) -> Result<f64> {
    if !(c1 > 0.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite()) {
        return Err(Error::InvalidParameter(format!("C1, C2 must be positive, got {c1}, {c2}")));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("r_U must be >= 0, got {r}")));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let a = c1 + c2 * r;
    let b = 0.5 - c2 * r;
    let disc = b * b - 4.0 * c2 * a * r;
    if disc < 0.0 || b <= 0.0 {
        return Err(Error::AmbientTooLarge { r_u: r, discriminant: disc });
    }
    // product of the roots is C2 r / a; this form avoids cancellation
    Ok(2.0 * c2 * r / (b + disc.sqrt()))
}

pub struct WeightedMetric {
    pub layout: Layout,
    pub u_star: f64,
    pub r_u: f64,
    pub xi: f64,
    pub alpha: f64,
    pub c1: f64,
    pub c2: f64,
    pub g: BeamField,
    pub h_alpha: BeamField,
    hp: Vec<f64>,
    hu: Vec<f64>,
    hb: f64,
    kb: SpMat,
    kb_inv: Mat<f64>,
    kb_sqrt: Mat<f64>,
    kb_isqrt: Mat<f64>,
    dxm: SpMat,
    dym: SpMat,
    neumann: Arc<NeumannSolver>,
    dirichlet: Arc<DirichletSolver>,
    m: Vec<f64>,
    area: f64,
}

fn dense_mv(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum()).collect()
}

impl WeightedMetric {
    pub fn new(
        ambient: &AmbientField,
        c1: f64,
        c2: f64,
        neumann: Arc<NeumannSolver>,
        dirichlet: Arc<DirichletSolver>,
    ) -> Result<Self> {
        let grid = ambient.grid;
        grid.check_same(neumann.grid())?;
        let layout = Layout::new(&grid, ambient)?;
        let u_star = u_star_norm(ambient);
        let r_u = r_of(u_star);
        let xi = xi_root(c1, c2, r_u)?;
        let alpha = 2.0 * u_star;
        let g = BeamField::from_fn(&grid, |x| 2.0 * x / grid.lx - 1.0);
        let h_alpha = BeamField((0..grid.mx()).map(|i| ambient.u.c1[grid.idx(i, grid.top())] - alpha * g.0[i]).collect());

        let hp = grid.node_weights();
        let mut hu: Vec<f64> = layout.u1_nodes.iter().map(|&k| hp[k]).collect();
        hu.extend(layout.u2_nodes.iter().map(|&k| hp[k]));
        let nb = layout.nb();
        let hb = grid.hx;
        let kb = ops::beam_stiffness_matrix(nb, hb);
        let evd = kb
            .to_dense()
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|e| Error::Solver(format!("beam stiffness eigen: {e:?}")))?;
        let (q, s) = (evd.U(), evd.S());
        let lam: Vec<f64> = (0..nb).map(|i| s[i]).collect();
        if lam.iter().any(|&l| l <= 0.0) {
            return Err(Error::Solver("beam stiffness not positive definite".into()));
        }
        let f = |p: f64| Mat::<f64>::from_fn(nb, nb, |i, j| (0..nb).map(|k| q[(i, k)] * lam[k].powf(p) * q[(j, k)]).sum());
        let (kb_inv, kb_sqrt, kb_isqrt) = (f(-1.0), f(0.5), f(-0.5));

        let mut m = vec![0.0; layout.dim()];
        m[..layout.np()].copy_from_slice(&hp);
        for v in &mut m[layout.off_w1()..layout.off_w2()] {
            *v = hb;
        }
        let area = hp.iter().sum();
        Ok(Self {
            u_star,
            r_u,
            xi,
            alpha,
            c1,
            c2,
            g,
            h_alpha,
            hp,
            hu,
            hb,
            kb,
            kb_inv,
            kb_sqrt,
            kb_isqrt,
            dxm: ops::dx_matrix(&grid),
            dym: ops::dy_matrix(&grid),
            neumann,
            dirichlet,
            m,
            area,
            layout,
        })
    }

    /// Convenience constructor that builds its own elliptic factorizations.
    pub fn build(ambient: &AmbientField, c1: f64, c2: f64) -> Result<Self> {
        let g = ambient.grid;
        Self::new(ambient, c1, c2, Arc::new(NeumannSolver::new(&g)?), Arc::new(DirichletSolver::new(&g)?))
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn beam_stiffness(&self) -> &SpMat {
        &self.kb
    }

    pub fn node_weights(&self) -> &[f64] {
        &self.hp
    }

    pub fn velocity_weights(&self) -> &[f64] {
        &self.hu
    }

    pub fn neumann(&self) -> &NeumannSolver {
        &self.neumann
    }

    pub fn dirichlet(&self) -> &DirichletSolver {
        &self.dirichlet
    }

    /// Standard Gram matrix applied to `y`.
    pub fn standard_apply(&self, y: &[f64]) -> Vec<f64> {
        let l = &self.layout;
        let mut out = vec![0.0; y.len()];
        for k in 0..l.np() {
            out[k] = self.hp[k] * y[k];
        }
        for (k, w) in self.hu.iter().enumerate() {
            out[l.off_u1() + k] = w * y[l.off_u1() + k];
        }
        let kw = matvec(&self.kb, l.w1(y));
        out[l.off_w1()..l.off_w2()].copy_from_slice(&kw);
        for k in 0..l.nb() {
            out[l.off_w2() + k] = self.hb * y[l.off_w2() + k];
        }
        out
    }

    fn standard_block(&self, y: &[f64], power: f64, kb_block: &Mat<f64>) -> Vec<f64> {
        let l = &self.layout;
        let mut out = vec![0.0; y.len()];
        for k in 0..l.np() {
            out[k] = self.hp[k].powf(power) * y[k];
        }
        for (k, w) in self.hu.iter().enumerate() {
            out[l.off_u1() + k] = w.powf(power) * y[l.off_u1() + k];
        }
        let kw = dense_mv(kb_block, l.w1(y));
        out[l.off_w1()..l.off_w2()].copy_from_slice(&kw);
        for k in 0..l.nb() {
            out[l.off_w2() + k] = self.hb.powf(power) * y[l.off_w2() + k];
        }
        out
    }

    pub fn standard_inv_apply(&self, y: &[f64]) -> Vec<f64> {
        self.standard_block(y, -1.0, &self.kb_inv)
    }

    pub fn standard_sqrt_apply(&self, y: &[f64]) -> Vec<f64> {
        self.standard_block(y, 0.5, &self.kb_sqrt)
    }

    pub fn standard_isqrt_apply(&self, y: &[f64]) -> Vec<f64> {
        self.standard_block(y, -0.5, &self.kb_isqrt)
    }

    pub fn standard_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        dot(a, &self.standard_apply(b))
    }

    pub fn standard_norm(&self, a: &[f64]) -> f64 {
        self.standard_inner(a, a).max(0.0).sqrt()
    }

    /// `E y`, written into a zero vector of full dimension.
    pub fn e_apply(&self, y: &[f64]) -> Vec<f64> {
        let l = &self.layout;
        let grid = &l.grid;
        let mut out = vec![0.0; y.len()];
        let w1 = l.w1(y);
        let dw = ops::beam_d1(w1, grid.hx);
        if self.xi != 0.0 {
            let mut chi = vec![0.0; grid.mx()];
            chi[1..=grid.nx].copy_from_slice(w1);
            let psi = self.neumann.solve_load(&self.neumann.load(l.p(y), &chi));
            let gx = matvec(&self.dxm, &psi);
            let gy = matvec(&self.dym, &psi);
            for (k, &node) in l.u1_nodes.iter().enumerate() {
                out[l.off_u1() + k] += self.xi * gx[node];
            }
            for (k, &node) in l.u2_nodes.iter().enumerate() {
                out[l.off_u2() + k] += self.xi * gy[node];
            }
        }
        if self.alpha != 0.0 {
            let phi: Vec<f64> = (0..grid.nx).map(|i| self.g.0[i + 1] * dw[i]).collect();
            let ext = self.dirichlet.extend(&phi);
            for (k, &node) in l.u2_nodes.iter().enumerate() {
                out[l.off_u2() + k] -= self.alpha * ext[node];
            }
        }
        for i in 0..grid.nx {
            out[l.off_w2() + i] = self.h_alpha.0[i + 1] * dw[i] + self.xi * w1[i];
        }
        out
    }

    /// `E^T z`
    pub fn et_apply(&self, z: &[f64]) -> Vec<f64> {
        let l = &self.layout;
        let grid = &l.grid;
        let n = grid.num_nodes();
        let mut out = vec![0.0; z.len()];
        let zw2 = &z[l.off_w2()..];
        // d1^T applied to the beam-derivative sensitivities
        let mut s_dw: Vec<f64> = (0..grid.nx).map(|i| self.h_alpha.0[i + 1] * zw2[i]).collect();
        let mut s_w1: Vec<f64> = zw2.iter().map(|v| self.xi * v).collect();
        if self.alpha != 0.0 {
            let mut zn = vec![0.0; n];
            for (k, &node) in l.u2_nodes.iter().enumerate() {
                zn[node] = -self.alpha * z[l.off_u2() + k];
            }
            let t = self.dirichlet.extend_transpose(&zn);
            for i in 0..grid.nx {
                s_dw[i] += self.g.0[i + 1] * t[i];
            }
        }
        if self.xi != 0.0 {
            let mut zx = vec![0.0; n];
            let mut zy = vec![0.0; n];
            for (k, &node) in l.u1_nodes.iter().enumerate() {
                zx[node] = z[l.off_u1() + k];
            }
            for (k, &node) in l.u2_nodes.iter().enumerate() {
                zy[node] = z[l.off_u2() + k];
            }
            let a = matvec_t(&self.dxm, &zx);
            let b = matvec_t(&self.dym, &zy);
            let v: Vec<f64> = a.iter().zip(&b).map(|(x, y)| self.xi * (x + y)).collect();
            let s = self.neumann.solve_load(&v);
            for k in 0..n {
                out[k] = self.hp[k] * s[k];
            }
            for i in 0..grid.nx {
                s_w1[i] += grid.hx * s[grid.idx(i + 1, grid.top())];
            }
        }
        // transpose of the centred beam difference
        let h = grid.hx;
        let nb = grid.nx;
        for i in 0..nb {
            let mut acc = s_w1[i];
            if i >= 1 {
                acc += 0.5 / h * s_dw[i - 1];
            }
            if i + 1 < nb {
                acc -= 0.5 / h * s_dw[i + 1];
            }
            out[l.off_w1() + i] = acc;
        }
        out
    }

    pub fn l_apply(&self, y: &[f64]) -> Vec<f64> {
        let e = self.e_apply(y);
        y.iter().zip(&e).map(|(a, b)| a + b).collect()
    }

    pub fn l_inv_apply(&self, y: &[f64]) -> Vec<f64> {
        let e = self.e_apply(y);
        y.iter().zip(&e).map(|(a, b)| a - b).collect()
    }

    pub fn lt_apply(&self, z: &[f64]) -> Vec<f64> {
        let e = self.et_apply(z);
        z.iter().zip(&e).map(|(a, b)| a + b).collect()
    }

    pub fn lt_inv_apply(&self, z: &[f64]) -> Vec<f64> {
        let e = self.et_apply(z);
        z.iter().zip(&e).map(|(a, b)| a - b).collect()
    }

    /// `W y`
    pub fn gram_apply(&self, y: &[f64]) -> Vec<f64> {
        self.lt_apply(&self.standard_apply(&self.l_apply(y)))
    }

    /// `W^{-1} y`
    pub fn gram_inv_apply(&self, y: &[f64]) -> Vec<f64> {
        self.l_inv_apply(&self.standard_inv_apply(&self.lt_inv_apply(y)))
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let la = self.l_apply(a);
        let lb = self.l_apply(b);
        dot(&la, &self.standard_apply(&lb))
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        let la = self.l_apply(a);
        dot(&la, &self.standard_apply(&la)).max(0.0).sqrt()
    }

    /// `((a, b))`, linear in `a` and conjugate-linear in `b`.
    pub fn inner_c(&self, a: &[c64], b: &[c64]) -> c64 {
        let (ar, ai) = crate::linalg::split(a);
        let (br, bi) = crate::linalg::split(b);
        let wbr = self.gram_apply(&br);
        let wbi = self.gram_apply(&bi);
        c64::new(dot(&ar, &wbr) + dot(&ai, &wbi), dot(&ai, &wbr) - dot(&ar, &wbi))
    }

    pub fn norm_c(&self, a: &[c64]) -> f64 {
        let (ar, ai) = crate::linalg::split(a);
        (self.norm(&ar).powi(2) + self.norm(&ai).powi(2)).sqrt()
    }

    pub fn standard_norm_c(&self, a: &[c64]) -> f64 {
        let (ar, ai) = crate::linalg::split(a);
        (self.standard_norm(&ar).powi(2) + self.standard_norm(&ai).powi(2)).sqrt()
    }

    /// Coefficients of the mean functional `int p + int w1` on packed states.
    pub fn mean_vector(&self) -> &[f64] {
        &self.m
    }

    pub fn mean_functional(&self, y: &[f64]) -> f64 {
        dot(&self.m, y)
    }

    pub fn mean_functional_c(&self, y: &[c64]) -> c64 {
        self.m.iter().zip(y).map(|(a, b)| b * *a).sum()
    }

    /// Shift the pressure by the mean defect over the flow area.
    pub fn project_h0(&self, y: &[f64]) -> Vec<f64> {
        let c = self.mean_functional(y) / self.area;
        let mut out = y.to_vec();
        for v in &mut out[..self.layout.np()] {
            *v -= c;
        }
        out
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Column `k` of the weighted Gram matrix.
    pub fn gram_column(&self, k: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.dim()];
        e[k] = 1.0;
        self.gram_apply(&e)
    }

    pub fn standard_column(&self, k: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.dim()];
        e[k] = 1.0;
        self.standard_apply(&e)
    }

    /// Extreme generalized eigenvalues of `W` against `N` on the zero-mean
    /// subspace, by Lanczos on `N^{-1/2} W N^{-1/2}` restricted to the
    /// `N`-image of that subspace.
    pub fn norm_equivalence_bounds(&self, steps: usize) -> Result<(f64, f64)> {
        let n = self.dim();
        // x in H0  <=>  N^{1/2} x is orthogonal to N^{-1/2} m
        let mut c = self.standard_isqrt_apply(&self.m);
        let cn = dot(&c, &c).sqrt();
        c.iter_mut().for_each(|v| *v /= cn);
        let proj = |v: &mut Vec<f64>| {
            let s = dot(v, &c);
            crate::linalg::axpy(v, -s, &c);
        };
        let op = |v: &[f64]| -> Vec<f64> {
            let x = self.standard_isqrt_apply(v);
            let mut y = self.standard_isqrt_apply(&self.gram_apply(&x));
            proj(&mut y);
            y
        };
        let (lo, hi) = lanczos_extremes(n, steps, op, |v| proj(v))?;
        Ok((lo, hi))
    }

    pub fn state_inner(&self, a: &State, b: &State) -> Result<f64> {
        Ok(self.inner(&self.layout.pack(a)?, &self.layout.pack(b)?))
    }
}

/// Extreme eigenvalues of a symmetric operator via Lanczos with full
/// reorthogonalization. `restrict` projects onto the invariant subspace.
pub fn lanczos_extremes(
    n: usize,
    steps: usize,
    op: impl Fn(&[f64]) -> Vec<f64>,
    restrict: impl Fn(&mut Vec<f64>),
) -> Result<(f64, f64)> {
    let k_max = steps.min(n.saturating_sub(1)).max(1);
    let mut v: Vec<f64> = (0..n).map(|i| ((i as f64 + 1.0) * 0.754_877_666).sin() + 0.3 * ((i as f64) * 0.1).cos()).collect();
    restrict(&mut v);
    let nv = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut scale: f64 = 0.0;
    for j in 0..k_max {
        let mut w = op(&basis[j]);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        scale = scale.max(a.abs());
        for _ in 0..2 {
            restrict(&mut w);
            for q in &basis {
                let s = dot(&w, q);
                crate::linalg::axpy(&mut w, -s, q);
            }
        }
        let b = dot(&w, &w).sqrt();
        // an invariant subspace has been found; the remainder is rounding noise
        if b < 1e-9 * scale || j + 1 == k_max {
            break;
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
    let k = alpha.len();
    let t = Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let ev = t.self_adjoint_eigenvalues(faer::Side::Lower).map_err(|e| Error::Solver(format!("{e:?}")))?;
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

pub fn mean_functional(g: &crate::grid::Grid, s: &State) -> f64 {
    ops::integrate(g, &s.p.0) + ops::integrate_beam(g, &s.w1)
}

/// Pressure-mean shift into the zero-mean subspace.
pub fn project_h0(g: &crate::grid::Grid, s: &State) -> State {
    let c = mean_functional(g, s) / g.node_weights().iter().sum::<f64>();
    let mut out = s.clone();
    out.p.0.iter_mut().for_each(|v| *v -= c);
    out
}
