//! Assembly of the discrete generator `G = A + B` on the packed state.
//!
//! Rows (on full nodal fields reconstructed from the packed state):
//!
//! ```text
//! p  : -C p - 1/2 (div U) p - div u - tau H^{-1} S p
//! u  : H^{-1} [div^T H p - A_visc u] - eta u - (U.grad) u - (u.grad) U
//! w1 : w2 + U1 d1 w1
//! w2 : -K w1 / hb + [div^T H p - A_visc u]_interface / hb
//! ```
//!
//! `C` is the split skew form `1/2 (U.D + D.U)` of the transport term; the
//! pressure diffusion `tau S` (`tau = kappa hx hy`) removes the checkerboard
//! modes of the collocated stencil. The interface row of the momentum balance
//! is not a velocity unknown: its virtual work is the load on the beam, which
//! keeps the coupling energy-neutral.

use crate::ambient::AmbientField;
use crate::elliptic::neumann_stiffness;
use crate::error::{Error, Result};
use crate::linalg::{self, diag, matvec, transpose, Coo, SpMat};
use crate::metric::WeightedMetric;
use crate::ops;
use crate::state::Layout;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physics {
    pub nu: f64,
    pub lambda: f64,
    pub eta: f64,
    /// pressure stabilization factor `kappa`
    pub stabilization: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Self { nu: 1.0, lambda: 1.0, eta: 1.0, stabilization: 1.0 }
    }
}

impl Physics {
    pub fn validate(&self) -> Result<()> {
        ops::check_lame(self.nu, self.lambda)?;
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("drag eta must be positive, got {}", self.eta)));
        }
        if !(self.stabilization >= 0.0 && self.stabilization.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "stabilization must be >= 0, got {}",
                self.stabilization
            )));
        }
        Ok(())
    }
}

pub struct GeneratorMatrices {
    pub layout: Layout,
    pub physics: Physics,
    /// `A` including `-L_U`
    pub a_mat: SpMat,
    pub b_mat: SpMat,
    /// `L_U : u -> (u.grad) U` on the velocity slot
    pub lu_mat: SpMat,
    pub g_mat: SpMat,
    /// symmetric viscous form on full velocity fields (`2N x 2N`)
    pub a_visc: SpMat,
    /// pressure diffusion `S` on nodes
    pub stab: SpMat,
    pub tau: f64,
}

fn hstack(blocks: &[&SpMat], nrows: usize) -> SpMat {
    let ncols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut c = Coo::new(nrows, ncols);
    let mut off = 0;
    for b in blocks {
        for (r, col, v) in linalg::to_triplets(b) {
            c.push(r, off + col, v);
        }
        off += b.ncols();
    }
    c.build()
}

/// Place `rows` of `src` (row map `dst_row`) into a `nrows x src.ncols` matrix.
fn place_rows(src: &SpMat, nrows: usize, dst_row: impl Fn(usize) -> Option<usize>) -> SpMat {
    let mut c = Coo::new(nrows, src.ncols());
    for (r, col, v) in linalg::to_triplets(src) {
        if let Some(d) = dst_row(r) {
            c.push(d, col, v);
        }
    }
    c.build()
}

fn add(a: &SpMat, b: &SpMat) -> SpMat {
    a + b
}

/// Symmetric viscous form `a_h(u, v) = sum H [2 nu eps:eps + lambda div div]`.
pub fn viscous_matrix(g: &crate::grid::Grid, nu: f64, lambda: f64) -> SpMat {
    let n = g.num_nodes();
    let dx = ops::dx_matrix(g);
    let dy = ops::dy_matrix(g);
    let z = SpMat::try_new_from_triplets(n, n, &[]).unwrap();
    let e11 = hstack(&[&dx, &z], n);
    let e22 = hstack(&[&z, &dy], n);
    let e12 = linalg::scale(&hstack(&[&dy, &dx], n), 0.5);
    let h = diag(&g.node_weights());
    let q = |a: &SpMat, b: &SpMat| &(&transpose(a) * &h) * b;
    let d = add(&q(&e11, &e11), &q(&e22, &e22));
    let x = add(&q(&e11, &e22), &q(&e22, &e11));
    add(
        &add(&linalg::scale(&d, 2.0 * nu + lambda), &linalg::scale(&x, lambda)),
        &linalg::scale(&q(&e12, &e12), 4.0 * nu),
    )
}

/// Split skew transport `C = 1/2 (U.D + D.(U .))` on nodes.
fn transport_matrix(g: &crate::grid::Grid, ambient: &AmbientField) -> SpMat {
    let dx = ops::dx_matrix(g);
    let dy = ops::dy_matrix(g);
    let u1 = diag(&ambient.u.c1);
    let u2 = diag(&ambient.u.c2);
    let s = add(&add(&(&u1 * &dx), &(&u2 * &dy)), &add(&(&dx * &u1), &(&dy * &u2)));
    linalg::scale(&s, 0.5)
}

/// Discrete `div U` with the same summation-by-parts operator.
pub fn discrete_div_u(g: &crate::grid::Grid, ambient: &AmbientField) -> Vec<f64> {
    let a = ops::dx(g, &ambient.u.c1);
    let b = ops::dy(g, &ambient.u.c2);
    a.iter().zip(&b).map(|(x, y)| x + y).collect()
}

pub fn assemble_generator(physics: Physics, ambient: &AmbientField, metric: &WeightedMetric) -> Result<GeneratorMatrices> {
    physics.validate()?;
    let g = ambient.grid;
    g.check_same(&metric.layout.grid)?;
    let layout = Layout::new(&g, ambient)?;
    if layout.u1_top != metric.layout.u1_top {
        return Err(Error::InvalidParameter("metric was built for a different ambient flow".into()));
    }
    let n = g.num_nodes();
    let dim = layout.dim();
    let hp = g.node_weights();
    let hp_inv: Vec<f64> = hp.iter().map(|w| 1.0 / w).collect();
    let hp_inv2: Vec<f64> = hp_inv.iter().chain(&hp_inv).cloned().collect();

    let pp = layout.pressure_matrix();
    let pu = layout.velocity_matrix(true);
    let pu0 = layout.velocity_matrix(false);
    let ru = layout.velocity_restriction();

    let dx = ops::dx_matrix(&g);
    let dy = ops::dy_matrix(&g);
    let div = hstack(&[&dx, &dy], n);
    let hpm = diag(&hp);
    let a_visc = viscous_matrix(&g, physics.nu, physics.lambda);
    // virtual work of pressure and viscous stresses on every velocity node
    let force = add(&(&(&transpose(&div) * &hpm) * &pp), &linalg::scale(&(&a_visc * &pu), -1.0));

    let c = transport_matrix(&g, ambient);
    let divu = discrete_div_u(&g, ambient);
    let stab = neumann_stiffness(&g);
    let tau = physics.stabilization * g.hx * g.hy;

    // pressure rows
    let mut a_p = linalg::scale(&(&c * &pp), -1.0);
    a_p = add(&a_p, &linalg::scale(&(&diag(&divu) * &pp), 0.5));
    a_p = add(&a_p, &linalg::scale(&(&div * &pu), -1.0));
    a_p = add(&a_p, &linalg::scale(&(&(&diag(&hp_inv) * &stab) * &pp), -tau));
    let b_p = linalg::scale(&(&diag(&divu) * &pp), -1.0);

    // velocity rows
    let half = linalg::scale(&diag(&divu), -0.5);
    let cu1 = add(&c, &half);
    let conv = block_diag2(&cu1, n);
    let mut lcoo = Coo::new(2 * n, 2 * n);
    for j in 0..g.my() {
        for i in 0..g.mx() {
            let k = g.idx(i, j);
            let d = ambient.gradient(g.x(i), g.y(j));
            lcoo.push(k, k, d[0][0]);
            lcoo.push(k, n + k, d[0][1]);
            lcoo.push(n + k, k, d[1][0]);
            lcoo.push(n + k, n + k, d[1][1]);
        }
    }
    let lfull = lcoo.build();
    let mut a_u = &ru * &(&diag(&hp_inv2) * &force);
    a_u = add(&a_u, &linalg::scale(&(&ru * &pu0), -physics.eta));
    a_u = add(&a_u, &linalg::scale(&(&ru * &(&conv * &pu)), -1.0));
    let lu_u = &ru * &(&lfull * &pu0);
    a_u = add(&a_u, &linalg::scale(&lu_u, -1.0));

    // beam rows
    let nb = layout.nb();
    let mut w1c = Coo::new(nb, dim);
    let mut w2c = Coo::new(nb, dim);
    for i in 0..nb {
        w1c.push(i, layout.off_w2() + i, 1.0);
    }
    let kb = ops::beam_stiffness_matrix(nb, g.hx);
    for (r, col, v) in linalg::to_triplets(&kb) {
        w2c.push(r, layout.off_w1() + col, -v / g.hx);
    }
    let a_w1 = w1c.build();
    let top = place_rows(&force, nb, |r| {
        if r >= n {
            let (i, j) = g.ij(r - n);
            (j == g.top() && (1..=g.nx).contains(&i)).then(|| i - 1)
        } else {
            None
        }
    });
    let a_w2 = add(&w2c.build(), &linalg::scale(&top, 1.0 / g.hx));
    let mut bw = Coo::new(nb, dim);
    for i in 0..nb {
        let a = layout.u1_top[i] * 0.5 / g.hx;
        if i + 1 < nb {
            bw.push(i, layout.off_w1() + i + 1, a);
        }
        if i > 0 {
            bw.push(i, layout.off_w1() + i - 1, -a);
        }
    }
    let b_w1 = bw.build();

    let nu_rows = layout.n1() + layout.n2();
    let stack = |p: Option<&SpMat>, u: Option<&SpMat>, w1: Option<&SpMat>, w2: Option<&SpMat>| -> SpMat {
        let mut c = Coo::new(dim, dim);
        let parts = [(p, 0), (u, layout.off_u1()), (w1, layout.off_w1()), (w2, layout.off_w2())];
        for (m, off) in parts {
            if let Some(m) = m {
                for (r, col, v) in linalg::to_triplets(m) {
                    c.push(off + r, col, v);
                }
            }
        }
        c.build()
    };
    debug_assert_eq!(a_u.nrows(), nu_rows);
    let a_mat = stack(Some(&a_p), Some(&a_u), Some(&a_w1), Some(&a_w2));
    let b_mat = stack(Some(&b_p), None, Some(&b_w1), None);
    let lu_mat = stack(None, Some(&lu_u), None, None);
    let g_mat = add(&a_mat, &b_mat);
    Ok(GeneratorMatrices { layout, physics, a_mat, b_mat, lu_mat, g_mat, a_visc, stab, tau })
}

fn block_diag2(a: &SpMat, n: usize) -> SpMat {
    let mut c = Coo::new(2 * n, 2 * n);
    for (r, col, v) in linalg::to_triplets(a) {
        c.push(r, col, v);
        c.push(n + r, n + col, v);
    }
    c.build()
}

impl GeneratorMatrices {
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dim() {
            return Err(Error::LengthMismatch { expected: self.dim(), got: y.len() });
        }
        Ok(matvec(&self.g_mat, y))
    }

    pub fn apply_c(&self, y: &[faer::c64]) -> Vec<faer::c64> {
        linalg::matvec_c(&self.g_mat, y)
    }

    /// `G^* y = W^{-1} G^T W y`
    pub fn adjoint_apply(&self, metric: &WeightedMetric, y: &[f64]) -> Vec<f64> {
        metric.gram_inv_apply(&linalg::matvec_t(&self.g_mat, &metric.gram_apply(y)))
    }

    /// `(G^*)^* y = W^{-1} (G^*)^T W y`, evaluated through the transposed
    /// factors rather than by simplification.
    pub fn adjoint_of_adjoint_apply(&self, metric: &WeightedMetric, y: &[f64]) -> Vec<f64> {
        // (G^*)^T = W G W^{-1} since W is symmetric
        let wy = metric.gram_apply(y);
        let t = metric.gram_inv_apply(&wy);
        let t = matvec(&self.g_mat, &t);
        let t = metric.gram_apply(&t);
        metric.gram_inv_apply(&t)
    }

    /// Viscous energy `a_h(u, u)` of the full velocity reconstructed from `y`.
    pub fn viscous_energy(&self, y: &[f64]) -> f64 {
        let (u1, u2) = self.layout.velocity(y);
        let u: Vec<f64> = u1.into_iter().chain(u2).collect();
        linalg::dot(&u, &matvec(&self.a_visc, &u))
    }
}

#[derive(Debug, Clone)]
pub struct KernelReport {
    /// unit vector in the standard norm
    pub zeta: Vec<f64>,
    /// `||G zeta||` in the standard norm
    pub residual: f64,
    /// `|mean_functional(zeta)| / ||zeta||`
    pub mean_ratio: f64,
    /// standard norm of the velocity part of `zeta`
    pub velocity_norm: f64,
}

/// Null vector of `G` by shifted inverse iteration.
pub fn kernel_vector(gen: &GeneratorMatrices, metric: &WeightedMetric) -> Result<KernelReport> {
    let n = gen.dim();
    let shift = 1e-9;
    let lu = linalg::RealLu::new(&linalg::shifted_real(&gen.g_mat, 1.0 / shift))?;
    // (I - G/s) x = b  <=>  (s I - G) x = s b
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i as f64) * 0.37).sin()).collect();
    for _ in 0..4 {
        x = lu.solve(&x);
        let nx = metric.standard_norm(&x);
        if !(nx.is_finite() && nx > 0.0) {
            return Err(Error::NoKernelFound(f64::INFINITY));
        }
        x.iter_mut().for_each(|v| *v /= nx);
    }
    let residual = metric.standard_norm(&matvec(&gen.g_mat, &x));
    if !(residual <= 1e-8) {
        return Err(Error::NoKernelFound(residual));
    }
    let l = &gen.layout;
    let mut u = vec![0.0; n];
    u[l.off_u1()..l.off_w1()].copy_from_slice(&x[l.off_u1()..l.off_w1()]);
    Ok(KernelReport {
        mean_ratio: metric.mean_functional(&x).abs(),
        velocity_norm: metric.standard_norm(&u),
        residual,
        zeta: x,
    })
}

/// Smallest singular value of `G` restricted to the zero-mean subspace, in
/// the standard norm. Lanczos on `M^T M` with `M = N^{1/2} G_0^{-1} N^{-1/2}`,
/// where `G_0^{-1}` is realized by the bordered system `[[G, m], [m^T, 0]]`.
pub fn smallest_singular_value_h0(gen: &GeneratorMatrices, metric: &WeightedMetric, steps: usize) -> Result<f64> {
    let n = gen.dim();
    let m = metric.mean_vector();
    let mn = linalg::norm2(m);
    let mut c = Coo::new(n + 1, n + 1);
    for (r, col, v) in linalg::to_triplets(&gen.g_mat) {
        c.push(r, col, v);
    }
    for (k, &v) in m.iter().enumerate() {
        if v != 0.0 {
            c.push(k, n, v / mn);
            c.push(n, k, v / mn);
        }
    }
    let lu = linalg::RealLu::new(&c.build())?;
    let mut q = metric.standard_isqrt_apply(m);
    let qn = linalg::norm2(&q);
    q.iter_mut().for_each(|v| *v /= qn);
    let proj = |v: &mut Vec<f64>| {
        let s = linalg::dot(v, &q);
        linalg::axpy(v, -s, &q);
    };
    let bordered = |y: &[f64], transpose: bool| -> Vec<f64> {
        let mut b = y.to_vec();
        b.push(0.0);
        let mut x = if transpose { lu.solve_transpose(&b) } else { lu.solve(&b) };
        x.truncate(n);
        x
    };
    let op = |z: &[f64]| -> Vec<f64> {
        let mut z = z.to_vec();
        proj(&mut z);
        let y = metric.standard_sqrt_apply(&bordered(&metric.standard_isqrt_apply(&z), false));
        let mut out = metric.standard_isqrt_apply(&bordered(&metric.standard_sqrt_apply(&y), true));
        proj(&mut out);
        out
    };
    let (_, hi) = crate::metric::lanczos_extremes(n, steps, op, |v| proj(v))?;
    if !(hi > 0.0 && hi.is_finite()) {
        return Err(Error::Solver(format!("restricted inverse norm estimate {hi}")));
    }
    Ok(1.0 / hi.sqrt())
}
