//! Rightmost eigenvalues of the generator by shift-invert Arnoldi.
//!
//! Shifts sit at `0.1 + i b` for a few frequencies `b >= 0`; conjugates are
//! added since `G` is real. On the zero-mean subspace the kernel direction is
//! removed with the oblique projector `y - zeta (m.y) / (m.zeta)`, which
//! commutes with `G` because `m^T G = 0` and `G zeta = 0`.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::generator::{kernel_vector, GeneratorMatrices};
use crate::linalg::{self, ComplexLu};
use crate::metric::WeightedMetric;

const SHIFT_RE: f64 = 0.1;
const SHIFT_IM: [f64; 4] = [0.0, 1.0, 10.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenpair {
    pub re: f64,
    pub im: f64,
    /// `||G v - lambda v|| / (max(1, |lambda|) ||v||)`
    pub residual: f64,
    pub converged: bool,
}

impl Eigenpair {
    pub fn value(&self) -> c64 {
        c64::new(self.re, self.im)
    }
}

fn cdot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn cnorm(a: &[c64]) -> f64 {
    linalg::norm2_c(a)
}

fn scale(a: &mut [c64], s: c64) {
    a.iter_mut().for_each(|v| *v *= s);
}

struct Projector {
    zeta: Vec<f64>,
    m: Vec<f64>,
    mz: f64,
}

impl Projector {
    fn apply(&self, y: &mut [c64]) {
        let s: c64 = self.m.iter().zip(y.iter()).map(|(a, b)| b * *a).sum::<c64>() / self.mz;
        for (v, z) in y.iter_mut().zip(&self.zeta) {
            *v -= s * *z;
        }
    }
}

fn residual(gen: &GeneratorMatrices, lam: c64, v: &[c64]) -> f64 {
    let gv = gen.apply_c(v);
    let r: Vec<c64> = gv.iter().zip(v).map(|(a, b)| a - lam * b).collect();
    cnorm(&r) / (lam.norm().max(1.0) * cnorm(v))
}

/// Ritz pairs of `(G - sigma)^{-1}` from an `m`-step Arnoldi run.
fn arnoldi_shift(
    gen: &GeneratorMatrices,
    sigma: c64,
    m: usize,
    proj: Option<&Projector>,
) -> Result<Vec<(c64, Vec<c64>)>> {
    let n = gen.dim();
    let lu = ComplexLu::new(&linalg::shifted_complex(&gen.g_mat, sigma))?;
    let op = |x: &[c64]| -> Vec<c64> {
        let mut y = lu.solve(x);
        if let Some(p) = proj {
            p.apply(&mut y);
        }
        y
    };
    let mut v0: Vec<c64> = (0..n).map(|i| c64::new(1.0 + ((i as f64) * 0.618).sin(), 0.3 * ((i as f64) * 0.27).cos())).collect();
    if let Some(p) = proj {
        p.apply(&mut v0);
    }
    let nv = cnorm(&v0);
    scale(&mut v0, c64::new(1.0 / nv, 0.0));
    let mut basis = vec![v0];
    let mut h = Mat::<c64>::zeros(m + 1, m);
    let mut k = 0;
    for j in 0..m {
        let mut w = op(&basis[j]);
        for _ in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let s = cdot(q, &w);
                h[(i, j)] += s;
                w.iter_mut().zip(q).for_each(|(wv, qv)| *wv -= s * qv);
            }
        }
        let b = cnorm(&w);
        k = j + 1;
        h[(j + 1, j)] = c64::new(b, 0.0);
        if b < 1e-12 * h[(j, j)].norm().max(1e-300) || j + 1 == m {
            break;
        }
        scale(&mut w, c64::new(1.0 / b, 0.0));
        basis.push(w);
    }
    let hk = Mat::<c64>::from_fn(k, k, |i, j| h[(i, j)]);
    let eig = hk.eigen().map_err(|e| Error::NonConverged(format!("Hessenberg eigensolver: {e:?}")))?;
    let s = eig.S();
    let u = eig.U();
    let mut out = Vec::new();
    for t in 0..k {
        let theta = s[t];
        if theta.norm() < 1e-14 {
            continue;
        }
        // Ritz value of (sigma - G)^{-1} is 1/(sigma - lambda)
        let lam = sigma - c64::new(1.0, 0.0) / theta;
        let mut x = vec![c64::new(0.0, 0.0); n];
        for (i, q) in basis.iter().enumerate().take(k) {
            let c = u[(i, t)];
            x.iter_mut().zip(q).for_each(|(xv, qv)| *xv += c * qv);
        }
        out.push((lam, x));
    }
    Ok(out)
}

fn refine(gen: &GeneratorMatrices, lam: c64, x: Vec<c64>, proj: Option<&Projector>) -> Result<(c64, Vec<c64>, f64)> {
    let mut lam = lam;
    let mut x = x;
    let mut r = residual(gen, lam, &x);
    let (mut cur_lam, mut cur_x) = (lam, x.clone());
    for _ in 0..30 {
        if r <= 1e-10 {
            break;
        }
        // perturb off the eigenvalue so the factorization stays regular
        let shift = cur_lam + c64::new(1e-10 * cur_lam.norm().max(1.0), 0.0);
        let lu = ComplexLu::new(&linalg::shifted_complex(&gen.g_mat, shift))?;
        let mut y = lu.solve(&cur_x);
        if let Some(p) = proj {
            p.apply(&mut y);
        }
        let ny = cnorm(&y);
        if !(ny.is_finite() && ny > 0.0) {
            break;
        }
        scale(&mut y, c64::new(1.0 / ny, 0.0));
        let gy = gen.apply_c(&y);
        let cand = cdot(&y, &gy);
        let rc = residual(gen, cand, &y);
        if rc < r {
            lam = cand;
            x = y.clone();
            r = rc;
        }
        cur_lam = cand;
        cur_x = y;
    }
    Ok((lam, x, r))
}

fn leading(gen: &GeneratorMatrices, k: usize, proj: Option<&Projector>) -> Result<Vec<(Eigenpair, Vec<c64>)>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let n = gen.dim();
    let m = (2 * k + 40).min(n.saturating_sub(2)).max(2);
    let mut found: Vec<(Eigenpair, Vec<c64>)> = Vec::new();
    for &b in &SHIFT_IM {
        let sigma = c64::new(SHIFT_RE, b);
        let mut ritz = arnoldi_shift(gen, sigma, m, proj)?;
        // keep the ones closest to the shift
        ritz.sort_by(|a, b| (a.0 - sigma).norm().total_cmp(&(b.0 - sigma).norm()));
        ritz.truncate(k);
        for (lam, x) in ritz {
            let (mut lam, x, r) = refine(gen, lam, x, proj)?;
            let tol = 1e-6 * lam.norm().max(1.0);
            // a real double eigenvalue can surface as a pair with a tiny imaginary part
            if lam.im.abs() < tol {
                lam.im = 0.0;
            }
            let cands = if lam.im == 0.0 { vec![lam] } else { vec![lam, lam.conj()] };
            for cand in cands {
                let pair = Eigenpair { re: cand.re, im: cand.im, residual: r, converged: r <= 1e-6 };
                let vec: Vec<c64> = if cand == lam { x.clone() } else { x.iter().map(|v| v.conj()).collect() };
                match found.iter_mut().find(|(e, _)| (e.value() - cand).norm() < tol) {
                    Some(slot) if slot.0.residual > r => *slot = (pair, vec),
                    Some(_) => {}
                    None => found.push((pair, vec)),
                }
            }
        }
    }
    found.sort_by(|a, b| b.0.re.total_cmp(&a.0.re).then(b.0.im.total_cmp(&a.0.im)));
    found.truncate(k);
    Ok(found)
}

fn h0_projector(gen: &GeneratorMatrices, metric: &WeightedMetric) -> Result<Projector> {
    let kr = kernel_vector(gen, metric)?;
    let m = metric.mean_vector().to_vec();
    let mz = linalg::dot(&m, &kr.zeta);
    if mz.abs() < 1e-14 {
        return Err(Error::NoKernelFound(mz));
    }
    Ok(Projector { zeta: kr.zeta, m, mz })
}

/// The `k` rightmost eigenvalues of `G` on the zero-mean subspace, sorted by
/// decreasing real part.
pub fn spectrum_leading(gen: &GeneratorMatrices, metric: &WeightedMetric, k: usize) -> Result<Vec<Eigenpair>> {
    let proj = h0_projector(gen, metric)?;
    Ok(leading(gen, k, Some(&proj))?.into_iter().map(|(e, _)| e).collect())
}

/// Without the projector: the rightmost eigenvalue and the cosine of the
/// angle (standard inner product) between its eigenvector and the kernel
/// vector.
pub fn kernel_eigenpair(gen: &GeneratorMatrices, metric: &WeightedMetric) -> Result<(Eigenpair, f64)> {
    let kr = kernel_vector(gen, metric)?;
    let (pair, v) = leading(gen, 1, None)?.into_iter().next().ok_or_else(|| Error::NonConverged("no eigenvalue".into()))?;
    let (vr, vi) = linalg::split(&v);
    let nz = kr.zeta.clone();
    let ip_r = metric.standard_inner(&vr, &nz);
    let ip_i = metric.standard_inner(&vi, &nz);
    let nv = metric.standard_norm_c(&v);
    let cos = (ip_r * ip_r + ip_i * ip_i).sqrt() / (nv * metric.standard_norm(&nz));
    Ok((pair, cos))
}
