//! Discrete differential, trace and quadrature operators on a [`Grid`].
//!
//! The first-derivative operator is the diagonal-norm summation-by-parts
//! pair: centred differences inside, one-sided first differences at the two
//! ends, and trapezoid weights `H`. It satisfies `H D + D^T H = diag(-1, 0, .., 0, 1)`
//! exactly, so `(p, div u)_h + (grad p, u)_h` reduces to boundary flux terms.

use crate::error::{Error, Result};
use crate::field::{BeamField, ScalarField, TensorField, VectorField};
use crate::grid::Grid;
use crate::linalg::{Coo, SpMat};

/// First derivative along a line of `m` samples with spacing `h`.
pub fn d1_line(f: &[f64], h: f64) -> Vec<f64> {
    let m = f.len();
    let mut out = vec![0.0; m];
    out[0] = (f[1] - f[0]) / h;
    out[m - 1] = (f[m - 1] - f[m - 2]) / h;
    for i in 1..m - 1 {
        out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    out
}

pub fn d1_matrix(m: usize, h: f64) -> SpMat {
    let mut c = Coo::new(m, m);
    c.push(0, 0, -1.0 / h);
    c.push(0, 1, 1.0 / h);
    c.push(m - 1, m - 1, 1.0 / h);
    c.push(m - 1, m - 2, -1.0 / h);
    for i in 1..m - 1 {
        c.push(i, i + 1, 0.5 / h);
        c.push(i, i - 1, -0.5 / h);
    }
    c.build()
}

/// `d/dx1` on nodal arrays.
pub fn dx(g: &Grid, f: &[f64]) -> Vec<f64> {
    let mx = g.mx();
    let mut out = vec![0.0; f.len()];
    for j in 0..g.my() {
        let row = &f[j * mx..(j + 1) * mx];
        out[j * mx..(j + 1) * mx].copy_from_slice(&d1_line(row, g.hx));
    }
    out
}

/// `d/dx2` on nodal arrays.
pub fn dy(g: &Grid, f: &[f64]) -> Vec<f64> {
    let (mx, my) = (g.mx(), g.my());
    let mut out = vec![0.0; f.len()];
    let mut col = vec![0.0; my];
    for i in 0..mx {
        for j in 0..my {
            col[j] = f[j * mx + i];
        }
        for (j, v) in d1_line(&col, g.hy).into_iter().enumerate() {
            out[j * mx + i] = v;
        }
    }
    out
}

pub fn dx_matrix(g: &Grid) -> SpMat {
    let d = d1_matrix(g.mx(), g.hx);
    embed(g, &d, true)
}

pub fn dy_matrix(g: &Grid) -> SpMat {
    let d = d1_matrix(g.my(), g.hy);
    embed(g, &d, false)
}

fn embed(g: &Grid, d: &SpMat, along_x: bool) -> SpMat {
    let n = g.num_nodes();
    let mut c = Coo::new(n, n);
    for (r, col, v) in crate::linalg::to_triplets(d) {
        if along_x {
            for j in 0..g.my() {
                c.push(g.idx(r, j), g.idx(col, j), v);
            }
        } else {
            for i in 0..g.mx() {
                c.push(g.idx(i, r), g.idx(i, col), v);
            }
        }
    }
    c.build()
}

pub fn gradient(g: &Grid, p: &ScalarField) -> Result<VectorField> {
    p.check(g)?;
    Ok(VectorField { c1: dx(g, &p.0), c2: dy(g, &p.0) })
}

pub fn divergence(g: &Grid, u: &VectorField) -> Result<ScalarField> {
    u.check(g)?;
    let a = dx(g, &u.c1);
    let b = dy(g, &u.c2);
    Ok(ScalarField(a.iter().zip(&b).map(|(x, y)| x + y).collect()))
}

pub(crate) fn check_lame(nu: f64, lambda: f64) -> Result<()> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("viscosity must be positive, got {nu}")));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("Lame coefficient must be nonnegative, got {lambda}")));
    }
    Ok(())
}

/// `sigma = 2 nu eps + lambda tr(eps) I`
pub fn stress(g: &Grid, u: &VectorField, nu: f64, lambda: f64) -> Result<TensorField> {
    check_lame(nu, lambda)?;
    u.check(g)?;
    let e11 = dx(g, &u.c1);
    let e22 = dy(g, &u.c2);
    let a = dy(g, &u.c1);
    let b = dx(g, &u.c2);
    let n = e11.len();
    let mut s = TensorField { s11: vec![0.0; n], s12: vec![0.0; n], s22: vec![0.0; n] };
    for k in 0..n {
        let tr = e11[k] + e22[k];
        s.s11[k] = 2.0 * nu * e11[k] + lambda * tr;
        s.s22[k] = 2.0 * nu * e22[k] + lambda * tr;
        s.s12[k] = nu * (a[k] + b[k]);
    }
    Ok(s)
}

/// Row-wise divergence of the stress. Exact on quadratic velocities at nodes
/// two or more cells away from the boundary.
pub fn stress_divergence(g: &Grid, u: &VectorField, nu: f64, lambda: f64) -> Result<VectorField> {
    let s = stress(g, u, nu, lambda)?;
    let a = dx(g, &s.s11);
    let b = dy(g, &s.s12);
    let c = dx(g, &s.s12);
    let d = dy(g, &s.s22);
    Ok(VectorField {
        c1: a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        c2: c.iter().zip(&d).map(|(x, y)| x + y).collect(),
    })
}

/// Restriction to the interface row (corners included).
pub fn trace_interface(g: &Grid, f: &ScalarField) -> Result<BeamField> {
    f.check(g)?;
    let t = g.top();
    Ok(BeamField((0..g.mx()).map(|i| f.0[g.idx(i, t)]).collect()))
}

pub fn trace_interface_vector(g: &Grid, u: &VectorField) -> Result<(BeamField, BeamField)> {
    u.check(g)?;
    Ok((
        trace_interface(g, &ScalarField(u.c1.clone()))?,
        trace_interface(g, &ScalarField(u.c2.clone()))?,
    ))
}

/// Normal derivative `d/dx2` on the interface by the second-order one-sided
/// difference into the domain.
pub fn normal_derivative_trace(g: &Grid, f: &ScalarField) -> Result<BeamField> {
    f.check(g)?;
    let t = g.top();
    Ok(BeamField(
        (0..g.mx())
            .map(|i| {
                let a = f.0[g.idx(i, t)];
                let b = f.0[g.idx(i, t - 1)];
                let c = f.0[g.idx(i, t - 2)];
                (3.0 * a - 4.0 * b + c) / (2.0 * g.hy)
            })
            .collect(),
    ))
}

/// Five-point fourth difference at the interior nodes `1..=n` of a line with
/// `n+2` samples, with caller-supplied ghost values beyond each end.
pub fn fourth_difference_with_ghosts(w: &[f64], ghost_left: f64, ghost_right: f64, h: f64) -> Vec<f64> {
    let m = w.len();
    let at = |k: isize| -> f64 {
        if k < 0 {
            ghost_left
        } else if k as usize >= m {
            ghost_right
        } else {
            w[k as usize]
        }
    };
    let h4 = h.powi(4);
    (1..m - 1)
        .map(|i| {
            let i = i as isize;
            (at(i - 2) - 4.0 * at(i - 1) + 6.0 * at(i) - 4.0 * at(i + 1) + at(i + 2)) / h4
        })
        .collect()
}

/// Ghost value for a clamped end that keeps the fourth difference exact on
/// quartics with `w = w' = 0` at the end: `w_{-1} = 6 w_1 - 2 w_2 + w_3 / 3`.
fn clamped_ghost(w1: f64, w2: f64, w3: f64) -> f64 {
    6.0 * w1 - 2.0 * w2 + w3 / 3.0
}

/// `d^4 w / dx1^4` at interior beam nodes (`nx` values) for a clamped field.
pub fn beam_fourth_derivative(g: &Grid, w: &BeamField) -> Result<Vec<f64>> {
    w.check(g)?;
    let v = &w.0;
    let m = v.len();
    let (l, r) = (v[0], v[m - 1]);
    if l.abs() > 1e-12 || r.abs() > 1e-12 {
        return Err(Error::NotClamped(format!("endpoint values {l:.3e}, {r:.3e}")));
    }
    let gl = clamped_ghost(v[1], v[2], v[3]);
    let gr = clamped_ghost(v[m - 2], v[m - 3], v[m - 4]);
    Ok(fourth_difference_with_ghosts(v, gl, gr, g.hx))
}

/// Centred first difference on beam interior nodes; the clamped endpoints
/// enter as zeros.
pub fn beam_d1(w_int: &[f64], h: f64) -> Vec<f64> {
    let n = w_int.len();
    (0..n)
        .map(|i| {
            let a = if i + 1 < n { w_int[i + 1] } else { 0.0 };
            let b = if i > 0 { w_int[i - 1] } else { 0.0 };
            (a - b) / (2.0 * h)
        })
        .collect()
}

pub fn beam_d1_matrix(n: usize, h: f64) -> SpMat {
    let mut c = Coo::new(n, n);
    for i in 0..n {
        if i + 1 < n {
            c.push(i, i + 1, 0.5 / h);
        }
        if i > 0 {
            c.push(i, i - 1, -0.5 / h);
        }
    }
    c.build()
}

/// Clamped second difference on the full beam row: `D2 w` at nodes `0..=n+1`
/// with reflected ghosts, so that `K = D2^T Hb D2` is the clamped energy.
pub fn beam_d2_clamped(w_int: &[f64], h: f64) -> Vec<f64> {
    let n = w_int.len();
    let h2 = h * h;
    let at = |k: usize| if k == 0 || k == n + 1 { 0.0 } else { w_int[k - 1] };
    let mut out = vec![0.0; n + 2];
    out[0] = 2.0 * at(1) / h2;
    out[n + 1] = 2.0 * at(n) / h2;
    for k in 1..=n {
        out[k] = (at(k + 1) - 2.0 * at(k) + at(k - 1)) / h2;
    }
    out
}

/// Beam stiffness `K = D2^T Hb D2` (size `n x n`), symmetric positive definite.
pub fn beam_stiffness_matrix(n: usize, h: f64) -> SpMat {
    let h2 = h * h;
    let mut d2 = Coo::new(n + 2, n);
    d2.push(0, 0, 2.0 / h2);
    d2.push(n + 1, n - 1, 2.0 / h2);
    for k in 1..=n {
        d2.push(k, k - 1, -2.0 / h2);
        if k >= 2 {
            d2.push(k, k - 2, 1.0 / h2);
        }
        if k < n {
            d2.push(k, k, 1.0 / h2);
        }
    }
    let d2 = d2.build();
    let hb = crate::linalg::diag(&crate::grid::trapezoid(n + 2, h));
    let t = crate::linalg::transpose(&d2);
    &(&t * &hb) * &d2
}

pub fn integrate(g: &Grid, f: &[f64]) -> f64 {
    g.node_weights().iter().zip(f).map(|(w, v)| w * v).sum()
}

pub fn integrate_beam(g: &Grid, w: &BeamField) -> f64 {
    g.beam_weights_full().iter().zip(&w.0).map(|(a, b)| a * b).sum()
}

/// Discrete `L^2` inner product with trapezoid weights.
pub fn inner_h(g: &Grid, a: &[f64], b: &[f64]) -> f64 {
    g.node_weights().iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * x * y).sum()
}

pub fn norm_h(g: &Grid, a: &[f64]) -> f64 {
    inner_h(g, a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g8() -> Grid {
        Grid::unit(8).unwrap()
    }

    #[test]
    fn sbp_identity_1d() {
        let m = 11;
        let h = 0.1;
        let d = d1_matrix(m, h);
        let hm = crate::linalg::diag(&crate::grid::trapezoid(m, h));
        let q = &(&hm * &d) + &(&crate::linalg::transpose(&d) * &hm);
        let dense = q.to_dense();
        for r in 0..m {
            for c in 0..m {
                let want = if r == c && r == 0 {
                    -1.0
                } else if r == c && r == m - 1 {
                    1.0
                } else {
                    0.0
                };
                assert!((dense[(r, c)] - want).abs() < 1e-13, "({r},{c})");
            }
        }
    }

    #[test]
    fn gradient_examples() {
        let g = g8();
        let c = gradient(&g, &ScalarField::from_fn(&g, |_, _| 3.5)).unwrap();
        assert!(c.c1.iter().chain(&c.c2).all(|v| v.abs() < 1e-12));
        let a = gradient(&g, &ScalarField::from_fn(&g, |x, y| x + 2.0 * y)).unwrap();
        assert!(a.c1.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(a.c2.iter().all(|v| (v - 2.0).abs() < 1e-12));
        let b = gradient(&g, &ScalarField::from_fn(&g, |x, y| x * y)).unwrap();
        for j in 0..g.my() {
            for i in 0..g.mx() {
                let k = g.idx(i, j);
                assert!((b.c1[k] - g.y(j)).abs() < 1e-12);
                assert!((b.c2[k] - g.x(i)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn divergence_examples() {
        let g = g8();
        let a = divergence(&g, &VectorField::from_fn(&g, |x, _| [x, 0.0])).unwrap();
        assert!(a.0.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let b = divergence(&g, &VectorField::from_fn(&g, |x, y| [y, -x])).unwrap();
        assert!(b.0.iter().all(|v| v.abs() < 1e-12));
        let c = divergence(&g, &VectorField::from_fn(&g, |x, y| [x * x, y * y])).unwrap();
        for j in 1..=g.ny {
            for i in 1..=g.nx {
                assert!((c.at(&g, i, j) - 2.0 * g.x(i) - 2.0 * g.y(j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stress_examples() {
        let g = g8();
        let s = stress(&g, &VectorField::from_fn(&g, |_, y| [y, 0.0]), 1.0, 0.0).unwrap();
        assert!(s.s12.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(s.s11.iter().chain(&s.s22).all(|v| v.abs() < 1e-12));
        let s = stress(&g, &VectorField::from_fn(&g, |x, y| [x, y]), 1.0, 1.0).unwrap();
        assert!(s.s11.iter().chain(&s.s22).all(|v| (v - 4.0).abs() < 1e-12));
        assert!(s.s12.iter().all(|v| v.abs() < 1e-12));
        let z = stress(&g, &VectorField::zeros(&g), 1.0, 1.0).unwrap();
        assert!(z.s11.iter().all(|v| *v == 0.0));
        assert!(stress(&g, &VectorField::zeros(&g), 0.0, 1.0).is_err());
        assert!(stress(&g, &VectorField::zeros(&g), 1.0, -0.1).is_err());
    }

    #[test]
    fn stress_divergence_affine_is_zero() {
        let g = g8();
        let d = stress_divergence(&g, &VectorField::from_fn(&g, |x, y| [2.0 * x - y, 0.5 * x + 3.0 * y]), 1.3, 0.7)
            .unwrap();
        assert!(d.c1.iter().chain(&d.c2).all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn traces() {
        let g = g8();
        let t = trace_interface(&g, &ScalarField::from_fn(&g, |_, y| y)).unwrap();
        assert!(t.0.iter().all(|v| v.abs() < 1e-15));
        let t = trace_interface(&g, &ScalarField::from_fn(&g, |x, _| x)).unwrap();
        for i in 0..g.mx() {
            assert!((t.0[i] - g.x(i)).abs() < 1e-15);
        }
        let u2 = ScalarField::from_fn(&g, |_, y| y * y);
        let d = normal_derivative_trace(&g, &u2).unwrap();
        assert!(d.0.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn beam_examples() {
        let g = g8();
        let q = BeamField::from_fn(&g, |x| x * x * (1.0 - x) * (1.0 - x));
        let d4 = beam_fourth_derivative(&g, &q).unwrap();
        assert!(d4.iter().all(|v| (v - 24.0).abs() < 1e-8), "{d4:?}");
        let h = g.hx;
        let x4 = BeamField::from_fn(&g, |x| x.powi(4));
        let d = fourth_difference_with_ghosts(&x4.0, h.powi(4), (1.0 + h).powi(4), h);
        assert!(d.iter().all(|v| (v - 24.0).abs() < 1e-7));
        let x3 = BeamField::from_fn(&g, |x| x.powi(3));
        let d = fourth_difference_with_ghosts(&x3.0, -h.powi(3), (1.0 + h).powi(3), h);
        assert!(d.iter().all(|v| v.abs() < 1e-7));
        let bad = BeamField::from_fn(&g, |x| 1.0 + x);
        assert!(beam_fourth_derivative(&g, &bad).is_err());
    }

    #[test]
    fn beam_stiffness_is_reflected_fourth_difference() {
        let n = 10;
        let h = 1.0 / 11.0;
        let k = beam_stiffness_matrix(n, h).to_dense();
        let w: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 5) as f64 - 2.0).collect();
        let mut full = vec![0.0; n + 2];
        full[1..=n].copy_from_slice(&w);
        let d4 = fourth_difference_with_ghosts(&full, w[0], w[n - 1], h);
        for r in 0..n {
            let kw: f64 = (0..n).map(|c| k[(r, c)] * w[c]).sum();
            assert!((kw - h * d4[r]).abs() < 1e-6 * d4[r].abs().max(1.0));
            for c in 0..n {
                assert!((k[(r, c)] - k[(c, r)]).abs() < 1e-6);
            }
        }
    }
}
