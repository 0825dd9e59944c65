//! Commutator diagnostic `[Δ, h·∇] w = Δ(h·∇w) − h·∇(Δw)`.
//!
//! Both sides use fourth-order five-point stencils, which are exact on
//! polynomials of degree four. The composed left side needs a margin of four
//! nodes, so values are reported on the deep interior only.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;

const MARGIN: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorReport {
    /// direct composition
    pub lhs: Vec<f64>,
    /// analytic expansion
    pub rhs: Vec<f64>,
    /// max |lhs − rhs|
    pub discrepancy: f64,
    /// 2-D only: expansion with the cross term `2 div(h) ∂₁∂₂w`
    pub written_rhs: Option<Vec<f64>>,
    pub written_discrepancy: Option<f64>,
}

fn d1_at(f: &[f64], i: usize, s: usize, h: f64) -> f64 {
    (f[i - 2 * s] - 8.0 * f[i - s] + 8.0 * f[i + s] - f[i + 2 * s]) / (12.0 * h)
}

fn d2_at(f: &[f64], i: usize, s: usize, h: f64) -> f64 {
    (-f[i - 2 * s] + 16.0 * f[i - s] - 30.0 * f[i] + 16.0 * f[i + s] - f[i + 2 * s]) / (12.0 * h * h)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// 1-D check on uniformly spaced samples `w`, `h` (spacing `dx`).
/// Reports values at nodes `4..len-4`.
pub fn commutator_check_1d(w: &[f64], h: &[f64], dx: f64) -> Result<CommutatorReport> {
    let n = w.len();
    if h.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: h.len() });
    }
    if n < 2 * MARGIN + 1 {
        return Err(Error::InvalidParameter(format!("need at least {} samples, got {n}", 2 * MARGIN + 1)));
    }
    if !(dx > 0.0) {
        return Err(Error::InvalidParameter(format!("spacing must be positive, got {dx}")));
    }
    let mut hw = vec![0.0; n];
    let mut lw = vec![0.0; n];
    for i in 2..n - 2 {
        hw[i] = h[i] * d1_at(w, i, 1, dx);
        lw[i] = d2_at(w, i, 1, dx);
    }
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for i in MARGIN..n - MARGIN {
        lhs.push(d2_at(&hw, i, 1, dx) - h[i] * d1_at(&lw, i, 1, dx));
        rhs.push(d2_at(h, i, 1, dx) * d1_at(w, i, 1, dx) + 2.0 * d1_at(h, i, 1, dx) * d2_at(w, i, 1, dx));
    }
    let discrepancy = max_diff(&lhs, &rhs);
    Ok(CommutatorReport { lhs, rhs, discrepancy, written_rhs: None, written_discrepancy: None })
}

/// 2-D check on the nodes of `g`, reported row by row over the deep interior.
pub fn commutator_check_2d(g: &Grid, w: &ScalarField, h: &VectorField) -> Result<CommutatorReport> {
    w.check(g)?;
    h.check(g)?;
    let sx = 1;
    let sy = g.mx();
    let (hx, hy) = (g.hx, g.hy);
    let n = g.num_nodes();
    let w = &w.0;
    let (h1, h2) = (&h.c1, &h.c2);
    let inner = |i: usize, j: usize, m: usize| i >= m && j >= m && i + m <= g.nx && j + m <= g.ny;

    let mut hgw = vec![0.0; n];
    let mut lap_w = vec![0.0; n];
    for j in 0..g.my() {
        for i in 0..g.mx() {
            if inner(i, j, 2) {
                let k = g.idx(i, j);
                hgw[k] = h1[k] * d1_at(w, k, sx, hx) + h2[k] * d1_at(w, k, sy, hy);
                lap_w[k] = d2_at(w, k, sx, hx) + d2_at(w, k, sy, hy);
            }
        }
    }
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    let mut written = Vec::new();
    for j in 0..g.my() {
        for i in 0..g.mx() {
            if !inner(i, j, MARGIN) {
                continue;
            }
            let k = g.idx(i, j);
            lhs.push(
                d2_at(&hgw, k, sx, hx) + d2_at(&hgw, k, sy, hy)
                    - h1[k] * d1_at(&lap_w, k, sx, hx)
                    - h2[k] * d1_at(&lap_w, k, sy, hy),
            );
            let dw = [d1_at(w, k, sx, hx), d1_at(w, k, sy, hy)];
            let wxx = d2_at(w, k, sx, hx);
            let wyy = d2_at(w, k, sy, hy);
            let dyw: Vec<f64> = (k - 2 * sx..=k + 2 * sx).map(|m| d1_at(w, m, sy, hy)).collect();
            let wxy = d1_at(&dyw, 2, 1, hx);
            let lap = |f: &[f64]| d2_at(f, k, sx, hx) + d2_at(f, k, sy, hy);
            // dh[i][j] = ∂ᵢ hⱼ
            let dh = [
                [d1_at(h1, k, sx, hx), d1_at(h2, k, sx, hx)],
                [d1_at(h1, k, sy, hy), d1_at(h2, k, sy, hy)],
            ];
            let low = lap(h1) * dw[0] + lap(h2) * dw[1];
            rhs.push(low + 2.0 * (dh[0][0] * wxx + (dh[0][1] + dh[1][0]) * wxy + dh[1][1] * wyy));
            let div_h = dh[0][0] + dh[1][1];
            written.push(low + 2.0 * dh[0][0] * wxx + 2.0 * dh[1][1] * wyy + 2.0 * div_h * wxy);
        }
    }
    let discrepancy = max_diff(&lhs, &rhs);
    let written_discrepancy = max_diff(&lhs, &written);
    Ok(CommutatorReport {
        lhs,
        rhs,
        discrepancy,
        written_rhs: Some(written),
        written_discrepancy: Some(written_discrepancy),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_h_gives_zero() {
        let n = 17;
        let dx = 1.0 / 16.0;
        let w: Vec<f64> = (0..n).map(|i| ((i as f64) * dx).powi(4)).collect();
        let r = commutator_check_1d(&w, &vec![2.5; n], dx).unwrap();
        assert!(r.lhs.iter().all(|v| v.abs() < 1e-9));
        assert!(r.rhs.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn too_short_rejected() {
        assert!(commutator_check_1d(&[0.0; 8], &[0.0; 8], 0.1).is_err());
    }
}
