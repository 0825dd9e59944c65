//! Numerical experiments on an assembled generator: dissipativity scans,
//! resolvent solves and sweeps, the `w2` trace bound and implicit evolution.

use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::GeneratorMatrices;
use crate::linalg::{self, ComplexLu, RealLu};
use crate::metric::WeightedMetric;
use crate::ops;

/// One damped Jacobi sweep of the 5-point Laplacian on the nodes where
/// `mask` is set; the other nodes act as zeros.
fn jacobi_nodal(g: &crate::grid::Grid, f: &mut [f64], mask: &[bool]) {
    let omega = 2.0 / 3.0;
    let old = f.to_vec();
    for j in 0..g.my() {
        for i in 0..g.mx() {
            let k = g.idx(i, j);
            if !mask[k] {
                continue;
            }
            let mut s = 0.0;
            let mut c = 0.0;
            let mut add = |ii: usize, jj: usize| {
                let kk = g.idx(ii, jj);
                if mask[kk] {
                    s += old[kk];
                }
                c += 1.0;
            };
            if i > 0 {
                add(i - 1, j);
            }
            if i < g.nx {
                add(i + 1, j);
            }
            if j > 0 {
                add(i, j - 1);
            }
            if j < g.ny {
                add(i, j + 1);
            }
            f[k] = (1.0 - omega) * old[k] + omega * s / c;
        }
    }
}

fn jacobi_line(f: &mut [f64]) {
    let omega = 2.0 / 3.0;
    let old = f.to_vec();
    let n = f.len();
    for i in 0..n {
        let l = if i > 0 { old[i - 1] } else { 0.0 };
        let r = if i + 1 < n { old[i + 1] } else { 0.0 };
        f[i] = (1.0 - omega) * old[i] + omega * 0.5 * (l + r);
    }
}

/// Pseudorandom state: uniform entries in `[-1, 1]`, one Jacobi pass per
/// component, then projected into the zero-mean subspace. Clamping and the
/// wall conditions hold by construction of the packed layout.
pub fn random_state(metric: &WeightedMetric, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let l = &metric.layout;
    let g = &l.grid;
    let n = g.num_nodes();
    let mut y: Vec<f64> = (0..l.dim()).map(|_| rng.random_range(-1.0..=1.0)).collect();

    let mut p = y[..l.np()].to_vec();
    jacobi_nodal(g, &mut p, &vec![true; n]);
    y[..l.np()].copy_from_slice(&p);

    for (nodes, off) in [(&l.u1_nodes, l.off_u1()), (&l.u2_nodes, l.off_u2())] {
        let mut mask = vec![false; n];
        let mut f = vec![0.0; n];
        for (k, &node) in nodes.iter().enumerate() {
            mask[node] = true;
            f[node] = y[off + k];
        }
        jacobi_nodal(g, &mut f, &mask);
        for (k, &node) in nodes.iter().enumerate() {
            y[off + k] = f[node];
        }
    }
    for (lo, hi) in [(l.off_w1(), l.off_w2()), (l.off_w2(), l.dim())] {
        jacobi_line(&mut y[lo..hi]);
    }
    metric.project_h0(&y)
}

/// `count` states from one seeded stream.
pub fn random_states(metric: &WeightedMetric, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_state(metric, &mut rng)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipativitySample {
    pub sample_id: usize,
    /// `Re((G phi, phi))`
    pub q: f64,
    pub norm2: f64,
    pub q_over_norm2: f64,
    /// `(sigma(u), eps(u)) + ||u||^2`
    pub flow_budget: f64,
    /// `xi (||p||^2 + ||w1''||^2)`
    pub pressure_plate_budget: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipativityReport {
    pub samples: Vec<DissipativitySample>,
    pub max_ratio: f64,
    pub r_u: f64,
    pub xi: f64,
    /// smallest `C_delta` for which the budget inequality holds on every
    /// sample when the plate term keeps its full `-1/2` weight
    pub c_delta: Option<f64>,
    /// smallest `C*` for the given `delta` when `C_delta = 0`
    pub c_star: Option<f64>,
}

/// `q(phi)` and its budget terms for one state.
pub fn dissipativity_terms(gen: &GeneratorMatrices, metric: &WeightedMetric, y: &[f64]) -> (f64, f64, f64, f64) {
    let l = &gen.layout;
    let gy = linalg::matvec(&gen.g_mat, y);
    let q = metric.inner(&gy, y);
    let norm2 = metric.norm(y).powi(2);
    let ny = metric.standard_apply(y);
    let block = |lo: usize, hi: usize| linalg::dot(&y[lo..hi], &ny[lo..hi]);
    let flow = gen.viscous_energy(y) + block(l.off_u1(), l.off_w1());
    let plate = metric.xi * (block(0, l.np()) + block(l.off_w1(), l.off_w2()));
    (q, norm2, flow, plate)
}

pub fn dissipativity_scan(
    gen: &GeneratorMatrices,
    metric: &WeightedMetric,
    samples: usize,
    seed: u64,
    delta: f64,
) -> Result<DissipativityReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let states = random_states(metric, samples, seed);
    let mut out = Vec::with_capacity(samples);
    let mut max_ratio = f64::NEG_INFINITY;
    let mut need_c_delta = f64::NEG_INFINITY;
    let mut need_c_star = f64::NEG_INFINITY;
    let (r, xi) = (metric.r_u, metric.xi);
    for (id, y) in states.iter().enumerate() {
        let (q, norm2, flow, plate) = dissipativity_terms(gen, metric, y);
        let ratio = q / norm2;
        max_ratio = max_ratio.max(ratio);
        let excess = q + 0.25 * flow + 0.5 * plate;
        if r > 0.0 && flow > 0.0 {
            need_c_delta = need_c_delta.max(excess / (r * flow));
        }
        if plate > 0.0 {
            need_c_star = need_c_star.max(excess / (delta * plate));
        }
        out.push(DissipativitySample {
            sample_id: id,
            q,
            norm2,
            q_over_norm2: ratio,
            flow_budget: flow,
            pressure_plate_budget: plate,
        });
    }
    let pos = |v: f64| if v.is_finite() { Some(v.max(0.0)) } else { None };
    Ok(DissipativityReport { samples: out, max_ratio, r_u: r, xi, c_delta: pos(need_c_delta), c_star: pos(need_c_star) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventRecord {
    pub a: f64,
    pub b: f64,
    pub sample_id: usize,
    pub residual: f64,
    pub norm_weighted: f64,
    pub criterion_value: f64,
}

/// Factorization of `(a + ib) I - G`.
pub struct Resolvent<'a> {
    gen: &'a GeneratorMatrices,
    metric: &'a WeightedMetric,
    z: c64,
    lu: ComplexLu,
}

impl<'a> Resolvent<'a> {
    pub fn new(gen: &'a GeneratorMatrices, metric: &'a WeightedMetric, a: f64, b: f64) -> Result<Self> {
        check_shift(a, b)?;
        let z = c64::new(a, b);
        let lu = ComplexLu::new(&linalg::shifted_complex(&gen.g_mat, z))?;
        Ok(Self { gen, metric, z, lu })
    }

    fn with_symbolic(
        gen: &'a GeneratorMatrices,
        metric: &'a WeightedMetric,
        sym: &faer::sparse::linalg::solvers::SymbolicLu<usize>,
        a: f64,
        b: f64,
    ) -> Result<Self> {
        check_shift(a, b)?;
        let z = c64::new(a, b);
        let lu = ComplexLu::with_symbolic(sym, &linalg::shifted_complex(&gen.g_mat, z))?;
        Ok(Self { gen, metric, z, lu })
    }

    fn apply_shifted(&self, x: &[c64]) -> Vec<c64> {
        let gx = self.gen.apply_c(x);
        x.iter().zip(gx).map(|(xi, gi)| self.z * xi - gi).collect()
    }

    /// Solve with one step of iterative refinement; the residual is relative
    /// in the standard norm.
    pub fn solve(&self, rhs: &[f64], sample_id: usize) -> Result<(Vec<c64>, ResolventRecord)> {
        let n = self.gen.dim();
        if rhs.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: rhs.len() });
        }
        let m = self.metric;
        let scale = linalg::norm2(m.mean_vector()) * linalg::norm2(rhs);
        let defect = m.mean_functional(rhs);
        if defect.abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotMeanFree(defect));
        }
        let b: Vec<c64> = rhs.iter().map(|&v| c64::new(v, 0.0)).collect();
        let bn = m.standard_norm(rhs);
        let (a, im) = (self.z.re, self.z.im);
        if bn == 0.0 {
            let rec = ResolventRecord { a, b: im, sample_id, residual: 0.0, norm_weighted: 0.0, criterion_value: 0.0 };
            return Ok((vec![c64::new(0.0, 0.0); n], rec));
        }
        let mut x = self.lu.solve(&b);
        let r: Vec<c64> = b.iter().zip(self.apply_shifted(&x)).map(|(bi, ai)| bi - ai).collect();
        let dx = self.lu.solve(&r);
        x.iter_mut().zip(dx).for_each(|(xi, di)| *xi += di);
        let r: Vec<c64> = b.iter().zip(self.apply_shifted(&x)).map(|(bi, ai)| bi - ai).collect();
        let residual = m.standard_norm_c(&r) / bn;
        if !(residual <= 1e-8) {
            return Err(Error::Solver(format!("resolvent residual {residual:.3e} at a = {a}, b = {im}")));
        }
        let norm_weighted = m.norm_c(&x);
        let rec = ResolventRecord { a, b: im, sample_id, residual, norm_weighted, criterion_value: a.sqrt() * norm_weighted };
        Ok((x, rec))
    }
}

fn check_shift(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("resolvent shift needs a > 0, got a = {a}, b = {b}")));
    }
    Ok(())
}

pub fn resolvent_solve(
    gen: &GeneratorMatrices,
    metric: &WeightedMetric,
    a: f64,
    b: f64,
    rhs: &[f64],
) -> Result<(Vec<c64>, ResolventRecord)> {
    Resolvent::new(gen, metric, a, b)?.solve(rhs, 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub a: f64,
    pub b: f64,
    pub sample_id: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct SweepTable {
    /// ordered by `b`, then `a`, then sample
    pub records: Vec<ResolventRecord>,
    pub failures: Vec<SweepFailure>,
    /// solutions aligned with `records` when requested
    pub solutions: Vec<Vec<c64>>,
}

impl SweepTable {
    /// `criterion(a_last) / criterion(a_first)` for each `(b, sample)`.
    pub fn decay_ratios(&self) -> Vec<(f64, usize, f64)> {
        let mut out: Vec<(f64, usize, f64)> = Vec::new();
        let mut firsts: Vec<(f64, usize, f64, f64)> = Vec::new();
        for r in &self.records {
            match firsts.iter_mut().find(|f| f.0 == r.b && f.1 == r.sample_id) {
                Some(f) => f.3 = r.criterion_value,
                None => firsts.push((r.b, r.sample_id, r.criterion_value, r.criterion_value)),
            }
        }
        for (b, s, first, last) in firsts {
            out.push((b, s, if first > 0.0 { last / first } else { 0.0 }));
        }
        out
    }
}

/// Evaluate every `(b, a, sample)` cell. Cells run in parallel; output order
/// does not depend on scheduling.
pub fn resolvent_sweep(
    gen: &GeneratorMatrices,
    metric: &WeightedMetric,
    b_list: &[f64],
    a_list: &[f64],
    samples: &[Vec<f64>],
    keep_solutions: bool,
) -> Result<SweepTable> {
    if a_list.is_empty() || a_list.windows(2).any(|w| !(w[1] < w[0])) || !(a_list[a_list.len() - 1] > 0.0) {
        return Err(Error::InvalidParameter("a_list must be strictly decreasing and positive".into()));
    }
    if b_list.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidParameter("b_list entries must be finite".into()));
    }
    let sym = ComplexLu::symbolic(&linalg::shifted_complex(&gen.g_mat, c64::new(1.0, 1.0)))?;
    let cells: Vec<(f64, f64)> = b_list.iter().flat_map(|&b| a_list.iter().map(move |&a| (a, b))).collect();
    type CellOut = (Vec<(ResolventRecord, Option<Vec<c64>>)>, Vec<SweepFailure>);
    let results: Vec<CellOut> = cells
        .par_iter()
        .map(|&(a, b)| {
            let mut recs = Vec::new();
            let mut fails = Vec::new();
            match Resolvent::with_symbolic(gen, metric, &sym, a, b) {
                Ok(res) => {
                    for (id, s) in samples.iter().enumerate() {
                        match res.solve(s, id) {
                            Ok((x, rec)) => recs.push((rec, keep_solutions.then_some(x))),
                            Err(e) => fails.push(SweepFailure { a, b, sample_id: Some(id), message: e.to_string() }),
                        }
                    }
                }
                Err(e) => fails.push(SweepFailure { a, b, sample_id: None, message: e.to_string() }),
            }
            (recs, fails)
        })
        .collect();
    let mut table = SweepTable::default();
    for (recs, fails) in results {
        for (rec, sol) in recs {
            table.records.push(rec);
            if let Some(x) = sol {
                table.solutions.push(x);
            }
        }
        table.failures.extend(fails);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceBound {
    /// `max ||w2||_Omega / sqrt|Re((phi*, phi))|`
    pub constant: f64,
    /// max deviation of `w2` from `u2|_Omega - U1 d1 w1`
    pub interface_residual: f64,
}

/// Measured constant in `||w2|| <= C sqrt|Re((phi*, phi))|` over resolvent
/// solutions `phi` for right-hand sides `phi*`.
pub fn w2_trace_bound(gen: &GeneratorMatrices, metric: &WeightedMetric, pairs: &[(&[f64], &[c64])]) -> TraceBound {
    let l = &gen.layout;
    let g = &l.grid;
    let mut constant: f64 = 0.0;
    let mut interface_residual: f64 = 0.0;
    for (rhs, sol) in pairs {
        let rc: Vec<c64> = rhs.iter().map(|&v| c64::new(v, 0.0)).collect();
        let pairing = metric.inner_c(&rc, sol).re.abs();
        let (re, im) = linalg::split(sol);
        let mut w2n = 0.0;
        for part in [&re, &im] {
            w2n += g.hx * l.w2(part).iter().map(|v| v * v).sum::<f64>();
            let (_, u2) = l.velocity(part);
            let dw = ops::beam_d1(l.w1(part), g.hx);
            for i in 1..=g.nx {
                let tr = u2[g.idx(i, g.top())];
                let d = (tr - l.u1_top[i - 1] * dw[i - 1] - l.w2(part)[i - 1]).abs();
                interface_residual = interface_residual.max(d);
            }
        }
        let w2n = w2n.sqrt();
        if pairing > 0.0 {
            constant = constant.max(w2n / pairing.sqrt());
        } else if w2n > 0.0 {
            constant = f64::INFINITY;
        }
    }
    TraceBound { constant, interface_residual }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    /// `|||phi|||^2`
    pub e_weighted: Vec<f64>,
    /// `||phi||^2` in the standard norm
    pub e_standard: Vec<f64>,
    pub mean_drift: Vec<f64>,
}

/// Backward Euler from `phi0` (which must lie in the zero-mean subspace)
/// over `round(t_end / dt)` steps.
pub fn evolve(
    gen: &GeneratorMatrices,
    metric: &WeightedMetric,
    phi0: &[f64],
    dt: f64,
    t_end: f64,
) -> Result<(EnergyTrace, Vec<f64>)> {
    let n = gen.dim();
    if phi0.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: phi0.len() });
    }
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("need dt > 0 and T >= 0, got dt = {dt}, T = {t_end}")));
    }
    let defect = metric.mean_functional(phi0);
    if defect.abs() > 1e-10 * (linalg::norm2(metric.mean_vector()) * linalg::norm2(phi0)).max(f64::MIN_POSITIVE) {
        return Err(Error::NotMeanFree(defect));
    }
    let steps = (t_end / dt).round() as usize;
    let mut trace = EnergyTrace::default();
    let mut y = phi0.to_vec();
    let record = |t: f64, y: &[f64], tr: &mut EnergyTrace| {
        tr.times.push(t);
        tr.e_weighted.push(metric.norm(y).powi(2));
        tr.e_standard.push(metric.standard_norm(y).powi(2));
        tr.mean_drift.push(metric.mean_functional(y).abs());
    };
    record(0.0, &y, &mut trace);
    if steps > 0 {
        let lu = RealLu::new(&linalg::shifted_real(&gen.g_mat, dt))?;
        for k in 1..=steps {
            lu.solve_in_place(&mut y);
            record(k as f64 * dt, &y, &mut trace);
        }
    }
    Ok((trace, y))
}
