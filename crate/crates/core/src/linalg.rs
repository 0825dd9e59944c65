//! Thin helpers over faer sparse matrices: triplet assembly, products on
//! plain slices and cached LU factorizations (real and complex).

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, MatMut, Par};

use crate::error::{Error, Result};

pub type SpMat = SparseColMat<usize, f64>;
pub type SpMatC = SparseColMat<usize, c64>;

/// Force sequential dense/sparse kernels so that repeated runs are bitwise
/// reproducible. Parallelism is applied one level up, across independent solves.
pub fn sequential_kernels() {
    faer::set_global_parallelism(Par::Seq);
}

#[derive(Debug, Clone, Default)]
pub struct Coo {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<Triplet<usize, usize, f64>>,
}

impl Coo {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    #[inline]
    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.nrows && c < self.ncols);
        if v != 0.0 {
            self.entries.push(Triplet::new(r, c, v));
        }
    }

    pub fn build(&self) -> SpMat {
        SpMat::try_new_from_triplets(self.nrows, self.ncols, &self.entries)
            .expect("triplet indices in range")
    }
}

pub fn diag(d: &[f64]) -> SpMat {
    let mut c = Coo::new(d.len(), d.len());
    for (i, &v) in d.iter().enumerate() {
        c.push(i, i, v);
    }
    c.build()
}

pub fn identity(n: usize) -> SpMat {
    diag(&vec![1.0; n])
}

pub fn transpose(a: &SpMat) -> SpMat {
    a.transpose().to_col_major().expect("transpose")
}

pub fn scale(a: &SpMat, s: f64) -> SpMat {
    let mut out = a.clone();
    for v in out.val_mut() {
        *v *= s;
    }
    out
}

/// Scale row `i` by `d[i]`.
pub fn scale_rows(a: &SpMat, d: &[f64]) -> SpMat {
    let mut out = a.clone();
    let rows: Vec<usize> = out.symbolic().row_idx().to_vec();
    for (v, r) in out.val_mut().iter_mut().zip(rows) {
        *v *= d[r];
    }
    out
}

pub fn to_triplets(a: &SpMat) -> Vec<(usize, usize, f64)> {
    let cp = a.symbolic().col_ptr();
    let ri = a.symbolic().row_idx();
    let val = a.val();
    let mut out = Vec::with_capacity(val.len());
    for j in 0..a.ncols() {
        for k in cp[j]..cp[j + 1] {
            out.push((ri[k], j, val[k]));
        }
    }
    out
}

/// `y = A x`
pub fn matvec(a: &SpMat, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), a.ncols());
    let mut y = vec![0.0; a.nrows()];
    let cp = a.symbolic().col_ptr();
    let ri = a.symbolic().row_idx();
    let val = a.val();
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        for k in cp[j]..cp[j + 1] {
            y[ri[k]] += val[k] * xj;
        }
    }
    y
}

/// `y = A^T x`
pub fn matvec_t(a: &SpMat, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), a.nrows());
    let cp = a.symbolic().col_ptr();
    let ri = a.symbolic().row_idx();
    let val = a.val();
    (0..a.ncols())
        .map(|j| (cp[j]..cp[j + 1]).map(|k| val[k] * x[ri[k]]).sum())
        .collect()
}

pub fn matvec_c(a: &SpMat, x: &[c64]) -> Vec<c64> {
    let re: Vec<f64> = x.iter().map(|z| z.re).collect();
    let im: Vec<f64> = x.iter().map(|z| z.im).collect();
    let yr = matvec(a, &re);
    let yi = matvec(a, &im);
    yr.into_iter().zip(yi).map(|(r, i)| c64::new(r, i)).collect()
}

pub fn matvec_t_c(a: &SpMat, x: &[c64]) -> Vec<c64> {
    let re: Vec<f64> = x.iter().map(|z| z.re).collect();
    let im: Vec<f64> = x.iter().map(|z| z.im).collect();
    let yr = matvec_t(a, &re);
    let yi = matvec_t(a, &im);
    yr.into_iter().zip(yi).map(|(r, i)| c64::new(r, i)).collect()
}

/// `z I - A` as a complex matrix.
pub fn shifted_complex(a: &SpMat, z: c64) -> SpMatC {
    let mut t: Vec<Triplet<usize, usize, c64>> = to_triplets(a)
        .into_iter()
        .map(|(r, c, v)| Triplet::new(r, c, c64::new(-v, 0.0)))
        .collect();
    for i in 0..a.nrows() {
        t.push(Triplet::new(i, i, z));
    }
    SpMatC::try_new_from_triplets(a.nrows(), a.ncols(), &t).expect("shifted matrix")
}

/// `I - s A`
pub fn shifted_real(a: &SpMat, s: f64) -> SpMat {
    let mut c = Coo::new(a.nrows(), a.ncols());
    for (r, col, v) in to_triplets(a) {
        c.push(r, col, -s * v);
    }
    for i in 0..a.nrows() {
        c.push(i, i, 1.0);
    }
    c.build()
}

pub struct RealLu {
    lu: Lu<usize, f64>,
    n: usize,
}

impl RealLu {
    pub fn new(a: &SpMat) -> Result<Self> {
        let lu = a.sp_lu().map_err(|e| Error::Solver(format!("sparse LU failed: {e:?}")))?;
        Ok(Self { lu, n: a.nrows() })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        self.lu.solve_in_place(MatMut::from_column_major_slice_mut(b, self.n, 1));
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.lu.solve_transpose_in_place(MatMut::from_column_major_slice_mut(&mut x, self.n, 1));
        x
    }
}

pub struct ComplexLu {
    lu: Lu<usize, c64>,
    n: usize,
}

impl ComplexLu {
    pub fn new(a: &SpMatC) -> Result<Self> {
        let lu = a.sp_lu().map_err(|e| Error::Solver(format!("complex sparse LU failed: {e:?}")))?;
        Ok(Self { lu, n: a.nrows() })
    }

    /// Reuse a symbolic analysis computed for the same sparsity pattern.
    pub fn with_symbolic(sym: &SymbolicLu<usize>, a: &SpMatC) -> Result<Self> {
        let lu = Lu::try_new_with_symbolic(sym.clone(), a.as_ref())
            .map_err(|e| Error::Solver(format!("complex sparse LU failed: {e:?}")))?;
        Ok(Self { lu, n: a.nrows() })
    }

    pub fn symbolic(a: &SpMatC) -> Result<SymbolicLu<usize>> {
        SymbolicLu::try_new(a.symbolic()).map_err(|e| Error::Solver(format!("symbolic LU failed: {e:?}")))
    }

    pub fn solve(&self, b: &[c64]) -> Vec<c64> {
        assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        self.lu.solve_in_place(MatMut::from_column_major_slice_mut(&mut x, self.n, 1));
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm2_c(a: &[c64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a += s * b;
    }
}

pub fn split(z: &[c64]) -> (Vec<f64>, Vec<f64>) {
    (z.iter().map(|v| v.re).collect(), z.iter().map(|v| v.im).collect())
}

pub fn join(re: &[f64], im: &[f64]) -> Vec<c64> {
    re.iter().zip(im).map(|(&r, &i)| c64::new(r, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_roundtrip() {
        let mut c = Coo::new(3, 3);
        c.push(0, 0, 4.0);
        c.push(0, 1, 1.0);
        c.push(1, 1, 3.0);
        c.push(2, 0, 1.0);
        c.push(2, 2, 2.0);
        let a = c.build();
        let lu = RealLu::new(&a).unwrap();
        let b = [1.0, 2.0, 3.0];
        let x = lu.solve(&b);
        let r = matvec(&a, &x);
        for i in 0..3 {
            assert!((r[i] - b[i]).abs() < 1e-14);
        }
        let xt = lu.solve_transpose(&b);
        let rt = matvec_t(&a, &xt);
        for i in 0..3 {
            assert!((rt[i] - b[i]).abs() < 1e-14);
        }
    }
}
