//! Dense kernels shared by every oracle: flat vector helpers, symmetric and
//! rectangular matrices, linear maps, and the iterative extreme
//! eigen/singular routines behind the linear minimization oracles.

mod eigen;
mod lanczos;
mod map;

pub use eigen::{
    extreme_eigpair, extreme_eigpair_from, operator_norm_estimate, top_singular_pair,
    top_singular_pair_from, EigConfig, EigMethod, EigPair, Extreme, NotConverged, SingularTriplet,
};
pub use map::{DenseMap, LinearMap, RowSums, ScaledIdentity, StackedMap, ZeroMap};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Normalizes in place and returns the original norm. A zero vector is left untouched.
pub fn normalize(x: &mut [f64]) -> f64 {
    let n = norm(x);
    if n > 0.0 {
        scale(1.0 / n, x);
    }
    n
}

/// Seeded standard-normal vector scaled to unit length.
pub fn random_unit_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
        if len == 0 || normalize(&mut v) > 0.0 {
            return v;
        }
    }
}

/// Dense symmetric matrix in row-major storage; writes go to both triangles.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * m.n + i] = d;
        }
        m
    }

    /// Builds from the lower triangle of `f` (called with `i >= j`) and mirrors it.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Takes ownership of row-major data, rejecting asymmetric or non-finite input.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        check_len(n * n, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Symmetric part `(M + Mᵀ)/2` of an arbitrary square row-major matrix.
    pub fn symmetric_part(n: usize, data: &[f64]) -> Result<Self> {
        check_len(n * n, data.len())?;
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = data[i * n + i];
            for j in 0..i {
                let v = 0.5 * (data[i * n + j] + data[j * n + i]);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        Ok(m)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::from_fn(n, |_, _| rng.sample(StandardNormal))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `out = M x`
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (row, o) in self.data.chunks_exact(self.n).zip(out.iter_mut()) {
            *o = dot(row, x);
        }
    }

    /// `M += w · v vᵀ`
    pub fn add_rank_one(&mut self, w: f64, v: &[f64]) {
        rank_one_update(&mut self.data, self.n, w, v);
    }
}

/// Adds `w · v vᵀ` to a flat `n × n` row-major buffer.
pub(crate) fn rank_one_update(data: &mut [f64], n: usize, w: f64, v: &[f64]) {
    for (i, row) in data.chunks_exact_mut(n).enumerate() {
        let vi = v[i];
        for (r, vj) in row.iter_mut().zip(v) {
            // `vi * vj` commutes exactly, keeping the update bit-symmetric
            *r += w * (vi * vj);
        }
    }
}

/// Dense rectangular matrix in row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len(rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `out = M x`
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        matvec_flat(&self.data, self.cols, x, out);
    }

    /// `out = Mᵀ y`
    pub fn matvec_transpose(&self, y: &[f64], out: &mut [f64]) {
        matvec_transpose_flat(&self.data, self.cols, y, out);
    }
}

pub(crate) fn matvec_flat(data: &[f64], cols: usize, x: &[f64], out: &mut [f64]) {
    for (row, o) in data.chunks_exact(cols).zip(out.iter_mut()) {
        *o = dot(row, x);
    }
}

pub(crate) fn matvec_transpose_flat(data: &[f64], cols: usize, y: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (row, yi) in data.chunks_exact(cols).zip(y) {
        axpy(*yi, row, out);
    }
}
