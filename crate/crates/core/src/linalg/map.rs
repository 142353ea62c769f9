use std::fmt;
use std::sync::Arc;

use super::{eigen, DenseMatrix, EigConfig};

/// The linear map `A` coupling the decision variable to the nonsmooth term.
///
/// Decision variables are flat slices; matrix variables use row-major layout.
pub trait LinearMap: Send + Sync + fmt::Debug {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    /// `out = A x`
    fn apply(&self, x: &[f64], out: &mut [f64]);
    /// `out = Aᵀ y`
    fn adjoint(&self, y: &[f64], out: &mut [f64]);
    /// Estimate (upper bound where available) of the operator norm `‖A‖`.
    fn norm_estimate(&self) -> f64;

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.output_len()];
        self.apply(x, &mut out);
        out
    }

    fn adjoint_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.input_len()];
        self.adjoint(y, &mut out);
        out
    }
}

#[derive(Clone, Debug)]
pub struct ScaledIdentity {
    len: usize,
    scale: f64,
}

impl ScaledIdentity {
    pub fn new(len: usize, scale: f64) -> Self {
        Self { len, scale }
    }
}

impl LinearMap for ScaledIdentity {
    fn input_len(&self) -> usize {
        self.len
    }
    fn output_len(&self) -> usize {
        self.len
    }
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        if self.scale == 1.0 {
            out.copy_from_slice(x);
        } else {
            for (o, v) in out.iter_mut().zip(x) {
                *o = self.scale * v;
            }
        }
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        self.apply(y, out);
    }
    fn norm_estimate(&self) -> f64 {
        self.scale.abs()
    }
}

#[derive(Clone, Debug)]
pub struct ZeroMap {
    input: usize,
    output: usize,
}

impl ZeroMap {
    pub fn new(input: usize, output: usize) -> Self {
        Self { input, output }
    }
}

impl LinearMap for ZeroMap {
    fn input_len(&self) -> usize {
        self.input
    }
    fn output_len(&self) -> usize {
        self.output
    }
    fn apply(&self, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
    fn adjoint(&self, _y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
    fn norm_estimate(&self) -> f64 {
        0.0
    }
}

/// Row sums `X ↦ X·1ₙ` of a flat `n × n` matrix; adjoint `y ↦ y 1ₙᵀ`.
#[derive(Clone, Debug)]
pub struct RowSums {
    n: usize,
}

impl RowSums {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl LinearMap for RowSums {
    fn input_len(&self) -> usize {
        self.n * self.n
    }
    fn output_len(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (row, o) in x.chunks_exact(self.n).zip(out.iter_mut()) {
            *o = row.iter().sum();
        }
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        for (row, yi) in out.chunks_exact_mut(self.n).zip(y) {
            row.iter_mut().for_each(|v| *v = *yi);
        }
    }
    fn norm_estimate(&self) -> f64 {
        (self.n as f64).sqrt()
    }
}

/// Vertical concatenation `x ↦ (A₁x, A₂x, …)` of maps sharing an input space.
#[derive(Clone, Debug)]
pub struct StackedMap {
    parts: Vec<Arc<dyn LinearMap>>,
    input: usize,
    output: usize,
}

impl StackedMap {
    pub fn new(parts: Vec<Arc<dyn LinearMap>>) -> crate::Result<Self> {
        let input = parts.first().map_or(0, |p| p.input_len());
        for p in &parts {
            crate::error::check_len(input, p.input_len())?;
        }
        let output = parts.iter().map(|p| p.output_len()).sum();
        Ok(Self {
            parts,
            input,
            output,
        })
    }

    pub fn parts(&self) -> &[Arc<dyn LinearMap>] {
        &self.parts
    }
}

impl LinearMap for StackedMap {
    fn input_len(&self) -> usize {
        self.input
    }
    fn output_len(&self) -> usize {
        self.output
    }
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let mut offset = 0;
        for p in &self.parts {
            let len = p.output_len();
            p.apply(x, &mut out[offset..offset + len]);
            offset += len;
        }
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut scratch = vec![0.0; self.input];
        let mut offset = 0;
        for p in &self.parts {
            let len = p.output_len();
            p.adjoint(&y[offset..offset + len], &mut scratch);
            super::axpy(1.0, &scratch, out);
            offset += len;
        }
    }
    /// Root-sum-square of the parts' norms, an upper bound on `‖A‖`.
    fn norm_estimate(&self) -> f64 {
        self.parts
            .iter()
            .map(|p| p.norm_estimate().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// An explicitly materialized matrix acting on flat vectors.
#[derive(Clone, Debug)]
pub struct DenseMap {
    matrix: DenseMatrix,
    norm: f64,
}

impl DenseMap {
    pub fn new(matrix: DenseMatrix) -> Self {
        let cfg = EigConfig {
            tol: 1e-12,
            max_iter: 10_000,
            ..EigConfig::default()
        };
        let norm = match eigen::top_singular_pair(&matrix, &cfg) {
            Ok(t) => t.sigma,
            Err(e) => e.best.sigma,
        };
        Self { matrix, norm }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

impl LinearMap for DenseMap {
    fn input_len(&self) -> usize {
        self.matrix.cols()
    }
    fn output_len(&self) -> usize {
        self.matrix.rows()
    }
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.matrix.matvec(x, out);
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        self.matrix.matvec_transpose(y, out);
    }
    fn norm_estimate(&self) -> f64 {
        self.norm
    }
}
