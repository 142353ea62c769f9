use std::sync::Arc;

use super::{ProblemSpec, Rating};
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::linalg::ScaledIdentity;
use crate::nonsmooth::{ConvexSet, NonsmoothTerm};
use crate::stochastic::{sample_minibatch, SolverRng, StochasticOracle};

/// Finite-sum least squares over the observed entries.
#[derive(Debug)]
pub struct CompletionOracle {
    rows: usize,
    cols: usize,
    observed: Vec<Rating>,
    batch: usize,
}

impl StochasticOracle for CompletionOracle {
    fn len(&self) -> usize {
        self.rows * self.cols
    }

    fn sample_gradient(&self, x: &[f64], rng: &mut SolverRng, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let scale = self.observed.len() as f64 / self.batch as f64;
        let idx = sample_minibatch(self.observed.len(), self.batch, rng)
            .expect("batch validated at construction");
        for i in idx {
            let r = &self.observed[i];
            let p = r.row * self.cols + r.col;
            out[p] += 2.0 * scale * (x[p] - r.value);
        }
    }

    fn full_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut g = vec![0.0; self.len()];
        for r in &self.observed {
            let p = r.row * self.cols + r.col;
            g[p] += 2.0 * (x[p] - r.value);
        }
        Some(g)
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.observed
            .iter()
            .map(|r| (x[r.row * self.cols + r.col] - r.value).powi(2))
            .sum()
    }
}

/// A completion problem together with its held-out ratings.
#[derive(Clone, Debug)]
pub struct MatrixCompletion {
    pub spec: ProblemSpec,
    pub rows: usize,
    pub cols: usize,
    pub train: Vec<Rating>,
    pub test: Vec<Rating>,
}

fn rmse(x: &[f64], cols: usize, ratings: &[Rating]) -> f64 {
    if ratings.is_empty() {
        return f64::NAN;
    }
    let sq: f64 = ratings
        .iter()
        .map(|r| (x[r.row * cols + r.col] - r.value).powi(2))
        .sum();
    (sq / ratings.len() as f64).sqrt()
}

impl MatrixCompletion {
    pub fn train_rmse(&self, x: &[f64]) -> f64 {
        rmse(x, self.cols, &self.train)
    }

    pub fn test_rmse(&self, x: &[f64]) -> f64 {
        rmse(x, self.cols, &self.test)
    }
}

/// `min Σ_Ω (X_ij − Y_ij)²` over `‖X‖_* ≤ β₁` subject to `lo ≤ X ≤ hi` entrywise.
#[allow(clippy::too_many_arguments)]
pub fn build_matrix_completion(
    rows: usize,
    cols: usize,
    train: Vec<Rating>,
    test: Vec<Rating>,
    nuclear_bound: f64,
    lo: f64,
    hi: f64,
    batch: usize,
) -> Result<MatrixCompletion> {
    if train.is_empty() {
        return Err(Error::InvalidParameter("empty training set".into()));
    }
    if batch == 0 || batch > train.len() {
        return Err(Error::InvalidParameter(format!(
            "batch {batch} outside [1, {}]",
            train.len()
        )));
    }
    if lo > hi {
        return Err(Error::InvalidParameter(format!("empty rating range [{lo}, {hi}]")));
    }
    for r in train.iter().chain(&test) {
        if r.row >= rows || r.col >= cols {
            return Err(Error::InvalidParameter(format!(
                "rating at ({}, {}) outside {rows}x{cols}",
                r.row, r.col
            )));
        }
        if !(r.value >= lo && r.value <= hi) {
            return Err(Error::InvalidParameter(format!(
                "rating {} outside [{lo}, {hi}]",
                r.value
            )));
        }
    }
    let len = rows * cols;
    let spec = ProblemSpec::new(
        "completion",
        Arc::new(CompletionOracle {
            rows,
            cols,
            observed: train.clone(),
            batch,
        }),
        Arc::new(ScaledIdentity::new(len, 1.0)),
        NonsmoothTerm::Indicator(ConvexSet::Interval { dim: len, lo, hi }),
        Domain::NuclearBall {
            rows,
            cols,
            radius: nuclear_bound,
        },
        2.0,
    )?;
    Ok(MatrixCompletion {
        spec,
        rows,
        cols,
        train,
        test,
    })
}
