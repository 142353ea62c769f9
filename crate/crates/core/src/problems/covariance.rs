use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ProblemSpec;
use crate::domains::{Domain, TraceMode};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, ScaledIdentity, SymMatrix};
use crate::nonsmooth::{ConvexSet, NonsmoothTerm};
use crate::stochastic::{SolverRng, StochasticOracle};

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceParams {
    /// Trace bound `β₁`; `None` uses `tr Σ`.
    pub trace_bound: Option<f64>,
    /// Entrywise ℓ1 bound `β₂`; `None` uses `‖Σ‖₁`.
    pub l1_bound: Option<f64>,
    pub batch: usize,
    /// Replace the stream by a fixed sample of this many datapoints, drawn
    /// once from `sample_seed`. The population objective is still reported.
    pub fixed_samples: Option<usize>,
    pub sample_seed: u64,
}

impl Default for CovarianceParams {
    fn default() -> Self {
        Self {
            trace_bound: None,
            l1_bound: None,
            batch: 1,
            fixed_samples: None,
            sample_seed: 0,
        }
    }
}

/// `E‖X − ωωᵀ‖²_F` with `ω = F z`, `z ~ N(0, I)`, `Σ = F Fᵀ`.
#[derive(Debug)]
pub struct CovarianceOracle {
    n: usize,
    factor: DenseMatrix,
    sigma: SymMatrix,
    /// `(tr Σ)² + ‖Σ‖²_F`, the population objective at `X = Σ`.
    floor: f64,
    batch: usize,
    /// Empirical covariance of a fixed sample, if the stream is frozen.
    fixed: Option<SymMatrix>,
}

impl CovarianceOracle {
    pub fn sigma(&self) -> &SymMatrix {
        &self.sigma
    }

    fn draw(&self, rng: &mut impl rand::Rng, omega: &mut [f64], z: &mut [f64]) {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(rng);
        }
        self.factor.matvec(z, omega);
    }
}

impl StochasticOracle for CovarianceOracle {
    fn len(&self) -> usize {
        self.n * self.n
    }

    fn sample_gradient(&self, x: &[f64], rng: &mut SolverRng, out: &mut [f64]) {
        for (o, xi) in out.iter_mut().zip(x) {
            *o = 2.0 * xi;
        }
        if let Some(s) = &self.fixed {
            for (o, si) in out.iter_mut().zip(s.as_slice()) {
                *o -= 2.0 * si;
            }
            return;
        }
        let mut omega = vec![0.0; self.n];
        let mut z = vec![0.0; self.factor.cols()];
        let w = -2.0 / self.batch as f64;
        for _ in 0..self.batch {
            self.draw(rng, &mut omega, &mut z);
            crate::linalg::rank_one_update(out, self.n, w, &omega);
        }
    }

    fn full_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let target = self.fixed.as_ref().unwrap_or(&self.sigma);
        Some(
            x.iter()
                .zip(target.as_slice())
                .map(|(a, b)| 2.0 * (a - b))
                .collect(),
        )
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let dev: f64 = x
            .iter()
            .zip(self.sigma.as_slice())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        dev + self.floor
    }

    fn variance_bound(&self) -> Option<f64> {
        match self.fixed {
            Some(_) => Some(0.0),
            None => Some(4.0 * self.floor / self.batch as f64),
        }
    }
}

/// Online sparse covariance estimation over `{X ⪰ 0, tr X ≤ β₁}` with the
/// constraint `‖X‖₁ ≤ β₂`. `factor` is `F` with `Σ = F Fᵀ`.
pub fn build_covariance_stream(factor: DenseMatrix, params: &CovarianceParams) -> Result<ProblemSpec> {
    let n = factor.rows();
    if n == 0 || params.batch == 0 {
        return Err(Error::InvalidParameter(
            "covariance problem needs n >= 1 and batch >= 1".into(),
        ));
    }
    let sigma = SymMatrix::from_fn(n, |i, j| {
        (0..factor.cols())
            .map(|c| factor.get(i, c) * factor.get(j, c))
            .sum()
    });
    let tr = sigma.trace();
    let fro = sigma.frobenius_norm();
    let l1: f64 = sigma.as_slice().iter().map(|v| v.abs()).sum();
    let trace_bound = params.trace_bound.unwrap_or(tr);
    let l1_bound = params.l1_bound.unwrap_or(l1);
    if !(trace_bound > 0.0) || !(l1_bound > 0.0) {
        return Err(Error::InvalidParameter("covariance bounds must be positive".into()));
    }
    let mut oracle = CovarianceOracle {
        n,
        factor,
        sigma,
        floor: tr * tr + fro * fro,
        batch: params.batch,
        fixed: None,
    };
    let reference = (trace_bound >= tr && l1_bound >= l1).then_some(oracle.floor);
    let name = if let Some(m) = params.fixed_samples {
        if m == 0 {
            return Err(Error::InvalidParameter("fixed sample must be nonempty".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(params.sample_seed);
        let mut s = SymMatrix::zeros(n);
        let mut omega = vec![0.0; n];
        let mut z = vec![0.0; oracle.factor.cols()];
        for _ in 0..m {
            oracle.draw(&mut rng, &mut omega, &mut z);
            s.add_rank_one(1.0 / m as f64, &omega);
        }
        oracle.fixed = Some(s);
        format!("covariance_fixed{m}")
    } else {
        "covariance".to_string()
    };
    let spec = ProblemSpec::new(
        name,
        Arc::new(oracle),
        Arc::new(ScaledIdentity::new(n * n, 1.0)),
        NonsmoothTerm::Indicator(ConvexSet::L1Ball {
            dim: n * n,
            radius: l1_bound,
        }),
        Domain::PsdTraceBall {
            n,
            radius: trace_bound,
            mode: TraceMode::AtMost,
        },
        2.0,
    )?;
    Ok(match reference {
        Some(r) => spec.with_reference(r),
        None => spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_factor() -> DenseMatrix {
        DenseMatrix::from_row_major(3, 2, vec![1.0, 0.0, -0.5, 0.0, 0.0, 0.7]).unwrap()
    }

    #[test]
    fn sigma_is_stationary() {
        let spec = build_covariance_stream(small_factor(), &CovarianceParams::default()).unwrap();
        let sigma = SymMatrix::from_fn(3, |i, j| {
            let f = small_factor();
            f.get(i, 0) * f.get(j, 0) + f.get(i, 1) * f.get(j, 1)
        });
        let g = spec.oracle.full_gradient(sigma.as_slice()).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-15));
        assert_eq!(spec.residual(sigma.as_slice()), Some(0.0));
        assert_eq!(spec.feasibility(sigma.as_slice()), 0.0);
    }

    #[test]
    fn fixed_sample_gradient_is_deterministic() {
        let params = CovarianceParams {
            fixed_samples: Some(4),
            ..Default::default()
        };
        let spec = build_covariance_stream(small_factor(), &params).unwrap();
        let x = vec![0.1; 9];
        let mut a = vec![0.0; 9];
        spec.oracle
            .sample_gradient(&x, &mut crate::stochastic::iteration_rng(1, 1), &mut a);
        assert_eq!(a, spec.oracle.full_gradient(&x).unwrap());
    }
}
