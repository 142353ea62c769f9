//! Benchmark problems: each bundles a stochastic objective, the affine map
//! `A`, the nonsmooth term `g` and the domain into a [`ProblemSpec`].

mod analytic;
mod clustering;
mod completion;
mod covariance;
mod data;

use std::fmt;
use std::sync::Arc;

pub use analytic::{analytic1d, l1_quadratic, Analytic1dParams, L1QuadraticParams};
pub use clustering::{build_clustering_sdp, distance_matrix, ClusteringOracle};
pub use completion::{build_matrix_completion, CompletionOracle, MatrixCompletion};
pub use covariance::{build_covariance_stream, CovarianceOracle, CovarianceParams};
pub use data::{
    generate_synthetic, load_movielens, load_movielens_file, parse_udata, DatasetHandle, Rating,
    SyntheticKind,
};

use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::linalg::LinearMap;
use crate::nonsmooth::{distance_to_set, NonsmoothTerm};
use crate::stochastic::StochasticOracle;

/// `min_{x ∈ X} E f(x, ω) + g(Ax)`
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub oracle: Arc<dyn StochasticOracle>,
    pub map: Arc<dyn LinearMap>,
    pub nonsmooth: NonsmoothTerm,
    pub domain: Domain,
    /// `L_f`
    pub smoothness: f64,
    pub reference_objective: Option<f64>,
    /// Closed-form minimizer, for problems that have one.
    pub known_solution: Option<KnownSolution>,
    op_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KnownSolution {
    pub x: Vec<f64>,
    /// `‖y⋆‖` of the constraint multiplier, when there is a constraint.
    pub dual_norm: Option<f64>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("len", &self.len())
            .field("map", &self.map)
            .field("nonsmooth", &self.nonsmooth)
            .field("domain", &self.domain)
            .field("smoothness", &self.smoothness)
            .field("reference_objective", &self.reference_objective)
            .finish()
    }
}

impl ProblemSpec {
    pub fn new(
        name: impl Into<String>,
        oracle: Arc<dyn StochasticOracle>,
        map: Arc<dyn LinearMap>,
        nonsmooth: NonsmoothTerm,
        domain: Domain,
        smoothness: f64,
    ) -> Result<Self> {
        domain.validate()?;
        let n = domain.len();
        if oracle.len() != n || map.input_len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if oracle.len() != n { oracle.len() } else { map.input_len() },
            });
        }
        if map.output_len() != nonsmooth.dim() {
            return Err(Error::DimensionMismatch {
                expected: map.output_len(),
                got: nonsmooth.dim(),
            });
        }
        if !(smoothness >= 0.0 && smoothness.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "smoothness constant must be finite and >= 0, got {smoothness}"
            )));
        }
        let op_norm = map.norm_estimate();
        Ok(Self {
            name: name.into(),
            oracle,
            map,
            nonsmooth,
            domain,
            smoothness,
            reference_objective: None,
            known_solution: None,
            op_norm,
        })
    }

    pub fn with_reference(mut self, value: f64) -> Self {
        self.reference_objective = Some(value);
        self
    }

    pub fn with_known_solution(mut self, x: Vec<f64>, dual_norm: Option<f64>) -> Self {
        self.known_solution = Some(KnownSolution { x, dual_norm });
        self
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `‖A‖` (or an upper estimate).
    pub fn op_norm(&self) -> f64 {
        self.op_norm
    }

    /// `E f(x)`, plus `g(Ax)` when `g` is a finite Lipschitz term.
    /// Indicator terms are reported separately through [`Self::feasibility`].
    pub fn objective(&self, x: &[f64]) -> f64 {
        let f = self.oracle.objective(x);
        if self.nonsmooth.is_indicator() || self.nonsmooth.is_zero() {
            f
        } else {
            f + self.nonsmooth.evaluate(&self.map.apply_vec(x))
        }
    }

    /// `dist(Ax, K)` for indicator terms, zero otherwise.
    pub fn feasibility(&self, x: &[f64]) -> f64 {
        if self.nonsmooth.is_indicator() {
            distance_to_set(&self.nonsmooth, &self.map.apply_vec(x)).unwrap_or(f64::INFINITY)
        } else {
            0.0
        }
    }

    /// `|objective(x) − reference|` when a reference value is attached.
    pub fn residual(&self, x: &[f64]) -> Option<f64> {
        self.reference_objective
            .map(|r| (self.objective(x) - r).abs())
    }
}
