use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};

use super::ProblemSpec;
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::linalg::ScaledIdentity;
use crate::nonsmooth::{ConvexSet, LipschitzFn, NonsmoothTerm};
use crate::stochastic::{SolverRng, StochasticOracle};

/// Scalar problem `min_{x∈[0,1]} E(x − ω)²` subject to `x ≤ cap`, with
/// `ω = target + noise·N(0,1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Analytic1dParams {
    pub target: f64,
    pub cap: f64,
    pub noise: f64,
}

impl Default for Analytic1dParams {
    fn default() -> Self {
        Self {
            target: 0.6,
            cap: 0.5,
            noise: 0.0,
        }
    }
}

impl Analytic1dParams {
    pub fn x_star(&self) -> f64 {
        self.target.min(self.cap).clamp(0.0, 1.0)
    }

    pub fn f_star(&self) -> f64 {
        (self.x_star() - self.target).powi(2) + self.noise * self.noise
    }

    /// Multiplier of the active constraint `x ≤ cap`: `|f'(x*)|`.
    pub fn dual_norm(&self) -> f64 {
        if self.target > self.cap {
            2.0 * (self.target - self.x_star())
        } else {
            0.0
        }
    }
}

#[derive(Debug)]
struct ScalarQuadratic {
    params: Analytic1dParams,
}

impl StochasticOracle for ScalarQuadratic {
    fn len(&self) -> usize {
        1
    }

    fn sample_gradient(&self, x: &[f64], rng: &mut SolverRng, out: &mut [f64]) {
        let omega = if self.params.noise > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            self.params.target + self.params.noise * z
        } else {
            self.params.target
        };
        out[0] = 2.0 * (x[0] - omega);
    }

    fn full_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![2.0 * (x[0] - self.params.target)])
    }

    fn objective(&self, x: &[f64]) -> f64 {
        (x[0] - self.params.target).powi(2) + self.params.noise.powi(2)
    }

    fn variance_bound(&self) -> Option<f64> {
        Some(4.0 * self.params.noise.powi(2))
    }
}

pub fn analytic1d(params: Analytic1dParams) -> Result<ProblemSpec> {
    if !(params.noise >= 0.0) || !params.target.is_finite() || !params.cap.is_finite() {
        return Err(Error::InvalidParameter(format!("invalid 1-d parameters {params:?}")));
    }
    let spec = ProblemSpec::new(
        "analytic1d",
        Arc::new(ScalarQuadratic { params }),
        Arc::new(ScaledIdentity::new(1, 1.0)),
        NonsmoothTerm::Indicator(ConvexSet::Interval {
            dim: 1,
            lo: f64::NEG_INFINITY,
            hi: params.cap,
        }),
        Domain::uniform_box(1, 0.0, 1.0),
        2.0,
    )?;
    Ok(spec
        .with_reference(params.f_star())
        .with_known_solution(vec![params.x_star()], Some(params.dual_norm())))
}

/// `min_{x∈[−1,1]^d} E ½‖x − (b + ξ)‖² + λ‖x‖₁` with `ξ ~ N(0, noise² I)`.
#[derive(Clone, Debug, PartialEq)]
pub struct L1QuadraticParams {
    pub center: Vec<f64>,
    pub weight: f64,
    pub noise: f64,
}

impl L1QuadraticParams {
    /// `clip(soft(b, λ), −1, 1)`, exact because the objective is separable.
    pub fn x_star(&self) -> Vec<f64> {
        self.center
            .iter()
            .map(|b| (b.abs() - self.weight).max(0.0).copysign(*b).clamp(-1.0, 1.0))
            .collect()
    }

    pub fn f_star(&self) -> f64 {
        let x = self.x_star();
        let smooth: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(xi, bi)| 0.5 * (xi - bi).powi(2))
            .sum();
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        smooth + self.weight * l1 + 0.5 * self.center.len() as f64 * self.noise.powi(2)
    }
}

#[derive(Debug)]
struct NoisyQuadratic {
    params: L1QuadraticParams,
}

impl StochasticOracle for NoisyQuadratic {
    fn len(&self) -> usize {
        self.params.center.len()
    }

    fn sample_gradient(&self, x: &[f64], rng: &mut SolverRng, out: &mut [f64]) {
        for ((o, xi), bi) in out.iter_mut().zip(x).zip(&self.params.center) {
            let xi_noise: f64 = StandardNormal.sample(rng);
            *o = xi - bi - self.params.noise * xi_noise;
        }
    }

    fn full_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.iter().zip(&self.params.center).map(|(a, b)| a - b).collect())
    }

    fn objective(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.params.center)
            .map(|(a, b)| 0.5 * (a - b).powi(2))
            .sum::<f64>()
            + 0.5 * x.len() as f64 * self.params.noise.powi(2)
    }

    fn variance_bound(&self) -> Option<f64> {
        Some(self.params.center.len() as f64 * self.params.noise.powi(2))
    }
}

pub fn l1_quadratic(params: L1QuadraticParams) -> Result<ProblemSpec> {
    let d = params.center.len();
    if d == 0 || !(params.weight >= 0.0) || !(params.noise >= 0.0) {
        return Err(Error::InvalidParameter(
            "l1 quadratic needs a nonempty center and nonnegative weight and noise".into(),
        ));
    }
    let reference = params.f_star();
    let x_star = params.x_star();
    let weight = params.weight;
    let spec = ProblemSpec::new(
        "l1_quadratic",
        Arc::new(NoisyQuadratic { params }),
        Arc::new(ScaledIdentity::new(d, 1.0)),
        NonsmoothTerm::Lipschitz(LipschitzFn::L1Norm { dim: d, weight }),
        Domain::uniform_box(d, -1.0, 1.0),
        1.0,
    )?;
    Ok(spec.with_reference(reference).with_known_solution(x_star, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_optimum() {
        let p = Analytic1dParams::default();
        assert_eq!(p.x_star(), 0.5);
        assert!((p.f_star() - 0.01).abs() < 1e-15);
        assert!((p.dual_norm() - 0.2).abs() < 1e-15);
        let spec = analytic1d(p).unwrap();
        assert_eq!(spec.feasibility(&[0.7]), 0.7 - 0.5);
        assert_eq!(spec.feasibility(&[0.2]), 0.0);
    }

    #[test]
    fn l1_quadratic_optimum_is_stationary() {
        let p = L1QuadraticParams {
            center: vec![0.8, -0.5, 1.6],
            weight: 0.2,
            noise: 0.0,
        };
        let x = p.x_star();
        assert_eq!(x.len(), 3);
        assert!((x[0] - 0.6).abs() < 1e-15 && (x[1] + 0.3).abs() < 1e-15 && x[2] == 1.0);
        let spec = l1_quadratic(p.clone()).unwrap();
        assert!((spec.objective(&x) - p.f_star()).abs() < 1e-15);
        // small perturbations cannot decrease the objective
        for i in 0..3 {
            for h in [1e-4, -1e-4] {
                let mut y = x.clone();
                y[i] = (y[i] + h).clamp(-1.0, 1.0);
                assert!(spec.objective(&y) >= p.f_star() - 1e-15);
            }
        }
    }
}
