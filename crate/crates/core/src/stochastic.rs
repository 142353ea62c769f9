//! Stochastic first-order oracles and the averaged gradient estimator.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};

/// Random stream handed to oracles. One stream per solver run, re-keyed per
/// iteration so a run is reproducible from its seed alone.
pub type SolverRng = ChaCha8Rng;

/// The generator used at iteration `k` of a run seeded with `seed`.
pub fn iteration_rng(seed: u64, k: u64) -> SolverRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Stochastic first-order oracle for `E_ω f(x, ω)`.
pub trait StochasticOracle: Send + Sync {
    /// Length of the flat decision variable.
    fn len(&self) -> usize;

    /// Writes an unbiased estimate of `∇ E f(x, ω)` into `out`.
    fn sample_gradient(&self, x: &[f64], rng: &mut SolverRng, out: &mut [f64]);

    /// Exact gradient of the expected objective, when it is computable.
    fn full_gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Exact expected objective `E f(x, ω)` used for traces.
    fn objective(&self, x: &[f64]) -> f64;

    /// `σ²` of the bounded-variance assumption, when known.
    fn variance_bound(&self) -> Option<f64> {
        None
    }

    fn has_full_gradient(&self) -> bool {
        self.full_gradient(&vec![0.0; self.len()]).is_some()
    }
}

/// Averaged gradient `d_k = (1 − ρ_k) d_{k−1} + ρ_k g_k` with `d_0 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorState {
    pub d: Vec<f64>,
    pub k: usize,
}

impl EstimatorState {
    pub fn new(len: usize) -> Self {
        Self {
            d: vec![0.0; len],
            k: 0,
        }
    }

    /// Applies one averaging step in the form `d += ρ (g − d)`, so that a
    /// sample equal to the current average leaves `d` bit-for-bit unchanged.
    pub fn update(&mut self, grad_sample: &[f64], rho: f64) -> Result<()> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::Contract(format!("averaging weight {rho} outside (0, 1]")));
        }
        check_len(self.d.len(), grad_sample.len())?;
        for (d, g) in self.d.iter_mut().zip(grad_sample) {
            *d += rho * (g - *d);
        }
        self.k += 1;
        Ok(())
    }
}

pub fn update_estimator(
    mut state: EstimatorState,
    grad_sample: &[f64],
    rho: f64,
) -> Result<EstimatorState> {
    state.update(grad_sample, rho)?;
    Ok(state)
}

/// Uniform sample of `batch` distinct indices from `0..population`.
pub fn sample_minibatch(population: usize, batch: usize, rng: &mut SolverRng) -> Result<Vec<usize>> {
    if batch == 0 || batch > population {
        return Err(Error::InvalidParameter(format!(
            "batch size {batch} outside [1, {population}]"
        )));
    }
    Ok(index::sample(rng, population, batch).into_vec())
}

/// Mean and per-coordinate standard error of `draws` gradient samples at `x`.
pub fn empirical_gradient_moments(
    oracle: &dyn StochasticOracle,
    x: &[f64],
    draws: usize,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let len = oracle.len();
    let mut sum = vec![0.0; len];
    let mut sum_sq = vec![0.0; len];
    let mut g = vec![0.0; len];
    for k in 0..draws {
        let mut rng = iteration_rng(seed, k as u64);
        oracle.sample_gradient(x, &mut rng, &mut g);
        for ((s, q), v) in sum.iter_mut().zip(sum_sq.iter_mut()).zip(&g) {
            *s += v;
            *q += v * v;
        }
    }
    let m = draws as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let stderr = sum_sq
        .iter()
        .zip(&mean)
        .map(|(q, mu)| ((q / m - mu * mu).max(0.0) / m).sqrt())
        .collect();
    (mean, stderr)
}
