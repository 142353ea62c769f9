use std::sync::Arc;

use super::ProblemSpec;
use crate::domains::{Domain, TraceMode};
use crate::error::{Error, Result};
use crate::linalg::{self, LinearMap, RowSums, ScaledIdentity, StackedMap};
use crate::nonsmooth::{ConvexSet, NonsmoothTerm};
use crate::stochastic::{sample_minibatch, SolverRng, StochasticOracle};

/// Pairwise squared Euclidean distances, flat row-major `n × n`.
pub fn distance_matrix(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = linalg::distance(&points[i], &points[j]).powi(2);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

/// Linear objective `⟨D, X⟩` whose gradient is estimated from the distance
/// sub-block of a random set of datapoints.
#[derive(Debug)]
pub struct ClusteringOracle {
    n: usize,
    d: Vec<f64>,
    batch: usize,
}

impl ClusteringOracle {
    pub fn distances(&self) -> &[f64] {
        &self.d
    }

    pub fn size(&self) -> usize {
        self.n
    }
}

impl StochasticOracle for ClusteringOracle {
    fn len(&self) -> usize {
        self.n * self.n
    }

    fn sample_gradient(&self, _x: &[f64], rng: &mut SolverRng, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let n = self.n;
        let b = self.batch;
        let scale = (n * (n - 1)) as f64 / (b * (b - 1)) as f64;
        let idx = sample_minibatch(n, b, rng).expect("batch validated at construction");
        for &i in &idx {
            for &j in &idx {
                if i != j {
                    out[i * n + j] = scale * self.d[i * n + j];
                }
            }
        }
    }

    fn full_gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(self.d.clone())
    }

    fn objective(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.d, x)
    }
}

/// k-means SDP: `min ⟨D, X⟩` over `X ⪰ 0, tr X = k` subject to
/// `X 1 = 1` and `X ≥ 0`.
pub fn build_clustering_sdp(
    points: &[Vec<f64>],
    num_clusters: usize,
    batch: usize,
) -> Result<ProblemSpec> {
    let n = points.len();
    if num_clusters < 1 || num_clusters > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= clusters <= points, got {num_clusters} clusters for {n} points"
        )));
    }
    if batch < 2 || batch > n {
        return Err(Error::InvalidParameter(format!(
            "clustering batch must lie in [2, {n}], got {batch}"
        )));
    }
    let parts: Vec<Arc<dyn LinearMap>> = vec![
        Arc::new(RowSums::new(n)),
        Arc::new(ScaledIdentity::new(n * n, 1.0)),
    ];
    let map = StackedMap::new(parts)?;
    let set = ConvexSet::Product(vec![
        ConvexSet::Point(vec![1.0; n]),
        ConvexSet::nonnegative_orthant(n * n),
    ]);
    ProblemSpec::new(
        "clustering",
        Arc::new(ClusteringOracle {
            n,
            d: distance_matrix(points),
            batch,
        }),
        Arc::new(map),
        NonsmoothTerm::Indicator(set),
        Domain::PsdTraceBall {
            n,
            radius: num_clusters as f64,
            mode: TraceMode::Exactly,
        },
        0.0,
    )
}
