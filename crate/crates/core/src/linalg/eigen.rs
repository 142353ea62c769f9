use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::lanczos::lanczos_extreme;
use super::{axpy, dot, norm, normalize, random_unit_vector, DenseMatrix, LinearMap, SymMatrix};

/// Which end of the spectrum to extract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extreme {
    Min,
    Max,
}

/// Iterative engine behind the extreme eigen and singular routines.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EigMethod {
    /// Restarted Lanczos with full reorthogonalization.
    #[default]
    Lanczos,
    /// Power iteration on the shifted matrix `c·I ± M`.
    ShiftedPower,
}

/// Stopping rule for the iterative eigensolvers.
///
/// A result is accepted once the eigen (or singular) residual drops below
/// `tol · ‖M‖_F`. `max_iter` bounds the number of matrix-vector products.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub method: EigMethod,
}

impl Default for EigConfig {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 500,
            seed: 0,
            method: EigMethod::Lanczos,
        }
    }
}

impl EigConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_method(self, method: EigMethod) -> Self {
        Self { method, ..self }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `‖M v − λ v‖`
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularTriplet {
    pub sigma: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `‖Mᵀ u − σ v‖`; the left residual is zero by construction.
    pub residual: f64,
    pub iterations: usize,
}

/// Iteration budget exhausted; carries the best iterate seen.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("power iteration stopped at the iteration limit without meeting the tolerance")]
pub struct NotConverged<T> {
    pub best: T,
}

/// Extreme eigenpair of a symmetric matrix.
///
/// With [`EigMethod::ShiftedPower`] the iteration runs on `c·I − M` for
/// `Min` and on `c·I + M` for `Max`, with `c = ‖M‖_F + 1` so the shifted
/// spectrum is strictly positive.
pub fn extreme_eigpair(
    m: &SymMatrix,
    which: Extreme,
    cfg: &EigConfig,
) -> Result<EigPair, NotConverged<EigPair>> {
    extreme_eigpair_from(m, which, cfg, None)
}

/// Same as [`extreme_eigpair`], optionally warm-started near `start`.
///
/// The warm start is perturbed by a small seeded random vector so that an
/// eigenvector of the wrong eigenvalue cannot trap the iteration.
pub fn extreme_eigpair_from(
    m: &SymMatrix,
    which: Extreme,
    cfg: &EigConfig,
    start: Option<&[f64]>,
) -> Result<EigPair, NotConverged<EigPair>> {
    let n = m.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut v = initial_vector(n, start, &mut rng);
    let fro = m.frobenius_norm();
    if fro == 0.0 {
        return Ok(EigPair {
            value: 0.0,
            vector: v,
            residual: 0.0,
            iterations: 0,
        });
    }
    let threshold = cfg.tol * fro;
    if cfg.method == EigMethod::Lanczos {
        let op = |x: &[f64], y: &mut [f64]| m.matvec(x, y);
        let r = lanczos_extreme(
            &op,
            v,
            which == Extreme::Max,
            &|_, res| res <= threshold,
            cfg.max_iter.max(2),
        );
        let pair = EigPair {
            value: r.value,
            vector: r.vector,
            residual: r.residual,
            iterations: r.matvecs,
        };
        return if r.converged {
            Ok(pair)
        } else {
            Err(NotConverged { best: pair })
        };
    }
    let shift = fro + 1.0;
    let sign = match which {
        Extreme::Min => -1.0,
        Extreme::Max => 1.0,
    };
    let mut mv = vec![0.0; n];
    let mut best: Option<EigPair> = None;

    for it in 1..=cfg.max_iter.max(1) {
        m.matvec(&v, &mut mv);
        let theta = dot(&v, &mv);
        let residual = residual_norm(&mv, theta, &v);
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(EigPair {
                value: theta,
                vector: v.clone(),
                residual,
                iterations: it,
            });
        }
        if residual <= threshold {
            return Ok(best.expect("recorded above"));
        }
        // v <- (c I ± M) v
        for (vi, mvi) in v.iter_mut().zip(&mv) {
            *vi = shift * *vi + sign * mvi;
        }
        if normalize(&mut v) == 0.0 {
            v = random_unit_vector(n, &mut rng);
        }
    }
    Err(NotConverged {
        best: best.expect("at least one iteration"),
    })
}

/// Leading singular triplet from an eigensolve on `MᵀM`.
pub fn top_singular_pair(
    m: &DenseMatrix,
    cfg: &EigConfig,
) -> Result<SingularTriplet, NotConverged<SingularTriplet>> {
    top_singular_pair_from(m, cfg, None)
}

pub fn top_singular_pair_from(
    m: &DenseMatrix,
    cfg: &EigConfig,
    start: Option<&[f64]>,
) -> Result<SingularTriplet, NotConverged<SingularTriplet>> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut v = initial_vector(cols, start, &mut rng);
    let fro = m.frobenius_norm();
    if fro == 0.0 {
        return Ok(SingularTriplet {
            sigma: 0.0,
            u: random_unit_vector(rows, &mut rng),
            v,
            residual: 0.0,
            iterations: 0,
        });
    }
    let threshold = cfg.tol * fro;
    let mut u = vec![0.0; rows];
    let mut z = vec![0.0; cols];
    if cfg.method == EigMethod::Lanczos {
        let op = |x: &[f64], y: &mut [f64]| {
            let mut t = vec![0.0; rows];
            m.matvec(x, &mut t);
            m.matvec_transpose(&t, y);
        };
        // ‖Mᵀu − σv‖ = ‖MᵀMv − σ²v‖ / σ with u = Mv / σ
        let accept = |lambda: f64, res: f64| res <= threshold * lambda.max(0.0).sqrt();
        let r = lanczos_extreme(&op, v, true, &accept, cfg.max_iter.max(2));
        v = r.vector;
        m.matvec(&v, &mut u);
        let sigma = normalize(&mut u);
        if sigma > 0.0 {
            m.matvec_transpose(&u, &mut z);
            let residual = residual_norm(&z, sigma, &v);
            let t = SingularTriplet {
                sigma,
                u,
                v,
                residual,
                iterations: r.matvecs,
            };
            return if residual <= threshold {
                Ok(t)
            } else {
                Err(NotConverged { best: t })
            };
        }
        v = random_unit_vector(cols, &mut rng);
    }
    let mut best: Option<SingularTriplet> = None;

    for it in 1..=cfg.max_iter.max(1) {
        m.matvec(&v, &mut u);
        let sigma = normalize(&mut u);
        if sigma == 0.0 {
            // v landed in the null space; restart from a fresh direction.
            v = random_unit_vector(cols, &mut rng);
            continue;
        }
        m.matvec_transpose(&u, &mut z);
        let residual = residual_norm(&z, sigma, &v);
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(SingularTriplet {
                sigma,
                u: u.clone(),
                v: v.clone(),
                residual,
                iterations: it,
            });
        }
        if residual <= threshold {
            return Ok(best.expect("recorded above"));
        }
        v.copy_from_slice(&z);
        normalize(&mut v);
    }
    match best {
        Some(best) => Err(NotConverged { best }),
        None => Err(NotConverged {
            best: SingularTriplet {
                sigma: 0.0,
                u: random_unit_vector(rows, &mut rng),
                v,
                residual: f64::INFINITY,
                iterations: cfg.max_iter,
            },
        }),
    }
}

/// Power-iteration estimate of `‖A‖` from `probes` steps on `AᵀA`.
///
/// Returns the largest `‖A x‖` seen over the unit iterates, so the value is
/// always a lower bound on the true norm that tightens with more probes.
pub fn operator_norm_estimate(map: &dyn LinearMap, probes: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = random_unit_vector(map.input_len(), &mut rng);
    let mut y = vec![0.0; map.output_len()];
    let mut best: f64 = 0.0;
    for _ in 0..probes.max(1) {
        map.apply(&x, &mut y);
        best = best.max(norm(&y));
        map.adjoint(&y, &mut x);
        if normalize(&mut x) == 0.0 {
            break;
        }
    }
    best
}

fn initial_vector(n: usize, start: Option<&[f64]>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match start {
        Some(s) if s.len() == n && norm(s) > 0.0 => {
            let mut v = s.to_vec();
            normalize(&mut v);
            let noise: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            axpy(1e-3 / (n as f64).sqrt(), &noise, &mut v);
            normalize(&mut v);
            v
        }
        _ => random_unit_vector(n, rng),
    }
}

fn residual_norm(mv: &[f64], theta: f64, v: &[f64]) -> f64 {
    mv.iter()
        .zip(v)
        .map(|(a, b)| {
            let r = a - theta * b;
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ScaledIdentity;

    #[test]
    fn diagonal_min_eigenpair() {
        let m = SymMatrix::from_diag(&[3.0, -1.0]);
        let p = extreme_eigpair(&m, Extreme::Min, &EigConfig::default()).unwrap();
        assert!((p.value + 1.0).abs() < 1e-12);
        assert!(p.vector[0].abs() < 1e-7);
        assert!((p.vector[1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_max_eigenpair() {
        let m = SymMatrix::from_diag(&[3.0, -1.0, 0.5]);
        let p = extreme_eigpair(&m, Extreme::Max, &EigConfig::default()).unwrap();
        assert!((p.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_returns_start_vector() {
        let m = SymMatrix::zeros(2);
        let p = extreme_eigpair(&m, Extreme::Min, &EigConfig::default()).unwrap();
        assert_eq!(p.value, 0.0);
        assert_eq!(p.residual, 0.0);
        assert!((norm(&p.vector) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reports_non_convergence_with_best_residual() {
        let m = SymMatrix::from_diag(&[1.0, 1.0 + 1e-9, 5.0, -3.0, -3.0 + 1e-6]);
        for method in [EigMethod::Lanczos, EigMethod::ShiftedPower] {
            let cfg = EigConfig {
                tol: 1e-15,
                max_iter: 3,
                seed: 4,
                method,
            };
            let err = extreme_eigpair(&m, Extreme::Min, &cfg).unwrap_err();
            assert!(err.best.residual.is_finite());
            assert!(err.best.iterations <= 3);
        }
    }

    #[test]
    fn engines_agree_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in [1, 2, 7, 40, 90] {
            let m = SymMatrix::random(n, &mut rng);
            for which in [Extreme::Min, Extreme::Max] {
                let cfg = EigConfig {
                    tol: 1e-10,
                    max_iter: 20_000,
                    ..EigConfig::default()
                };
                let a = extreme_eigpair(&m, which, &cfg).unwrap();
                let b = extreme_eigpair(&m, which, &cfg.with_method(EigMethod::ShiftedPower)).unwrap();
                assert!((a.value - b.value).abs() < 1e-8 * m.frobenius_norm(), "{n} {which:?}");
            }
            let d = DenseMatrix::from_fn(n, n + 3, |_, _| rng.random_range(-1.0..1.0));
            let cfg = EigConfig {
                tol: 1e-10,
                max_iter: 20_000,
                ..EigConfig::default()
            };
            let a = top_singular_pair(&d, &cfg).unwrap();
            let b = top_singular_pair(&d, &cfg.with_method(EigMethod::ShiftedPower)).unwrap();
            assert!((a.sigma - b.sigma).abs() < 1e-8 * d.frobenius_norm());
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let m = SymMatrix::random(12, &mut rng);
        let cfg = EigConfig::default().with_seed(5);
        let a = extreme_eigpair(&m, Extreme::Min, &cfg);
        let b = extreme_eigpair(&m, Extreme::Min, &cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn diagonal_singular_pair() {
        let m = DenseMatrix::from_row_major(2, 2, vec![2.0, 0.0, 0.0, 5.0]).unwrap();
        let t = top_singular_pair(&m, &EigConfig::default()).unwrap();
        assert!((t.sigma - 5.0).abs() < 1e-12);
        assert!((t.u[1].abs() - 1.0).abs() < 1e-12);
        assert!((t.v[1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_singular_pair() {
        let a = [1.0, -2.0, 0.5];
        let b = [3.0, 1.0];
        let m = DenseMatrix::from_fn(3, 2, |i, j| a[i] * b[j]);
        let t = top_singular_pair(&m, &EigConfig::default()).unwrap();
        assert!((t.sigma - norm(&a) * norm(&b)).abs() < 1e-12);
        let cos_u = dot(&t.u, &a) / norm(&a);
        let cos_v = dot(&t.v, &b) / norm(&b);
        assert!((cos_u.abs() - 1.0).abs() < 1e-12);
        assert!((cos_v.abs() - 1.0).abs() < 1e-12);
        // σ u vᵀ reproduces M, so the two signs agree.
        assert!(cos_u * cos_v > 0.0);
    }

    #[test]
    fn identity_norms() {
        let id = ScaledIdentity::new(5, 1.0);
        assert!((operator_norm_estimate(&id, 3, 1) - 1.0).abs() < 1e-10);
        let two = ScaledIdentity::new(5, 2.0);
        assert!((operator_norm_estimate(&two, 3, 1) - 2.0).abs() < 1e-10);
    }
}
