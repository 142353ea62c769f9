//! Brute-force oracles kept independent of the iterative code paths they check,
//! plus long-run reference solutions with an on-disk cache.

mod cache;
mod solve;

pub use cache::ReferenceCache;
pub use solve::{reference_solve, ReferenceBudget, ReferenceSolution};

use crate::domains::{Atom, Domain, TraceMode};
use crate::error::{check_len, Error, Result};
use crate::linalg::{DenseMatrix, SymMatrix};

/// Largest dense matrix the Jacobi reference accepts.
pub const MAX_JACOBI_DIM: usize = 200;

/// Full eigendecomposition, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigendecomposition {
    pub values: Vec<f64>,
    /// Column `j` is the unit eigenvector for `values[j]`.
    pub vectors: DenseMatrix,
}

impl Eigendecomposition {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        (0..self.vectors.rows()).map(|i| self.vectors.get(i, j)).collect()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Cyclic Jacobi rotations on a dense symmetric matrix.
pub fn jacobi_eigen(m: &SymMatrix) -> Eigendecomposition {
    let n = m.n();
    let mut a: Vec<f64> = m.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| v[i * n + order[j]]);
    Eigendecomposition { values, vectors }
}

/// Singular values (descending) of a dense matrix through the eigenvalues of
/// the symmetric embedding `[[0, M], [Mᵀ, 0]]`.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(svd_embedding(m)?
        .values
        .iter()
        .rev()
        .take(m.rows().min(m.cols()))
        .map(|v| v.max(0.0))
        .collect())
}

fn svd_embedding(m: &DenseMatrix) -> Result<Eigendecomposition> {
    let (r, c) = (m.rows(), m.cols());
    if r + c > MAX_JACOBI_DIM {
        return Err(Error::InvalidParameter(format!(
            "dense reference limited to dimension {MAX_JACOBI_DIM}, got {}",
            r + c
        )));
    }
    let emb = SymMatrix::from_fn(r + c, |i, j| {
        // i >= j: only the lower-left block is nonzero
        if i >= r && j < r {
            m.get(j, i - r)
        } else {
            0.0
        }
    });
    Ok(jacobi_eigen(&emb))
}

/// Exact lmo by dense factorization or vertex enumeration.
pub fn exact_lmo_dense(domain: &Domain, direction: &[f64]) -> Result<(Atom, f64)> {
    check_len(domain.len(), direction.len())?;
    match domain {
        Domain::PsdTraceBall { n, radius, mode } => {
            if *n > MAX_JACOBI_DIM {
                return Err(Error::InvalidParameter(format!(
                    "dense reference limited to dimension {MAX_JACOBI_DIM}, got {n}"
                )));
            }
            let eig = jacobi_eigen(&SymMatrix::symmetric_part(*n, direction)?);
            let lambda = eig.min();
            let weight = match mode {
                TraceMode::AtMost if lambda >= 0.0 => 0.0,
                _ => *radius,
            };
            let vector = if *n > 0 { eig.vector(0) } else { vec![] };
            Ok((Atom::SpectralPsd { weight, vector }, weight * lambda))
        }
        Domain::NuclearBall { rows, cols, radius } => {
            let m = DenseMatrix::from_row_major(*rows, *cols, direction.to_vec())?;
            let eig = svd_embedding(&m)?;
            let top = eig.vector(rows + cols - 1);
            let sigma = eig.values[rows + cols - 1].max(0.0);
            let mut u = top[..*rows].to_vec();
            let mut v = top[*rows..].to_vec();
            crate::linalg::normalize(&mut u);
            crate::linalg::normalize(&mut v);
            Ok((
                Atom::SpectralRank1 {
                    weight: -radius,
                    u,
                    v,
                },
                -radius * sigma,
            ))
        }
        Domain::L1Ball { dim, radius } => {
            let mut best = (0.0, Atom::DensePoint(vec![0.0; *dim]));
            for index in 0..*dim {
                for sign in [1.0, -1.0] {
                    let value = sign * radius * direction[index];
                    if value < best.0 {
                        best = (
                            value,
                            Atom::Vertex {
                                dim: *dim,
                                index,
                                sign,
                                magnitude: *radius,
                            },
                        );
                    }
                }
            }
            Ok((best.1, best.0))
        }
        Domain::Simplex { dim, radius } => {
            let mut best: Option<(f64, usize)> = None;
            for (index, g) in direction.iter().enumerate() {
                let value = radius * g;
                if best.is_none_or(|(b, _)| value < b) {
                    best = Some((value, index));
                }
            }
            let (value, index) = best.unwrap_or((0.0, 0));
            Ok((
                Atom::Vertex {
                    dim: *dim,
                    index,
                    sign: 1.0,
                    magnitude: *radius,
                },
                value,
            ))
        }
        Domain::Box { lo, hi } => {
            let point: Vec<f64> = direction
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(g, (l, h))| if g * l <= g * h { *l } else { *h })
                .collect();
            let value = crate::linalg::dot(direction, &point);
            Ok((Atom::DensePoint(point), value))
        }
        Domain::Product(parts) => {
            let mut atoms = Vec::new();
            let mut value = 0.0;
            let mut offset = 0;
            for p in parts {
                let (a, v) = exact_lmo_dense(p, &direction[offset..offset + p.len()])?;
                offset += p.len();
                atoms.push(a);
                value += v;
            }
            Ok((Atom::Product(atoms), value))
        }
    }
}

/// Projection onto the ℓ1 ball by bisection on the soft-threshold level.
pub fn exact_projection_l1(y: &[f64], radius: f64) -> Vec<f64> {
    let l1: f64 = y.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return y.to_vec();
    }
    let excess = |theta: f64| -> f64 {
        y.iter().map(|v| (v.abs() - theta).max(0.0)).sum::<f64>() - radius
    };
    let mut lo = 0.0;
    let mut hi = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    let theta = 0.5 * (lo + hi);
    y.iter()
        .map(|v| (v.abs() - theta).max(0.0).copysign(*v))
        .collect()
}

/// Worst central-difference discrepancy `‖fd − ∇f‖_∞ / max(‖∇f‖_∞, 1e-12)`.
pub fn finite_diff_check(f: &dyn Fn(&[f64]) -> f64, grad: &[f64], point: &[f64], h: f64) -> f64 {
    let mut x = point.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..point.len() {
        let orig = x[i];
        x[i] = orig + h;
        let fp = f(&x);
        x[i] = orig - h;
        let fm = f(&x);
        x[i] = orig;
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((fd - grad[i]).abs());
    }
    let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs())).max(1e-12);
    worst / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jacobi_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [1, 2, 5, 17, 40] {
            let m = SymMatrix::random(n, &mut rng);
            let eig = jacobi_eigen(&m);
            let mut err: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let r: f64 = (0..n)
                        .map(|k| eig.vectors.get(i, k) * eig.values[k] * eig.vectors.get(j, k))
                        .sum();
                    err = err.max((r - m.get(i, j)).abs());
                }
            }
            assert!(err <= 1e-10 * m.frobenius_norm(), "n={n} err={err}");
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn singular_values_of_diagonal() {
        let m = DenseMatrix::from_row_major(2, 3, vec![2.0, 0.0, 0.0, 0.0, -5.0, 0.0]).unwrap();
        let s = singular_values(&m).unwrap();
        assert!((s[0] - 5.0).abs() < 1e-12 && (s[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bisection_projection_examples() {
        assert_eq!(exact_projection_l1(&[0.2, -0.3], 1.0), vec![0.2, -0.3]);
        let p = exact_projection_l1(&[2.0, 1.0], 1.0);
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
    }

    #[test]
    fn finite_diff_exact_for_quadratics() {
        let f = |x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>() + 3.0 * x[0];
        let point = [0.3, -1.2, 2.0];
        let grad = [0.3 + 3.0, -1.2, 2.0];
        assert!(finite_diff_check(&f, &grad, &point, 1e-4) <= 1e-9);
    }

    #[test]
    fn exact_lmo_nuclear_value_is_top_singular_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = DenseMatrix::random(6, 4, &mut rng);
        let (atom, value) = exact_lmo_dense(
            &Domain::NuclearBall {
                rows: 6,
                cols: 4,
                radius: 2.0,
            },
            m.as_slice(),
        )
        .unwrap();
        assert!((atom.inner(m.as_slice()) - value).abs() < 1e-10);
        let s = singular_values(&m).unwrap();
        assert!((value + 2.0 * s[0]).abs() < 1e-10);
    }
}
