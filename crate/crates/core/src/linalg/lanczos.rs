//! Explicitly restarted Lanczos with full reorthogonalization, used as an
//! accelerated alternative to the shifted power iteration.

use super::{axpy, dot, normalize};

/// Krylov dimension before a restart.
const MAX_BASIS: usize = 32;

pub(crate) struct LanczosResult {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub matvecs: usize,
    pub converged: bool,
}

/// Extreme (`largest == true` for max) eigenpair of the symmetric operator
/// `op`, starting from the unit vector `start`. Stops once
/// `accept(θ, ‖A x − θ x‖)` holds for the Ritz pair or after `max_matvecs`
/// products.
pub(crate) fn lanczos_extreme(
    op: &dyn Fn(&[f64], &mut [f64]),
    start: Vec<f64>,
    largest: bool,
    accept: &dyn Fn(f64, f64) -> bool,
    max_matvecs: usize,
) -> LanczosResult {
    let n = start.len();
    let m_max = MAX_BASIS.min(n).max(1);
    let mut v = start;
    let mut matvecs = 0;
    let mut w = vec![0.0; n];
    let mut best: Option<LanczosResult> = None;

    loop {
        let mut basis: Vec<Vec<f64>> = vec![v.clone()];
        let mut alpha: Vec<f64> = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        let mut ritz = (0.0, vec![1.0]);
        for j in 0..m_max {
            op(&basis[j], &mut w);
            matvecs += 1;
            let a = dot(&basis[j], &w);
            alpha.push(a);
            // two passes of classical Gram-Schmidt keep the basis orthogonal
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    axpy(-c, q, &mut w);
                }
            }
            let b = normalize(&mut w);
            let breakdown = b <= 1e-14 * a.abs().max(1.0);
            if j + 1 == m_max || j % 4 == 3 || breakdown || matvecs + 1 >= max_matvecs {
                let (theta, y) = tridiagonal_extreme(&alpha, &beta, largest);
                let estimate = b * y.last().copied().unwrap_or(0.0).abs();
                ritz = (theta, y);
                if accept(theta, 2.0 * estimate) || breakdown || matvecs + 1 >= max_matvecs {
                    break;
                }
            }
            if j + 1 < m_max {
                beta.push(b);
                basis.push(w.clone());
            }
        }
        let (_, y) = ritz;
        let mut x = vec![0.0; n];
        for (q, c) in basis.iter().zip(&y) {
            axpy(*c, q, &mut x);
        }
        normalize(&mut x);
        op(&x, &mut w);
        matvecs += 1;
        let theta = dot(&x, &w);
        let residual = w
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - theta * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let converged = accept(theta, residual);
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(LanczosResult {
                value: theta,
                vector: x.clone(),
                residual,
                matvecs,
                converged,
            });
        }
        if converged || matvecs >= max_matvecs {
            let mut out = best.expect("recorded above");
            out.matvecs = matvecs;
            return out;
        }
        v = x;
    }
}

/// Extreme eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta` (`beta.len() + 1 == alpha.len()`).
fn tridiagonal_extreme(alpha: &[f64], beta: &[f64], largest: bool) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let mut d = alpha.to_vec();
    let mut e: Vec<f64> = beta.iter().copied().chain(std::iter::once(0.0)).collect();
    e.truncate(m);
    let mut z = vec![0.0; m * m];
    for i in 0..m {
        z[i * m + i] = 1.0;
    }
    tql2(&mut d, &mut e, &mut z, m);
    let pick = (0..m)
        .max_by(|&i, &j| {
            if largest {
                d[i].total_cmp(&d[j])
            } else {
                d[j].total_cmp(&d[i])
            }
        })
        .unwrap_or(0);
    let y = (0..m).map(|r| z[r * m + pick]).collect();
    (d[pick], y)
}

/// Implicit QL iterations on a symmetric tridiagonal matrix. On return `d`
/// holds the eigenvalues and column `k` of `z` (row-major `m × m`) the
/// eigenvector of `d[k]`.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [f64], m: usize) {
    for l in 0..m {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm + 1 < m {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = mm;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..m {
                    let zk1 = z[k * m + i + 1];
                    let zk = z[k * m + i];
                    z[k * m + i + 1] = s * zk + c * zk1;
                    z[k * m + i] = c * zk - s * zk1;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }
}
