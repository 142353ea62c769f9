//! The nonsmooth term `g`: proximal operators, projections, the smooth
//! approximation `g_β` and its gradient through the linear map.

use crate::error::{check_len, Error, Result};
use crate::linalg::{self, LinearMap};

/// Closed convex sets with an inexpensive Euclidean projection.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexSet {
    /// `{z : lo ≤ zᵢ ≤ hi}`; either bound may be infinite.
    Interval { dim: usize, lo: f64, hi: f64 },
    /// The singleton `{b}`.
    Point(Vec<f64>),
    L1Ball { dim: usize, radius: f64 },
    LinfBall { dim: usize, radius: f64 },
    /// Cartesian product of the parts, in order.
    Product(Vec<ConvexSet>),
}

impl ConvexSet {
    pub fn nonnegative_orthant(dim: usize) -> Self {
        ConvexSet::Interval {
            dim,
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ConvexSet::Interval { dim, .. }
            | ConvexSet::L1Ball { dim, .. }
            | ConvexSet::LinfBall { dim, .. } => *dim,
            ConvexSet::Point(b) => b.len(),
            ConvexSet::Product(parts) => parts.iter().map(ConvexSet::len).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Euclidean projection `Π_K(z)` written into `out`.
    pub fn project_into(&self, z: &[f64], out: &mut [f64]) {
        match self {
            ConvexSet::Interval { lo, hi, .. } => {
                for (o, v) in out.iter_mut().zip(z) {
                    *o = v.clamp(*lo, *hi);
                }
            }
            ConvexSet::Point(b) => out.copy_from_slice(b),
            ConvexSet::L1Ball { radius, .. } => project_l1_ball(z, *radius, out),
            ConvexSet::LinfBall { radius, .. } => {
                for (o, v) in out.iter_mut().zip(z) {
                    *o = v.clamp(-radius, *radius);
                }
            }
            ConvexSet::Product(parts) => {
                let mut offset = 0;
                for p in parts {
                    let len = p.len();
                    p.project_into(&z[offset..offset + len], &mut out[offset..offset + len]);
                    offset += len;
                }
            }
        }
    }

    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        self.project_into(z, &mut out);
        out
    }

    /// `dist(z, K)`
    pub fn distance(&self, z: &[f64]) -> f64 {
        linalg::distance(z, &self.project(z))
    }
}

/// Sorting-based Euclidean projection onto `{x : ‖x‖₁ ≤ r}`.
pub fn project_l1_ball(y: &[f64], radius: f64, out: &mut [f64]) {
    let l1: f64 = y.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        out.copy_from_slice(y);
        return;
    }
    if radius <= 0.0 {
        out.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let mut mags: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in mags.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - radius) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    soft_threshold_into(y, theta, out);
}

/// `sign(y) · max(|y| − t, 0)` coordinatewise.
pub fn soft_threshold_into(y: &[f64], t: f64, out: &mut [f64]) {
    for (o, v) in out.iter_mut().zip(y) {
        let m = v.abs() - t;
        *o = if m > 0.0 { m.copysign(*v) } else { 0.0 };
    }
}

/// Lipschitz-continuous regularizers with a closed-form prox.
#[derive(Clone, Debug, PartialEq)]
pub enum LipschitzFn {
    /// `g ≡ 0`
    Zero { dim: usize },
    /// `g(z) = weight · ‖z‖₁`
    L1Norm { dim: usize, weight: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum NonsmoothTerm {
    Lipschitz(LipschitzFn),
    /// Indicator function of a convex set `K` (an affine constraint `Ax ∈ K`).
    Indicator(ConvexSet),
}

impl NonsmoothTerm {
    pub fn zero(dim: usize) -> Self {
        NonsmoothTerm::Lipschitz(LipschitzFn::Zero { dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            NonsmoothTerm::Lipschitz(LipschitzFn::Zero { dim })
            | NonsmoothTerm::Lipschitz(LipschitzFn::L1Norm { dim, .. }) => *dim,
            NonsmoothTerm::Indicator(set) => set.len(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, NonsmoothTerm::Lipschitz(LipschitzFn::Zero { .. }))
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self, NonsmoothTerm::Indicator(_))
    }

    /// `L_g` for Lipschitz terms (Euclidean norm), `None` for indicators.
    pub fn lipschitz_const(&self) -> Option<f64> {
        match self {
            NonsmoothTerm::Lipschitz(LipschitzFn::Zero { .. }) => Some(0.0),
            NonsmoothTerm::Lipschitz(LipschitzFn::L1Norm { dim, weight }) => {
                Some(weight.abs() * (*dim as f64).sqrt())
            }
            NonsmoothTerm::Indicator(_) => None,
        }
    }

    /// `g(z)`; indicators evaluate to 0 inside `K` (up to `1e-12`) and `+∞` outside.
    pub fn evaluate(&self, z: &[f64]) -> f64 {
        match self {
            NonsmoothTerm::Lipschitz(LipschitzFn::Zero { .. }) => 0.0,
            NonsmoothTerm::Lipschitz(LipschitzFn::L1Norm { weight, .. }) => {
                weight * z.iter().map(|v| v.abs()).sum::<f64>()
            }
            NonsmoothTerm::Indicator(set) => {
                if set.distance(z) <= 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn prox_into(&self, beta: f64, y: &[f64], out: &mut [f64]) {
        match self {
            NonsmoothTerm::Lipschitz(LipschitzFn::Zero { .. }) => out.copy_from_slice(y),
            NonsmoothTerm::Lipschitz(LipschitzFn::L1Norm { weight, .. }) => {
                soft_threshold_into(y, beta * weight, out)
            }
            NonsmoothTerm::Indicator(set) => set.project_into(y, out),
        }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("smoothing parameter must be positive, got {beta}")))
    }
}

/// `prox_{βg}(y) = argmin_z g(z) + ‖z − y‖²/(2β)`.
pub fn prox(term: &NonsmoothTerm, beta: f64, y: &[f64]) -> Result<Vec<f64>> {
    check_beta(beta)?;
    check_len(term.dim(), y.len())?;
    let mut out = vec![0.0; y.len()];
    term.prox_into(beta, y, &mut out);
    Ok(out)
}

/// `∇ₓ g_β(Ax) = Aᵀ(Ax − prox_{βg}(Ax)) / β`.
pub fn smoothed_grad_term(
    term: &NonsmoothTerm,
    map: &dyn LinearMap,
    x: &[f64],
    beta: f64,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; map.input_len()];
    smoothed_grad_into(term, map, x, beta, &mut out)?;
    Ok(out)
}

/// Writes the smoothed gradient into `out` and returns `dist_prox = ‖Ax − prox_{βg}(Ax)‖`.
pub fn smoothed_grad_into(
    term: &NonsmoothTerm,
    map: &dyn LinearMap,
    x: &[f64],
    beta: f64,
    out: &mut [f64],
) -> Result<f64> {
    check_beta(beta)?;
    check_len(map.input_len(), x.len())?;
    check_len(term.dim(), map.output_len())?;
    check_len(map.input_len(), out.len())?;
    if term.is_zero() {
        out.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0.0);
    }
    let z = map.apply_vec(x);
    let mut residual = vec![0.0; z.len()];
    term.prox_into(beta, &z, &mut residual);
    for (r, zi) in residual.iter_mut().zip(&z) {
        *r = (zi - *r) / beta;
    }
    map.adjoint(&residual, out);
    Ok(beta * linalg::norm(&residual))
}

/// `g_β(z) = g(p) + ‖z − p‖²/(2β)` with `p = prox_{βg}(z)`.
pub fn smoothed_value(term: &NonsmoothTerm, z: &[f64], beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_len(term.dim(), z.len())?;
    let mut p = vec![0.0; z.len()];
    term.prox_into(beta, z, &mut p);
    let gap = linalg::distance(z, &p);
    let base = match term {
        NonsmoothTerm::Indicator(_) => 0.0,
        _ => term.evaluate(&p),
    };
    Ok(base + gap * gap / (2.0 * beta))
}

/// `dist(z, K)`; only defined for indicator terms.
pub fn distance_to_set(term: &NonsmoothTerm, z: &[f64]) -> Result<f64> {
    match term {
        NonsmoothTerm::Indicator(set) => {
            check_len(set.len(), z.len())?;
            Ok(set.distance(z))
        }
        NonsmoothTerm::Lipschitz(_) => Err(Error::Contract(
            "distance_to_set requires an indicator term".into(),
        )),
    }
}
