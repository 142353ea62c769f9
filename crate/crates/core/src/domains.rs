//! Feasible sets with their linear minimization oracles.
//!
//! Matrix-valued domains use flat row-major storage. [`lmo`] returns a
//! structured [`Atom`]; [`cgm_step`] takes the convex combination with the
//! current iterate without ever projecting.

use crate::error::{check_len, Error, Result};
use crate::linalg::{
    self, extreme_eigpair_from, rank_one_update, top_singular_pair_from, DenseMatrix, EigConfig,
    Extreme, SymMatrix,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceMode {
    /// `tr(X) ≤ β`
    AtMost,
    /// `tr(X) = β`
    Exactly,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// `{X ∈ S₊ⁿ : tr(X) ≤ β}` or `{X ∈ S₊ⁿ : tr(X) = β}`
    PsdTraceBall {
        n: usize,
        radius: f64,
        mode: TraceMode,
    },
    /// `{X ∈ R^{rows×cols} : ‖X‖_* ≤ β}`
    NuclearBall {
        rows: usize,
        cols: usize,
        radius: f64,
    },
    L1Ball {
        dim: usize,
        radius: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// `{x ≥ 0 : Σ xᵢ = r}`
    Simplex {
        dim: usize,
        radius: f64,
    },
    /// Cartesian product; the variable is the concatenation of the parts.
    Product(Vec<Domain>),
}

impl Domain {
    pub fn uniform_box(dim: usize, lo: f64, hi: f64) -> Self {
        Domain::Box {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    /// Length of the flat decision variable.
    pub fn len(&self) -> usize {
        match self {
            Domain::PsdTraceBall { n, .. } => n * n,
            Domain::NuclearBall { rows, cols, .. } => rows * cols,
            Domain::L1Ball { dim, .. } | Domain::Simplex { dim, .. } => *dim,
            Domain::Box { lo, .. } => lo.len(),
            Domain::Product(parts) => parts.iter().map(Domain::len).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |r: f64, what: &str| {
            if r.is_finite() && r >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be finite and nonnegative, got {r}")))
            }
        };
        match self {
            Domain::PsdTraceBall { radius, .. } => positive(*radius, "trace bound"),
            Domain::NuclearBall { radius, .. } => positive(*radius, "nuclear-norm bound"),
            Domain::L1Ball { radius, .. } => positive(*radius, "l1 radius"),
            Domain::Simplex { radius, .. } => positive(*radius, "simplex radius"),
            Domain::Box { lo, hi } => {
                check_len(lo.len(), hi.len())?;
                if lo.iter().zip(hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && l <= h)) {
                    return Err(Error::InvalidParameter("box bounds must be finite with lo <= hi".into()));
                }
                Ok(())
            }
            Domain::Product(parts) => parts.iter().try_for_each(Domain::validate),
        }
    }

    /// Euclidean (Frobenius) diameter `D_X`.
    pub fn diameter(&self) -> f64 {
        match self {
            Domain::PsdTraceBall { radius, .. } => radius * std::f64::consts::SQRT_2,
            Domain::NuclearBall { radius, .. } => 2.0 * radius,
            Domain::L1Ball { radius, .. } => 2.0 * radius,
            Domain::Box { lo, hi } => linalg::distance(lo, hi),
            Domain::Simplex { radius, .. } => radius * std::f64::consts::SQRT_2,
            Domain::Product(parts) => parts
                .iter()
                .map(|p| p.diameter().powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Deterministic starting point: the lmo answer for a zero direction.
    pub fn initial_point(&self) -> Vec<f64> {
        let zero = vec![0.0; self.len()];
        lmo(self, &zero, &EigConfig::default(), None)
            .expect("the zero direction always has a closed-form answer")
            .atom
            .materialize()
    }

    fn split<'a>(&self, parts: &[Domain], x: &'a [f64]) -> Vec<&'a [f64]> {
        let mut out = Vec::with_capacity(parts.len());
        let mut offset = 0;
        for p in parts {
            out.push(&x[offset..offset + p.len()]);
            offset += p.len();
        }
        out
    }
}

/// Structured lmo output.
#[derive(Clone, Debug, PartialEq)]
pub enum Atom {
    /// `weight · v vᵀ` with unit `v`
    SpectralPsd { weight: f64, vector: Vec<f64> },
    /// `weight · u vᵀ` with unit `u`, `v`
    SpectralRank1 { weight: f64, u: Vec<f64>, v: Vec<f64> },
    /// `sign · magnitude · e_index` in `R^dim`
    Vertex {
        dim: usize,
        index: usize,
        sign: f64,
        magnitude: f64,
    },
    DensePoint(Vec<f64>),
    Product(Vec<Atom>),
}

impl Atom {
    pub fn len(&self) -> usize {
        match self {
            Atom::SpectralPsd { vector, .. } => vector.len() * vector.len(),
            Atom::SpectralRank1 { u, v, .. } => u.len() * v.len(),
            Atom::Vertex { dim, .. } => *dim,
            Atom::DensePoint(p) => p.len(),
            Atom::Product(parts) => parts.iter().map(Atom::len).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn materialize(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.add_scaled_to(1.0, &mut out);
        out
    }

    /// `out += scale · atom`
    pub fn add_scaled_to(&self, scale: f64, out: &mut [f64]) {
        match self {
            Atom::SpectralPsd { weight, vector } => {
                if *weight != 0.0 {
                    rank_one_update(out, vector.len(), scale * weight, vector);
                }
            }
            Atom::SpectralRank1 { weight, u, v } => {
                if *weight != 0.0 {
                    for (row, ui) in out.chunks_exact_mut(v.len()).zip(u) {
                        linalg::axpy(scale * weight * ui, v, row);
                    }
                }
            }
            Atom::Vertex {
                index,
                sign,
                magnitude,
                ..
            } => out[*index] += scale * sign * magnitude,
            Atom::DensePoint(p) => linalg::axpy(scale, p, out),
            Atom::Product(parts) => {
                let mut offset = 0;
                for a in parts {
                    let len = a.len();
                    a.add_scaled_to(scale, &mut out[offset..offset + len]);
                    offset += len;
                }
            }
        }
    }

    /// `⟨direction, atom⟩` without materializing.
    pub fn inner(&self, direction: &[f64]) -> f64 {
        match self {
            Atom::SpectralPsd { weight, vector } => {
                if *weight == 0.0 {
                    return 0.0;
                }
                let n = vector.len();
                let quad: f64 = direction
                    .chunks_exact(n)
                    .zip(vector)
                    .map(|(row, vi)| vi * linalg::dot(row, vector))
                    .sum();
                weight * quad
            }
            Atom::SpectralRank1 { weight, u, v } => {
                if *weight == 0.0 {
                    return 0.0;
                }
                let bilinear: f64 = direction
                    .chunks_exact(v.len())
                    .zip(u)
                    .map(|(row, ui)| ui * linalg::dot(row, v))
                    .sum();
                weight * bilinear
            }
            Atom::Vertex {
                index,
                sign,
                magnitude,
                ..
            } => direction[*index] * sign * magnitude,
            Atom::DensePoint(p) => linalg::dot(direction, p),
            Atom::Product(parts) => {
                let mut offset = 0;
                let mut total = 0.0;
                for a in parts {
                    let len = a.len();
                    total += a.inner(&direction[offset..offset + len]);
                    offset += len;
                }
                total
            }
        }
    }

    fn warm_vector(&self) -> Option<&[f64]> {
        match self {
            Atom::SpectralPsd { vector, .. } => Some(vector),
            Atom::SpectralRank1 { v, .. } => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmoOutput {
    pub atom: Atom,
    /// `⟨direction, atom⟩`
    pub value: f64,
    /// Set to the eigen/singular residual when the iterative solver hit its
    /// iteration limit; the atom is then an inexact answer.
    pub inexact_residual: Option<f64>,
}

/// Linear minimization oracle `argmin_{s ∈ X} ⟨direction, s⟩`.
///
/// `previous` is an optional earlier atom from the same domain whose
/// spectral vector is used to warm-start the power iteration.
pub fn lmo(
    domain: &Domain,
    direction: &[f64],
    cfg: &EigConfig,
    previous: Option<&Atom>,
) -> Result<LmoOutput> {
    check_len(domain.len(), direction.len())?;
    if direction.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("lmo direction has non-finite entries".into()));
    }
    let zero_direction = direction.iter().all(|&v| v == 0.0);
    match domain {
        Domain::PsdTraceBall { n, radius, mode } => {
            let n = *n;
            if zero_direction {
                let mut e1 = vec![0.0; n];
                if n > 0 {
                    e1[0] = 1.0;
                }
                let weight = match mode {
                    TraceMode::AtMost => 0.0,
                    TraceMode::Exactly => *radius,
                };
                return Ok(LmoOutput {
                    atom: Atom::SpectralPsd { weight, vector: e1 },
                    value: 0.0,
                    inexact_residual: None,
                });
            }
            let sym = SymMatrix::symmetric_part(n, direction)?;
            let warm = previous.and_then(Atom::warm_vector);
            let (pair, inexact) = match extreme_eigpair_from(&sym, Extreme::Min, cfg, warm) {
                Ok(p) => (p, None),
                Err(e) => {
                    let r = e.best.residual;
                    (e.best, Some(r))
                }
            };
            let weight = match mode {
                TraceMode::AtMost if pair.value >= 0.0 => 0.0,
                _ => *radius,
            };
            let atom = Atom::SpectralPsd {
                weight,
                vector: pair.vector,
            };
            let value = weight * pair.value;
            Ok(LmoOutput {
                atom,
                value,
                inexact_residual: inexact,
            })
        }
        Domain::NuclearBall { rows, cols, radius } => {
            if zero_direction {
                return Ok(LmoOutput {
                    atom: Atom::SpectralRank1 {
                        weight: 0.0,
                        u: unit(*rows, 0),
                        v: unit(*cols, 0),
                    },
                    value: 0.0,
                    inexact_residual: None,
                });
            }
            let m = DenseMatrix::from_row_major(*rows, *cols, direction.to_vec())?;
            let warm = previous.and_then(Atom::warm_vector);
            let (t, inexact) = match top_singular_pair_from(&m, cfg, warm) {
                Ok(t) => (t, None),
                Err(e) => {
                    let r = e.best.residual;
                    (e.best, Some(r))
                }
            };
            let atom = Atom::SpectralRank1 {
                weight: -radius,
                u: t.u,
                v: t.v,
            };
            // value from the atom itself; σ is only approximate when not converged
            let value = atom.inner(direction);
            Ok(LmoOutput {
                atom,
                value,
                inexact_residual: inexact,
            })
        }
        Domain::L1Ball { dim, radius } => {
            let (index, g) = argmax_abs(direction);
            let sign = -signum0(g);
            let atom = Atom::Vertex {
                dim: *dim,
                index,
                sign,
                magnitude: *radius,
            };
            Ok(LmoOutput {
                value: sign * radius * g,
                atom,
                inexact_residual: None,
            })
        }
        Domain::Box { lo, hi } => {
            let point: Vec<f64> = direction
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(g, (l, h))| if *g < 0.0 { *h } else { *l })
                .collect();
            let value = linalg::dot(direction, &point);
            Ok(LmoOutput {
                atom: Atom::DensePoint(point),
                value,
                inexact_residual: None,
            })
        }
        Domain::Simplex { dim, radius } => {
            let index = argmin(direction);
            Ok(LmoOutput {
                value: radius * direction.get(index).copied().unwrap_or(0.0),
                atom: Atom::Vertex {
                    dim: *dim,
                    index,
                    sign: 1.0,
                    magnitude: *radius,
                },
                inexact_residual: None,
            })
        }
        Domain::Product(parts) => {
            let prev_parts = match previous {
                Some(Atom::Product(p)) if p.len() == parts.len() => Some(p),
                _ => None,
            };
            let mut atoms = Vec::with_capacity(parts.len());
            let mut value = 0.0;
            let mut inexact: Option<f64> = None;
            for (i, (part, dir)) in parts.iter().zip(domain.split(parts, direction)).enumerate() {
                let prev = prev_parts.map(|p| &p[i]);
                let sub_cfg = cfg.with_seed(cfg.seed.wrapping_add(i as u64));
                let out = lmo(part, dir, &sub_cfg, prev)?;
                value += out.value;
                if let Some(r) = out.inexact_residual {
                    inexact = Some(inexact.map_or(r, |x| x.max(r)));
                }
                atoms.push(out.atom);
            }
            Ok(LmoOutput {
                atom: Atom::Product(atoms),
                value,
                inexact_residual: inexact,
            })
        }
    }
}

/// `x ← (1 − η) x + η s`
pub fn cgm_step_in_place(x: &mut [f64], atom: &Atom, eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Contract(format!("step size {eta} outside [0, 1]")));
    }
    check_len(x.len(), atom.len())?;
    if eta == 0.0 {
        return Ok(());
    }
    if eta == 1.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
    } else {
        linalg::scale(1.0 - eta, x);
    }
    atom.add_scaled_to(eta, x);
    Ok(())
}

pub fn cgm_step(x: &[f64], atom: &Atom, eta: f64) -> Result<Vec<f64>> {
    let mut out = x.to_vec();
    cgm_step_in_place(&mut out, atom, eta)?;
    Ok(out)
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    if i < n {
        v[i] = 1.0;
    }
    v
}

fn signum0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Lowest index of the largest magnitude.
fn argmax_abs(g: &[f64]) -> (usize, f64) {
    let mut best = (0, g.first().copied().unwrap_or(0.0));
    for (i, &v) in g.iter().enumerate().skip(1) {
        if v.abs() > best.1.abs() {
            best = (i, v);
        }
    }
    best
}

/// Lowest index of the smallest entry.
fn argmin(g: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in g.iter().enumerate().skip(1) {
        if v < g[best] {
            best = i;
        }
    }
    best
}
