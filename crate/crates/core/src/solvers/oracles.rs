//! Linear minimization oracles as seen by the solver loop: the exact
//! (iterative) oracle and the additive / multiplicative inexact wrappers.

use crate::domains::{self, Atom, Domain};
use crate::error::Result;
use crate::linalg::{self, EigConfig};
use crate::reference;

use super::schedules::Step;

/// Everything an oracle call may depend on.
#[derive(Clone, Copy, Debug)]
pub struct LmoRequest<'a> {
    pub domain: &'a Domain,
    pub direction: &'a [f64],
    /// Current iterate `x_k` (needed by the multiplicative condition).
    pub iterate: &'a [f64],
    pub step: Step,
    pub seed: u64,
    /// Previous atom, used to warm-start spectral solves.
    pub previous: Option<&'a Atom>,
}

/// How the returned atom was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LmoSource {
    /// Iterative oracle at the configured tolerance.
    Iterative,
    /// Early-stopped iterative answer that passed certification.
    Loose,
    /// Tight iterative answer after the loose one failed certification.
    Refined,
    /// Dense reference answer after both iterative answers failed.
    Fallback,
    /// No certificate was available; tight iterative answer returned.
    Uncertified,
    /// The least-improving point the multiplicative condition admits.
    Shrunk,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmoOutcome {
    pub atom: Atom,
    /// `⟨direction, atom⟩`
    pub value: f64,
    pub source: LmoSource,
    /// Certified excess over the exact optimum, when a certificate exists.
    /// Additive mode: `⟨v, s̃⟩ − ⟨v, s⟩`. Multiplicative mode: `⟨v, s̃ − x⟩ − δ⟨v, s − x⟩`.
    pub certified_gap: Option<f64>,
    /// Eigen residual when the iterative solver stopped at its iteration limit.
    pub inexact_residual: Option<f64>,
}

pub trait LinearOracle: Send + Sync {
    fn minimize(&self, req: &LmoRequest<'_>) -> Result<LmoOutcome>;
}

/// Iterative lmo at a fixed eigen tolerance.
#[derive(Clone, Copy, Debug)]
pub struct ExactLmo {
    pub eig: EigConfig,
}

impl ExactLmo {
    fn solve(&self, req: &LmoRequest<'_>, eig: EigConfig, source: LmoSource) -> Result<LmoOutcome> {
        let out = domains::lmo(req.domain, req.direction, &eig.with_seed(req.seed), req.previous)?;
        Ok(LmoOutcome {
            value: out.value,
            atom: out.atom,
            source,
            certified_gap: None,
            inexact_residual: out.inexact_residual,
        })
    }
}

impl LinearOracle for ExactLmo {
    fn minimize(&self, req: &LmoRequest<'_>) -> Result<LmoOutcome> {
        self.solve(req, self.eig, LmoSource::Iterative)
    }
}

/// Problem constants entering the additive budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetContext {
    pub diameter: f64,
    pub smoothness: f64,
    pub op_norm: f64,
}

impl BudgetContext {
    /// `δ (η/2) D² (L_f + ‖A‖²/β)`
    pub fn budget(&self, delta: f64, step: &Step) -> f64 {
        delta * 0.5 * step.eta
            * self.diameter.powi(2)
            * (self.smoothness + self.op_norm.powi(2) / step.beta)
    }
}

/// Early-stop config used before certification.
pub fn loose_eig_config() -> EigConfig {
    EigConfig {
        tol: 1e-3,
        max_iter: 40,
        ..EigConfig::default()
    }
}

/// Eigen config for answers of reference quality.
pub fn tight_eig_config() -> EigConfig {
    EigConfig {
        tol: 1e-12,
        max_iter: 20_000,
        ..EigConfig::default()
    }
}

/// Exact optimum value and its atom, when the dense reference applies.
fn certificate(domain: &Domain, direction: &[f64]) -> Option<(Atom, f64)> {
    reference::exact_lmo_dense(domain, direction).ok()
}

fn slack(a: f64, b: f64) -> f64 {
    1e-12 * (1.0 + a.abs() + b.abs())
}

/// `⟨v, s̃⟩ ≤ ⟨v, s⟩ + δ (η/2) D² (L_f + ‖A‖²/β)`
#[derive(Clone, Copy, Debug)]
pub struct AdditiveLmo {
    pub delta: f64,
    pub context: BudgetContext,
    pub exact: ExactLmo,
    pub loose: EigConfig,
}

impl AdditiveLmo {
    pub fn new(delta: f64, context: BudgetContext, exact: ExactLmo) -> Self {
        Self {
            delta,
            context,
            exact,
            loose: loose_eig_config(),
        }
    }
}

impl LinearOracle for AdditiveLmo {
    fn minimize(&self, req: &LmoRequest<'_>) -> Result<LmoOutcome> {
        if self.delta == 0.0 {
            return self.exact.minimize(req);
        }
        let budget = self.context.budget(self.delta, &req.step);
        let Some((best_atom, best)) = certificate(req.domain, req.direction) else {
            return self.exact.solve(req, tight_eig_config(), LmoSource::Uncertified);
        };
        for (eig, source) in [(self.loose, LmoSource::Loose), (self.exact.eig, LmoSource::Refined)] {
            let mut out = self.exact.solve(req, eig, source)?;
            out.value = out.atom.inner(req.direction);
            let gap = out.value - best;
            if gap <= budget + slack(out.value, best) {
                out.certified_gap = Some(gap);
                return Ok(out);
            }
        }
        let value = best_atom.inner(req.direction);
        Ok(LmoOutcome {
            certified_gap: Some(value - best),
            atom: best_atom,
            value,
            source: LmoSource::Fallback,
            inexact_residual: None,
        })
    }
}

/// `⟨v, s̃ − x⟩ ≤ δ ⟨v, s − x⟩`
#[derive(Clone, Copy, Debug)]
pub struct MultiplicativeLmo {
    pub delta: f64,
    pub exact: ExactLmo,
    pub loose: EigConfig,
    /// Return `x + δ(s − x)` instead of an early-stopped atom. The
    /// condition then holds with equality, the worst answer it admits.
    pub shrink_to_bound: bool,
}

impl MultiplicativeLmo {
    pub fn new(delta: f64, exact: ExactLmo, shrink_to_bound: bool) -> Self {
        Self {
            delta,
            exact,
            loose: loose_eig_config(),
            shrink_to_bound,
        }
    }
}

impl LinearOracle for MultiplicativeLmo {
    fn minimize(&self, req: &LmoRequest<'_>) -> Result<LmoOutcome> {
        let base = linalg::dot(req.direction, req.iterate);
        if self.delta == 1.0 {
            // exact oracle required: pass through verbatim, attach the certificate
            let mut out = self.exact.minimize(req)?;
            if let Some((_, best)) = certificate(req.domain, req.direction) {
                out.certified_gap = Some(out.value - best);
            }
            return Ok(out);
        }
        let (best_atom, best, certified) = match certificate(req.domain, req.direction) {
            Some((a, v)) => (a, v, true),
            None => {
                let out = self.exact.solve(req, tight_eig_config(), LmoSource::Uncertified)?;
                (out.atom, out.value, false)
            }
        };
        let target = self.delta * (best - base);
        let gap_of = |value: f64| (value - base) - target;

        if self.shrink_to_bound {
            let mut point = req.iterate.to_vec();
            domains::cgm_step_in_place(&mut point, &best_atom, self.delta)?;
            let atom = Atom::DensePoint(point);
            let value = atom.inner(req.direction);
            return Ok(LmoOutcome {
                certified_gap: certified.then(|| gap_of(value)),
                atom,
                value,
                source: LmoSource::Shrunk,
                inexact_residual: None,
            });
        }
        if certified {
            for (eig, source) in [(self.loose, LmoSource::Loose), (self.exact.eig, LmoSource::Refined)] {
                let mut out = self.exact.solve(req, eig, source)?;
                out.value = out.atom.inner(req.direction);
                let gap = gap_of(out.value);
                if gap <= slack(out.value, base) {
                    out.certified_gap = Some(gap);
                    return Ok(out);
                }
            }
        }
        let value = best_atom.inner(req.direction);
        Ok(LmoOutcome {
            certified_gap: certified.then(|| gap_of(value)),
            atom: best_atom,
            value,
            source: if certified {
                LmoSource::Fallback
            } else {
                LmoSource::Uncertified
            },
            inexact_residual: None,
        })
    }
}
