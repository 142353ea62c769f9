//! The stochastic homotopy conditional gradient loop and its deterministic
//! (`Hcgm`) and unconstrained (`Sfw`) variants.

mod oracles;
mod schedules;

use std::time::Instant;

pub use oracles::{
    loose_eig_config, tight_eig_config, AdditiveLmo, BudgetContext, ExactLmo, LinearOracle,
    LmoOutcome, LmoRequest, LmoSource, MultiplicativeLmo,
};
pub use schedules::{OracleMode, Schedules, Step};

use crate::domains::{self, Atom};
use crate::error::{Error, Result};
use crate::linalg::{self, EigConfig};
use crate::nonsmooth::smoothed_grad_into;
use crate::problems::ProblemSpec;
use crate::stochastic::{iteration_rng, EstimatorState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Averaged stochastic gradients.
    Shcgm,
    /// Exact gradients every iteration.
    Hcgm,
    /// Averaged stochastic gradients with the `g` term dropped.
    Sfw,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Shcgm => "shcgm",
            Algorithm::Hcgm => "hcgm",
            Algorithm::Sfw => "sfw",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "shcgm" => Ok(Algorithm::Shcgm),
            "hcgm" => Ok(Algorithm::Hcgm),
            "sfw" => Ok(Algorithm::Sfw),
            _ => Err(Error::Config(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// Which iterations produce a trace record (the initial one and the last
/// one are always recorded).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TracePolicy {
    /// Every iteration up to 1000, then every `10^(⌊log₁₀ k⌋ − 2)`.
    Logarithmic,
    Every(usize),
}

impl TracePolicy {
    pub fn records(self, k: usize, last: usize) -> bool {
        if k == 0 || k == last {
            return true;
        }
        match self {
            TracePolicy::Every(s) => k.is_multiple_of(s.max(1)),
            TracePolicy::Logarithmic => {
                if k <= 1000 {
                    true
                } else {
                    let step = 10usize.pow(k.ilog10() - 2);
                    k.is_multiple_of(step)
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub seed: u64,
    pub schedules: Schedules,
    pub oracle: OracleMode,
    pub eig: EigConfig,
    pub trace: TracePolicy,
    /// Multiplicative mode only: answer every lmo call with the weakest
    /// point the accuracy condition admits.
    pub shrink_to_bound: bool,
}

impl SolverOptions {
    pub fn new(algorithm: Algorithm, iterations: usize, seed: u64, beta0: f64) -> Self {
        Self {
            algorithm,
            iterations,
            seed,
            schedules: Schedules::exact(beta0),
            oracle: OracleMode::Exact,
            eig: EigConfig::default(),
            trace: TracePolicy::Logarithmic,
            shrink_to_bound: false,
        }
    }

    /// Sets the oracle mode together with its matching schedules.
    pub fn with_oracle(mut self, mode: OracleMode) -> Self {
        self.oracle = mode;
        self.schedules.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.schedules.validate()?;
        self.oracle.validate()?;
        match (self.oracle, self.schedules.mode) {
            (OracleMode::Multiplicative { delta: a }, OracleMode::Multiplicative { delta: b })
                if a == b => {}
            (OracleMode::Multiplicative { .. }, _) | (_, OracleMode::Multiplicative { .. }) => {
                return Err(Error::Config(
                    "a multiplicative oracle requires multiplicative schedules with the same accuracy"
                        .into(),
                ))
            }
            _ => {}
        }
        if self.shrink_to_bound && !matches!(self.oracle, OracleMode::Multiplicative { .. }) {
            return Err(Error::Config("shrink_to_bound needs a multiplicative oracle".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub x: Vec<f64>,
    pub estimator: EstimatorState,
    /// Completed iterations.
    pub k: usize,
    pub last_atom: Option<Atom>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub objective: f64,
    pub residual: Option<f64>,
    pub feasibility: f64,
    pub estimator_mse: Option<f64>,
    pub beta_k: f64,
    pub wall_time_ms: f64,
}

/// Counts of how lmo answers were produced.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LmoStats {
    pub calls: usize,
    pub iterative: usize,
    pub loose: usize,
    pub refined: usize,
    pub fallback: usize,
    pub uncertified: usize,
    pub shrunk: usize,
    /// Calls whose eigensolver stopped at its iteration limit.
    pub inexact: usize,
}

impl LmoStats {
    fn add(&mut self, out: &LmoOutcome) {
        self.calls += 1;
        match out.source {
            LmoSource::Iterative => self.iterative += 1,
            LmoSource::Loose => self.loose += 1,
            LmoSource::Refined => self.refined += 1,
            LmoSource::Fallback => self.fallback += 1,
            LmoSource::Uncertified => self.uncertified += 1,
            LmoSource::Shrunk => self.shrunk += 1,
        }
        if out.inexact_residual.is_some() {
            self.inexact += 1;
        }
    }
}

/// What one iteration did, beyond the state change.
#[derive(Clone, Debug)]
pub struct IterationInfo {
    pub step: Step,
    pub estimator_mse: Option<f64>,
    pub lmo: LmoOutcome,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub state: SolverState,
    pub stats: LmoStats,
}

pub struct Solver<'a> {
    problem: &'a ProblemSpec,
    options: SolverOptions,
    oracle: Box<dyn LinearOracle + 'a>,
    has_full_gradient: bool,
}

fn eig_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (k as u64)
}

impl<'a> Solver<'a> {
    pub fn new(problem: &'a ProblemSpec, options: SolverOptions) -> Result<Self> {
        options.validate()?;
        let has_full_gradient = problem.oracle.has_full_gradient();
        if options.algorithm == Algorithm::Hcgm && !has_full_gradient {
            return Err(Error::Config(format!(
                "hcgm needs an exact gradient, which problem {} does not provide",
                problem.name
            )));
        }
        let exact = ExactLmo { eig: options.eig };
        let oracle: Box<dyn LinearOracle> = match options.oracle {
            OracleMode::Exact => Box::new(exact),
            OracleMode::Additive { delta } => Box::new(AdditiveLmo::new(
                delta,
                BudgetContext {
                    diameter: problem.domain.diameter(),
                    smoothness: problem.smoothness,
                    op_norm: problem.op_norm(),
                },
                exact,
            )),
            OracleMode::Multiplicative { delta } => {
                Box::new(MultiplicativeLmo::new(delta, exact, options.shrink_to_bound))
            }
        };
        Ok(Self {
            problem,
            options,
            oracle,
            has_full_gradient,
        })
    }

    /// Replaces the lmo built from the options.
    pub fn with_lmo(mut self, oracle: Box<dyn LinearOracle + 'a>) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn initial_state(&self) -> SolverState {
        SolverState {
            x: self.problem.domain.initial_point(),
            estimator: EstimatorState::new(self.problem.len()),
            k: 0,
            last_atom: None,
        }
    }

    /// One iteration `x_k → x_{k+1}`; `want_mse` requests the estimator error.
    pub fn step(&self, state: &mut SolverState, want_mse: bool) -> Result<IterationInfo> {
        let k = state.k + 1;
        self.step_inner(state, k, want_mse)
            .map_err(|e| Error::Iteration {
                k,
                source: Box::new(e),
            })
    }

    fn step_inner(&self, state: &mut SolverState, k: usize, want_mse: bool) -> Result<IterationInfo> {
        let problem = self.problem;
        let step = self.options.schedules.at(k)?;
        let len = problem.len();
        let full = if self.options.algorithm == Algorithm::Hcgm
            || (want_mse && self.has_full_gradient)
        {
            problem.oracle.full_gradient(&state.x)
        } else {
            None
        };

        match self.options.algorithm {
            Algorithm::Hcgm => {
                let g = full.as_ref().ok_or_else(|| {
                    Error::Contract("exact gradient vanished during the run".into())
                })?;
                state.estimator.d.copy_from_slice(g);
                state.estimator.k += 1;
            }
            Algorithm::Shcgm | Algorithm::Sfw => {
                let mut g = vec![0.0; len];
                let mut rng = iteration_rng(self.options.seed, k as u64);
                problem.oracle.sample_gradient(&state.x, &mut rng, &mut g);
                state.estimator.update(&g, step.rho)?;
            }
        }
        let estimator_mse = if want_mse {
            full.as_ref().map(|g| {
                g.iter()
                    .zip(&state.estimator.d)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
            })
        } else {
            None
        };

        let mut v = state.estimator.d.clone();
        if self.options.algorithm != Algorithm::Sfw && !problem.nonsmooth.is_zero() {
            let mut penalty = vec![0.0; len];
            smoothed_grad_into(&problem.nonsmooth, problem.map.as_ref(), &state.x, step.beta, &mut penalty)?;
            linalg::axpy(1.0, &penalty, &mut v);
        }

        let lmo = self.oracle.minimize(&LmoRequest {
            domain: &problem.domain,
            direction: &v,
            iterate: &state.x,
            step,
            seed: eig_seed(self.options.seed, k),
            previous: state.last_atom.as_ref(),
        })?;
        domains::cgm_step_in_place(&mut state.x, &lmo.atom, step.eta)?;
        state.k = k;
        state.last_atom = spectral_only(&lmo.atom);
        Ok(IterationInfo {
            step,
            estimator_mse,
            lmo,
        })
    }

    fn record(&self, state: &SolverState, estimator_mse: Option<f64>, beta: f64, start: Instant) -> TraceRecord {
        let objective = self.problem.objective(&state.x);
        TraceRecord {
            k: state.k,
            objective,
            residual: self.problem.reference_objective.map(|r| (objective - r).abs()),
            feasibility: self.problem.feasibility(&state.x),
            estimator_mse,
            beta_k: beta,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        }
    }

    /// Runs the configured number of iterations, handing each trace record
    /// (with the state it describes) to `sink`. Record `k` describes
    /// `x_{k+1}`, the estimator `d_k` and `β_k`; record 0 is the start point.
    pub fn run_with(
        &self,
        sink: &mut dyn FnMut(&TraceRecord, &SolverState) -> Result<()>,
    ) -> Result<(SolverState, LmoStats)> {
        let start = Instant::now();
        let mut state = self.initial_state();
        let mut stats = LmoStats::default();
        let first = self.record(&state, None, self.options.schedules.beta0, start);
        sink(&first, &state)?;
        let last = self.options.iterations;
        for k in 1..=last {
            let want = self.options.trace.records(k, last);
            let info = self.step(&mut state, want)?;
            stats.add(&info.lmo);
            if want {
                let rec = self.record(&state, info.estimator_mse, info.step.beta, start);
                sink(&rec, &state)?;
            }
        }
        Ok((state, stats))
    }

    pub fn run(&self) -> Result<RunOutput> {
        let mut trace = Vec::new();
        let (state, stats) = self.run_with(&mut |r, _| {
            trace.push(r.clone());
            Ok(())
        })?;
        Ok(RunOutput { trace, state, stats })
    }
}

/// Only spectral atoms carry warm-start information worth keeping.
fn spectral_only(atom: &Atom) -> Option<Atom> {
    match atom {
        Atom::SpectralPsd { .. } | Atom::SpectralRank1 { .. } => Some(atom.clone()),
        Atom::Product(parts) if parts.iter().any(|p| spectral_only(p).is_some()) => {
            Some(atom.clone())
        }
        _ => None,
    }
}

/// One iteration with exact-oracle defaults. Returns the record for `x_{k+1}`.
pub fn shcgm_iterate(
    state: &mut SolverState,
    problem: &ProblemSpec,
    schedules: Schedules,
    seed: u64,
) -> Result<TraceRecord> {
    let mut options = SolverOptions::new(Algorithm::Shcgm, state.k + 1, seed, schedules.beta0);
    options.schedules = schedules;
    options.oracle = match schedules.mode {
        OracleMode::Additive { .. } => OracleMode::Exact,
        m => m,
    };
    let solver = Solver::new(problem, options)?;
    let info = solver.step(state, true)?;
    Ok(solver.record(state, info.estimator_mse, info.step.beta, Instant::now()))
}

pub fn run_solver(problem: &ProblemSpec, options: SolverOptions) -> Result<RunOutput> {
    Solver::new(problem, options)?.run()
}
