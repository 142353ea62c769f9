use crate::error::Result;
use crate::problems::ProblemSpec;
use crate::solvers::{run_solver, Algorithm, SolverOptions, TracePolicy};

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceBudget {
    pub iterations: usize,
    pub beta0: f64,
    pub seed: u64,
    /// Feasibility gap above which the solution is marked low-confidence.
    pub feasibility_tol: f64,
}

impl Default for ReferenceBudget {
    fn default() -> Self {
        Self {
            iterations: 1_000_000,
            beta0: 1.0,
            seed: 0,
            feasibility_tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSolution {
    pub x_star: Vec<f64>,
    pub f_star: f64,
    pub feasibility: f64,
    pub dual_norm_estimate: Option<f64>,
    /// How the solution was obtained, e.g. `hcgm iterations=1000000 seed=0 beta0=1`.
    pub provenance: String,
    pub low_confidence: bool,
}

/// Long deterministic run, or the closed form when the problem carries one.
pub fn reference_solve(problem: &ProblemSpec, budget: &ReferenceBudget) -> Result<ReferenceSolution> {
    if let Some(known) = &problem.known_solution {
        let feasibility = problem.feasibility(&known.x);
        return Ok(ReferenceSolution {
            f_star: problem.objective(&known.x),
            x_star: known.x.clone(),
            feasibility,
            dual_norm_estimate: known.dual_norm,
            provenance: "closed form".into(),
            low_confidence: feasibility > budget.feasibility_tol,
        });
    }
    let mut options = SolverOptions::new(Algorithm::Hcgm, budget.iterations, budget.seed, budget.beta0);
    options.trace = TracePolicy::Every(usize::MAX);
    let out = run_solver(problem, options)?;
    let x = out.state.x;
    let feasibility = problem.feasibility(&x);
    Ok(ReferenceSolution {
        f_star: problem.objective(&x),
        feasibility,
        x_star: x,
        dual_norm_estimate: None,
        provenance: format!(
            "hcgm iterations={} seed={} beta0={}",
            budget.iterations, budget.seed, budget.beta0
        ),
        low_confidence: feasibility > budget.feasibility_tol,
    })
}
