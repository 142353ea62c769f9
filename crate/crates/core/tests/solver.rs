use shcgm::harness::{build_problem, ProblemKind, RunConfig};
use shcgm::problems::{analytic1d, Analytic1dParams};
use shcgm::solvers::{
    run_solver, shcgm_iterate, Algorithm, OracleMode, Schedules, Solver, SolverOptions,
    TracePolicy,
};

fn covariance(n: usize) -> shcgm::problems::ProblemSpec {
    let cfg = RunConfig::new(ProblemKind::Covariance)
        .with_param("n", n)
        .with_param("blocks", 3);
    build_problem(&cfg).unwrap().spec
}

#[test]
fn identical_seeds_give_identical_runs() {
    let spec = covariance(20);
    let opts = SolverOptions::new(Algorithm::Shcgm, 200, 9, 1.0);
    let a = run_solver(&spec, opts.clone()).unwrap();
    let b = run_solver(&spec, opts).unwrap();
    assert_eq!(a.state.x, b.state.x);
    for (ra, rb) in a.trace.iter().zip(&b.trace) {
        assert_eq!((ra.k, ra.objective, ra.feasibility), (rb.k, rb.objective, rb.feasibility));
    }
    let c = run_solver(&spec, SolverOptions::new(Algorithm::Shcgm, 200, 10, 1.0)).unwrap();
    assert_ne!(a.state.x, c.state.x);
}

#[test]
fn stepping_by_hand_matches_a_full_run() {
    let spec = covariance(12);
    let opts = SolverOptions::new(Algorithm::Shcgm, 30, 4, 2.0);
    let solver = Solver::new(&spec, opts.clone()).unwrap();
    let full = solver.run().unwrap();
    let mut state = solver.initial_state();
    for _ in 0..30 {
        shcgm_iterate(&mut state, &spec, opts.schedules, 4).unwrap();
    }
    assert_eq!(state.x, full.state.x);
    assert_eq!(state.k, 30);
}

#[test]
fn hcgm_needs_exact_gradients() {
    let spec = covariance(10);
    assert!(Solver::new(&spec, SolverOptions::new(Algorithm::Hcgm, 5, 0, 1.0)).is_ok());
    let mut mc = RunConfig::new(ProblemKind::Completion)
        .with_param("rows", 6)
        .with_param("cols", 6);
    mc.batch = Some(3);
    let built = build_problem(&mc).unwrap();
    // completion exposes its full gradient, so this run is legal too
    assert!(Solver::new(&built.spec, SolverOptions::new(Algorithm::Hcgm, 5, 0, 1.0)).is_ok());
}

#[test]
fn unit_multiplicative_accuracy_tracks_exact_runs() {
    let spec = covariance(15);
    let exact = run_solver(&spec, SolverOptions::new(Algorithm::Shcgm, 150, 2, 1.0)).unwrap();
    let mult = run_solver(
        &spec,
        SolverOptions::new(Algorithm::Shcgm, 150, 2, 1.0)
            .with_oracle(OracleMode::Multiplicative { delta: 1.0 }),
    )
    .unwrap();
    assert_eq!(exact.state.x, mult.state.x);
}

#[test]
fn sfw_ignores_the_penalty_schedule() {
    let spec = analytic1d(Analytic1dParams::default()).unwrap();
    let a = run_solver(&spec, SolverOptions::new(Algorithm::Sfw, 100, 1, 1.0)).unwrap();
    let b = run_solver(&spec, SolverOptions::new(Algorithm::Sfw, 100, 1, 50.0)).unwrap();
    assert_eq!(a.state.x, b.state.x);
}

#[test]
fn every_iterate_is_recorded_with_stride_one() {
    let spec = analytic1d(Analytic1dParams::default()).unwrap();
    let mut opts = SolverOptions::new(Algorithm::Shcgm, 40, 1, 1.0);
    opts.trace = TracePolicy::Every(1);
    let out = run_solver(&spec, opts).unwrap();
    assert_eq!(out.trace.len(), 41);
    let sched = Schedules::exact(1.0);
    for (k, r) in out.trace.iter().enumerate().skip(1) {
        assert_eq!(r.k, k);
        assert_eq!(r.beta_k, sched.at(k).unwrap().beta);
    }
}

#[test]
fn analytic_problem_converges_to_the_known_optimum() {
    let spec = analytic1d(Analytic1dParams::default()).unwrap();
    let out = run_solver(&spec, SolverOptions::new(Algorithm::Hcgm, 20_000, 0, 1.0)).unwrap();
    let last = out.trace.last().unwrap();
    assert!(last.residual.unwrap() < 5e-3, "{last:?}");
    assert!(last.feasibility < 5e-2);
}
