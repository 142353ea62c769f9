//! Config-driven runs that write CSV traces, plus log-log slope diagnostics.

mod config;
mod trace;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;

pub use config::{OracleKind, ProblemKind, RunConfig};
pub use trace::{fit_loglog_slope, fit_power_law, Columns, CsvWriter, SlopeFit, TraceTable};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::problems::{
    self, build_clustering_sdp, build_covariance_stream, build_matrix_completion,
    generate_synthetic, load_movielens, Analytic1dParams, CovarianceParams, DatasetHandle,
    L1QuadraticParams, MatrixCompletion, ProblemSpec, SyntheticKind,
};
use crate::reference::singular_values;
use crate::solvers::{LmoStats, Solver, TraceRecord};

/// Environment variable naming the directory for traces without an `output` key.
pub const OUTPUT_DIR_ENV: &str = "SHCGM_OUTPUT_DIR";

/// A problem built from a config, with completion evaluators when relevant.
#[derive(Clone, Debug)]
pub struct BuiltProblem {
    pub spec: ProblemSpec,
    pub completion: Option<MatrixCompletion>,
}

fn synthetic(kind: SyntheticKind, seed: u64) -> Result<DatasetHandle> {
    generate_synthetic(&kind, seed)
}

pub fn build_problem(cfg: &RunConfig) -> Result<BuiltProblem> {
    let data_seed: u64 = cfg.param("data_seed", 0)?;
    let plain = |spec| BuiltProblem {
        spec,
        completion: None,
    };
    match cfg.problem {
        ProblemKind::Analytic1d => {
            let d = Analytic1dParams::default();
            Ok(plain(problems::analytic1d(Analytic1dParams {
                target: cfg.param("target", d.target)?,
                cap: cfg.param("cap", d.cap)?,
                noise: cfg.param("noise", d.noise)?,
            })?))
        }
        ProblemKind::L1Quadratic => {
            let dim: usize = cfg.param("dim", 10)?;
            let mut rng = ChaCha8Rng::seed_from_u64(data_seed);
            let center = (0..dim)
                .map(|_| {
                    let m: f64 = rng.random_range(0.3..0.9);
                    if rng.random_bool(0.5) { m } else { -m }
                })
                .collect();
            Ok(plain(problems::l1_quadratic(L1QuadraticParams {
                center,
                weight: cfg.param("weight", 0.1)?,
                noise: cfg.param("noise", 0.1)?,
            })?))
        }
        ProblemKind::Clustering => {
            let kind = SyntheticKind::Clusters {
                clusters: cfg.param("clusters", 3)?,
                per_cluster: cfg.param("per_cluster", 10)?,
                dim: cfg.param("dim", 3)?,
                separation: cfg.param("separation", 1.0)?,
                spread: cfg.param("spread", 0.1)?,
            };
            let DatasetHandle::Clusters { points, .. } = synthetic(kind, data_seed)? else {
                unreachable!("cluster generator returns clusters")
            };
            let k: usize = cfg.param("clusters", 3)?;
            Ok(plain(build_clustering_sdp(&points, k, cfg.batch.unwrap_or(3))?))
        }
        ProblemKind::Covariance => {
            let kind = SyntheticKind::Covariance {
                n: cfg.param("n", 200)?,
                blocks: cfg.param("blocks", 10)?,
            };
            let DatasetHandle::Covariance { factor } = synthetic(kind, data_seed)? else {
                unreachable!("covariance generator returns a factor")
            };
            let params = CovarianceParams {
                trace_bound: cfg.param_opt("trace_bound")?,
                l1_bound: cfg.param_opt("l1_bound")?,
                batch: cfg.batch.unwrap_or(1),
                fixed_samples: cfg.param_opt("fixed_samples")?,
                sample_seed: data_seed.wrapping_add(1),
            };
            Ok(plain(build_covariance_stream(factor, &params)?))
        }
        ProblemKind::Completion => {
            let kind = SyntheticKind::Ratings {
                rows: cfg.param("rows", 50)?,
                cols: cfg.param("cols", 50)?,
                rank: cfg.param("rank", 3)?,
                observed: cfg.param("observed", 0.3)?,
            };
            let DatasetHandle::Ratings {
                rows,
                cols,
                train,
                test,
                truth,
            } = synthetic(kind, data_seed)?
            else {
                unreachable!("ratings generator returns ratings")
            };
            let bound = match cfg.param_opt::<f64>("nuclear_bound")? {
                Some(b) => b,
                None => nuclear_norm(truth.as_ref().expect("synthetic data has a truth"))?,
            };
            let batch = cfg.batch.unwrap_or(train.len().min(100));
            completion(build_matrix_completion(rows, cols, train, test, bound, 1.0, 5.0, batch)?)
        }
        ProblemKind::Movielens => {
            let path: String = cfg
                .param_opt("path")?
                .ok_or_else(|| Error::Config("movielens needs `path`".into()))?;
            let DatasetHandle::Ratings {
                rows,
                cols,
                train,
                test,
                ..
            } = load_movielens(Path::new(&path), data_seed)?
            else {
                unreachable!("loader returns ratings")
            };
            let bound = cfg.param("nuclear_bound", 7000.0)?;
            let batch = cfg.batch.unwrap_or(1000);
            completion(build_matrix_completion(rows, cols, train, test, bound, 1.0, 5.0, batch)?)
        }
    }
}

fn completion(mc: MatrixCompletion) -> Result<BuiltProblem> {
    Ok(BuiltProblem {
        spec: mc.spec.clone(),
        completion: Some(mc),
    })
}

fn nuclear_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Columns a run of this problem writes.
pub fn columns_for(spec: &ProblemSpec) -> Columns {
    Columns {
        residual: spec.reference_objective.is_some(),
        estimator_mse: spec.oracle.has_full_gradient(),
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub output: PathBuf,
    pub rows: usize,
    pub last: TraceRecord,
    pub stats: LmoStats,
    /// Problem-specific final metrics, e.g. `test_rmse`.
    pub metrics: Vec<(String, f64)>,
}

impl RunSummary {
    pub fn line(&self) -> String {
        let mut s = format!(
            "k={} objective={:e} feasibility={:e}",
            self.last.k, self.last.objective, self.last.feasibility
        );
        if let Some(r) = self.last.residual {
            s.push_str(&format!(" residual={r:e}"));
        }
        for (k, v) in &self.metrics {
            s.push_str(&format!(" {k}={v:.4}"));
        }
        s.push_str(&format!(
            " lmo_calls={} fallbacks={} rows={} -> {}",
            self.stats.calls,
            self.stats.fallback,
            self.rows,
            self.output.display()
        ));
        s
    }
}

pub fn default_output(cfg: &RunConfig) -> PathBuf {
    if let Some(o) = &cfg.output {
        return o.clone();
    }
    let name = format!(
        "{}_{}_s{}.csv",
        cfg.problem.name(),
        cfg.algorithm.name(),
        cfg.seed
    );
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) => PathBuf::from(dir).join(name),
        None => PathBuf::from(name),
    }
}

/// Validates, builds and runs a config, streaming the trace to its CSV.
/// On a solver failure the rows written so far stay on disk.
pub fn run_command(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let built = build_problem(cfg)?;
    let solver = Solver::new(&built.spec, cfg.solver_options()?)?;
    let output = default_output(cfg);
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let mut writer = CsvWriter::new(BufWriter::new(File::create(&output)?), columns_for(&built.spec))?;
    let mut rows = 0;
    let mut last = None;
    let (state, stats) = solver.run_with(&mut |r, _| {
        writer.write(r)?;
        rows += 1;
        last = Some(r.clone());
        Ok(())
    })?;
    let mut metrics = Vec::new();
    if let Some(mc) = &built.completion {
        metrics.push(("train_rmse".to_string(), mc.train_rmse(&state.x)));
        metrics.push(("test_rmse".to_string(), mc.test_rmse(&state.x)));
    }
    Ok(RunSummary {
        output,
        rows,
        last: last.expect("the initial record is always written"),
        stats,
        metrics,
    })
}

/// Runs independent configs concurrently, one result per config in order.
pub fn run_sweep(configs: &[RunConfig]) -> Vec<Result<RunSummary>> {
    configs.par_iter().map(run_command).collect()
}
