use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::solvers::{Algorithm, OracleMode, SolverOptions, TracePolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Analytic1d,
    L1Quadratic,
    Clustering,
    Covariance,
    Completion,
    Movielens,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 6] = [
        ProblemKind::Analytic1d,
        ProblemKind::L1Quadratic,
        ProblemKind::Clustering,
        ProblemKind::Covariance,
        ProblemKind::Completion,
        ProblemKind::Movielens,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Analytic1d => "analytic1d",
            ProblemKind::L1Quadratic => "l1_quadratic",
            ProblemKind::Clustering => "clustering",
            ProblemKind::Covariance => "covariance",
            ProblemKind::Completion => "completion",
            ProblemKind::Movielens => "movielens",
        }
    }

    /// Problem-specific keys accepted in a config file.
    pub fn param_keys(self) -> &'static [&'static str] {
        match self {
            ProblemKind::Analytic1d => &["target", "cap", "noise"],
            ProblemKind::L1Quadratic => &["dim", "weight", "noise", "data_seed"],
            ProblemKind::Clustering => &[
                "clusters",
                "per_cluster",
                "dim",
                "separation",
                "spread",
                "data_seed",
            ],
            ProblemKind::Covariance => &[
                "n",
                "blocks",
                "trace_bound",
                "l1_bound",
                "fixed_samples",
                "data_seed",
            ],
            ProblemKind::Completion => &[
                "rows",
                "cols",
                "rank",
                "observed",
                "nuclear_bound",
                "data_seed",
            ],
            ProblemKind::Movielens => &["path", "nuclear_bound", "data_seed"],
        }
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown problem {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Exact,
    Additive,
    Multiplicative,
}

impl OracleKind {
    fn name(self) -> &'static str {
        match self {
            OracleKind::Exact => "exact",
            OracleKind::Additive => "additive",
            OracleKind::Multiplicative => "multiplicative",
        }
    }
}

/// A flat `key = value` run description.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub seed: u64,
    pub beta0: f64,
    pub oracle: OracleKind,
    pub delta: f64,
    /// `exact` or `multiplicative`; `None` follows the oracle.
    pub schedule: Option<OracleKind>,
    pub shrink_to_bound: bool,
    pub batch: Option<usize>,
    /// `None` is logarithmic thinning.
    pub trace_stride: Option<usize>,
    pub output: Option<PathBuf>,
    pub params: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new(problem: ProblemKind) -> Self {
        Self {
            problem,
            algorithm: Algorithm::Shcgm,
            iterations: 1000,
            seed: 0,
            beta0: 1.0,
            oracle: OracleKind::Exact,
            delta: 0.0,
            schedule: None,
            shrink_to_bound: false,
            batch: None,
            trace_stride: None,
            output: None,
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, got {line:?}"),
            })?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if entries.iter().any(|(_, e, _)| *e == k) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("duplicate key {k:?}"),
                });
            }
            entries.push((i + 1, k, v));
        }
        let problem = entries
            .iter()
            .find(|(_, k, _)| k == "problem")
            .ok_or_else(|| Error::Config("missing required key `problem`".into()))?
            .2
            .parse::<ProblemKind>()?;
        let mut cfg = RunConfig::new(problem);
        for (line, key, value) in entries {
            let at = |e: Error| Error::Parse {
                line,
                message: format!("{key}: {e}"),
            };
            match key.as_str() {
                "problem" => {}
                "algorithm" => cfg.algorithm = Algorithm::parse(&value).map_err(at)?,
                "iterations" => cfg.iterations = typed(&value).map_err(at)?,
                "seed" => cfg.seed = typed(&value).map_err(at)?,
                "beta0" => cfg.beta0 = typed(&value).map_err(at)?,
                "oracle" => cfg.oracle = oracle_kind(&value).map_err(at)?,
                "delta" => cfg.delta = typed(&value).map_err(at)?,
                "schedule" => cfg.schedule = Some(oracle_kind(&value).map_err(at)?),
                "shrink_to_bound" => cfg.shrink_to_bound = typed(&value).map_err(at)?,
                "batch" => cfg.batch = Some(typed(&value).map_err(at)?),
                "trace_stride" => cfg.trace_stride = Some(typed(&value).map_err(at)?),
                "output" => cfg.output = Some(PathBuf::from(value)),
                other if problem.param_keys().contains(&other) => {
                    cfg.params.insert(key, value);
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown key {other:?} for problem {}", problem.name()),
                    })
                }
            }
        }
        Ok(cfg)
    }

    /// Canonical text form; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("problem", self.problem.name().into());
        put("algorithm", self.algorithm.name().into());
        put("iterations", self.iterations.to_string());
        put("seed", self.seed.to_string());
        put("beta0", format!("{:?}", self.beta0));
        put("oracle", self.oracle.name().into());
        put("delta", format!("{:?}", self.delta));
        if let Some(sch) = self.schedule {
            put("schedule", sch.name().into());
        }
        if self.shrink_to_bound {
            put("shrink_to_bound", "true".into());
        }
        if let Some(b) = self.batch {
            put("batch", b.to_string());
        }
        if let Some(t) = self.trace_stride {
            put("trace_stride", t.to_string());
        }
        if let Some(o) = &self.output {
            put("output", o.display().to_string());
        }
        for (k, v) in &self.params {
            put(k, v.clone());
        }
        s
    }

    pub fn param<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => typed(v).map_err(|e| Error::Config(format!("{key}: {e}"))),
        }
    }

    pub fn param_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.params
            .get(key)
            .map(|v| typed(v).map_err(|e| Error::Config(format!("{key}: {e}"))))
            .transpose()
    }

    pub fn oracle_mode(&self) -> OracleMode {
        match self.oracle {
            OracleKind::Exact => OracleMode::Exact,
            OracleKind::Additive => OracleMode::Additive { delta: self.delta },
            OracleKind::Multiplicative => OracleMode::Multiplicative { delta: self.delta },
        }
    }

    pub fn solver_options(&self) -> Result<SolverOptions> {
        let mut opts = SolverOptions::new(self.algorithm, self.iterations, self.seed, self.beta0)
            .with_oracle(self.oracle_mode());
        if let Some(sch) = self.schedule {
            opts.schedules.mode = match sch {
                OracleKind::Exact => OracleMode::Exact,
                OracleKind::Multiplicative => OracleMode::Multiplicative { delta: self.delta },
                OracleKind::Additive => {
                    return Err(Error::Config(
                        "schedule must be `exact` or `multiplicative`".into(),
                    ))
                }
            };
        }
        opts.trace = match self.trace_stride {
            None => TracePolicy::Logarithmic,
            Some(0) => return Err(Error::Config("trace_stride must be >= 1".into())),
            Some(s) => TracePolicy::Every(s),
        };
        opts.shrink_to_bound = self.shrink_to_bound;
        Ok(opts)
    }

    /// Checks every typed value without building the problem.
    pub fn validate(&self) -> Result<()> {
        if self.oracle == OracleKind::Exact && self.delta != 0.0 {
            return Err(Error::Config("delta must be 0 with the exact oracle".into()));
        }
        self.solver_options()?.validate()?;
        if self.batch == Some(0) {
            return Err(Error::Config("batch must be >= 1".into()));
        }
        Ok(())
    }
}

fn typed<T: FromStr>(v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("cannot parse {v:?} as {}", std::any::type_name::<T>())))
}

fn oracle_kind(v: &str) -> Result<OracleKind> {
    match v {
        "exact" => Ok(OracleKind::Exact),
        "additive" => Ok(OracleKind::Additive),
        "multiplicative" => Ok(OracleKind::Multiplicative),
        _ => Err(Error::Config(format!("unknown oracle {v:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# covariance sweep
problem = covariance
algorithm = hcgm
iterations = 500   # short
seed = 3
beta0 = 1
n = 40
fixed_samples = 10
trace_stride = 5
";

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.problem, ProblemKind::Covariance);
        assert_eq!(cfg.algorithm, Algorithm::Hcgm);
        assert_eq!(cfg.iterations, 500);
        assert_eq!(cfg.param::<usize>("n", 0).unwrap(), 40);
        assert_eq!(cfg.trace_stride, Some(5));
        let again = RunConfig::parse(&cfg.serialize()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_unknown_and_malformed_keys() {
        assert!(RunConfig::parse("problem = covariance\nrank = 3\n").is_err());
        assert!(RunConfig::parse("problem = covariance\niterations\n").is_err());
        assert!(RunConfig::parse("iterations = 3\n").is_err());
        assert!(RunConfig::parse("problem = covariance\nseed = 1\nseed = 2\n").is_err());
        assert!(RunConfig::parse("problem = covariance\niterations = -1\n").is_err());
    }

    #[test]
    fn multiplicative_oracle_needs_multiplicative_schedule() {
        let mut cfg = RunConfig::new(ProblemKind::Analytic1d);
        cfg.oracle = OracleKind::Multiplicative;
        cfg.delta = 0.5;
        assert!(cfg.validate().is_ok());
        cfg.schedule = Some(OracleKind::Exact);
        assert!(cfg.validate().is_err());
        cfg.schedule = Some(OracleKind::Multiplicative);
        assert!(cfg.validate().is_ok());
        cfg.delta = 1.5;
        assert!(cfg.validate().is_err());
    }
}
