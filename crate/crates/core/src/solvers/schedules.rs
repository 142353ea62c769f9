use crate::error::{Error, Result};

/// Accuracy model of the lmo, which also selects the parameter schedules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleMode {
    Exact,
    /// Additive error budget scaled by `δ ≥ 0`; uses the exact schedules.
    Additive { delta: f64 },
    /// Multiplicative accuracy `δ ∈ (0, 1]`; uses the stretched schedules.
    Multiplicative { delta: f64 },
}

impl OracleMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            OracleMode::Exact => Ok(()),
            OracleMode::Additive { delta } if delta >= 0.0 && delta.is_finite() => Ok(()),
            OracleMode::Multiplicative { delta } if delta > 0.0 && delta <= 1.0 => Ok(()),
            OracleMode::Additive { delta } => Err(Error::InvalidParameter(format!(
                "additive accuracy must be >= 0, got {delta}"
            ))),
            OracleMode::Multiplicative { delta } => Err(Error::InvalidParameter(format!(
                "multiplicative accuracy must lie in (0, 1], got {delta}"
            ))),
        }
    }
}

/// Step size, smoothing and averaging parameters at one iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub eta: f64,
    pub beta: f64,
    pub rho: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedules {
    pub beta0: f64,
    pub mode: OracleMode,
}

impl Schedules {
    pub fn exact(beta0: f64) -> Self {
        Self {
            beta0,
            mode: OracleMode::Exact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta0 > 0.0 && self.beta0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "initial smoothing parameter must be positive, got {}",
                self.beta0
            )));
        }
        self.mode.validate()
    }

    /// Parameters for iteration `k ≥ 1`.
    ///
    /// Exact and additive modes: `η = 9/(k+8)`, `β = β₀/√(k+8)`,
    /// `ρ = 4/(k+7)^{2/3}`. Multiplicative mode substitutes `δ(k−1)+9` for
    /// `k+8` and `δ(k−2)+9` for `k+7`.
    pub fn at(&self, k: usize) -> Result<Step> {
        if k < 1 {
            return Err(Error::Contract("schedules are defined for k >= 1".into()));
        }
        let kf = k as f64;
        let (eta_base, rho_base) = match self.mode {
            OracleMode::Exact | OracleMode::Additive { .. } => (kf + 8.0, kf + 7.0),
            OracleMode::Multiplicative { delta } => {
                (delta * (kf - 1.0) + 9.0, delta * (kf - 2.0) + 9.0)
            }
        };
        Ok(Step {
            eta: 9.0 / eta_base,
            beta: self.beta0 / eta_base.sqrt(),
            rho: (4.0 / rho_base.powf(2.0 / 3.0)).min(1.0),
        })
    }
}
