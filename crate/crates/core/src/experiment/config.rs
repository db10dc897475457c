use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arm::ArmId;
use crate::bernoulli::{BetaTs, Bts, BtsInf, WeightScheme};
use crate::env::{BernoulliEnv, Environment, FactorialEnv};
use crate::error::{BanditError, Result};
use crate::linear::{BayesLinear, LinearBts};
use crate::policy::Policy;

/// Largest horizon for which a per-step trace may be requested.
pub const FULL_TRACE_LIMIT: u64 = 100_000;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    BetaTs {
        #[serde(default = "one")]
        alpha0: f64,
        #[serde(default = "one")]
        beta0: f64,
    },
    Bts {
        #[serde(alias = "J")]
        replicates: usize,
        #[serde(default = "one")]
        alpha0: f64,
        #[serde(default = "one")]
        beta0: f64,
        #[serde(default)]
        weights: WeightScheme,
    },
    BtsInf {
        #[serde(default = "one")]
        alpha0: f64,
        #[serde(default = "one")]
        beta0: f64,
    },
    LinearBts {
        #[serde(alias = "J")]
        replicates: usize,
        #[serde(default = "one")]
        lambda: f64,
    },
    BayesLinear,
}

impl PolicySpec {
    pub fn bts(replicates: usize) -> Self {
        PolicySpec::Bts {
            replicates,
            alpha0: 1.0,
            beta0: 1.0,
            weights: WeightScheme::DoubleOrNothing,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PolicySpec::BetaTs { .. } => "beta-ts",
            PolicySpec::Bts { .. } => "bts",
            PolicySpec::BtsInf { .. } => "bts-inf",
            PolicySpec::LinearBts { .. } => "linear-bts",
            PolicySpec::BayesLinear => "bayes-linear",
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, PolicySpec::LinearBts { .. } | PolicySpec::BayesLinear)
    }

    fn validate(&self) -> Result<()> {
        let prior = |a: f64, b: f64| {
            if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
                Ok(())
            } else {
                Err(BanditError::Config(format!(
                    "prior pseudo-counts must be positive, got ({a}, {b})"
                )))
            }
        };
        match *self {
            PolicySpec::BetaTs { alpha0, beta0 } | PolicySpec::BtsInf { alpha0, beta0 } => {
                prior(alpha0, beta0)
            }
            PolicySpec::Bts {
                replicates,
                alpha0,
                beta0,
                ..
            } => {
                if replicates == 0 {
                    return Err(BanditError::Config(
                        "bts needs at least one replicate".into(),
                    ));
                }
                prior(alpha0, beta0)
            }
            PolicySpec::LinearBts { replicates, lambda } => {
                if replicates == 0 {
                    return Err(BanditError::Config(
                        "linear-bts needs at least one replicate".into(),
                    ));
                }
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(BanditError::Config(format!(
                        "lambda must be positive, got {lambda}"
                    )));
                }
                Ok(())
            }
            PolicySpec::BayesLinear => Ok(()),
        }
    }

    /// Fresh policy for an environment with `num_arms` arms and feature
    /// dimension `dim` (ignored by Bernoulli policies).
    pub fn build(&self, num_arms: usize, dim: usize) -> Result<Box<dyn Policy>> {
        Ok(match *self {
            PolicySpec::BetaTs { alpha0, beta0 } => Box::new(BetaTs::new(num_arms, alpha0, beta0)?),
            PolicySpec::Bts {
                replicates,
                alpha0,
                beta0,
                weights,
            } => {
                Box::new(Bts::new(num_arms, replicates, alpha0, beta0)?.with_weight_scheme(weights))
            }
            PolicySpec::BtsInf { alpha0, beta0 } => Box::new(BtsInf::new(num_arms, alpha0, beta0)?),
            PolicySpec::LinearBts { replicates, lambda } => {
                Box::new(LinearBts::new(dim, replicates, lambda)?)
            }
            PolicySpec::BayesLinear => Box::new(BayesLinear::new(dim)?),
        })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Bts { replicates, .. } | PolicySpec::LinearBts { replicates, .. } => {
                write!(f, "{}-J{replicates}", self.label())
            }
            _ => f.write_str(self.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvSpec {
    Bernoulli {
        #[serde(alias = "K")]
        arms: usize,
        epsilon: f64,
        #[serde(default)]
        optimal: usize,
    },
    Factorial {
        gamma: f64,
    },
}

impl EnvSpec {
    pub fn label(&self) -> &'static str {
        match self {
            EnvSpec::Bernoulli { .. } => "bernoulli",
            EnvSpec::Factorial { .. } => "factorial",
        }
    }

    pub fn build(&self) -> Result<Box<dyn Environment>> {
        let env: Box<dyn Environment> = match *self {
            EnvSpec::Bernoulli {
                arms,
                epsilon,
                optimal,
            } => Box::new(BernoulliEnv::new(arms, epsilon, ArmId(optimal))?),
            EnvSpec::Factorial { gamma } => Box::new(FactorialEnv::new(gamma)?),
        };
        Ok(env)
    }

    fn validate(&self) -> Result<()> {
        self.build().map(|_| ()).map_err(|e| match e {
            BanditError::Config(_) => e,
            other => BanditError::Config(format!("environment: {other}")),
        })
    }
}

impl fmt::Display for EnvSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvSpec::Bernoulli { arms, epsilon, .. } => write!(f, "bernoulli-K{arms}-eps{epsilon}"),
            EnvSpec::Factorial { gamma } => write!(f, "factorial-gamma{gamma}"),
        }
    }
}

/// One replicated simulation: a policy facing an environment for `horizon`
/// steps, `runs` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub horizon: u64,
    pub runs: u64,
    pub master_seed: u64,
    /// Steps at which cumulative values are recorded. Absent means the
    /// geometric grid `{1, 2, 5} × 10^k` plus the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<u64>>,
    /// Record every step (horizon at most [`FULL_TRACE_LIMIT`]).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub full_trace: bool,
    pub policy: PolicySpec,
    pub environment: EnvSpec,
}

/// `{1, 2, 5} × 10^k` up to `horizon`, always ending at `horizon`.
pub fn geometric_checkpoints(horizon: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut scale = 1u64;
    'outer: loop {
        for m in [1, 2, 5] {
            let t = m * scale;
            if t >= horizon {
                break 'outer;
            }
            out.push(t);
        }
        scale *= 10;
    }
    if horizon >= 1 {
        out.push(horizon);
    }
    out
}

impl ExperimentConfig {
    pub fn new(
        experiment_id: impl Into<String>,
        policy: PolicySpec,
        environment: EnvSpec,
        horizon: u64,
        runs: u64,
        master_seed: u64,
    ) -> Self {
        ExperimentConfig {
            experiment_id: experiment_id.into(),
            horizon,
            runs,
            master_seed,
            checkpoints: None,
            full_trace: false,
            policy,
            environment,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| BanditError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| BanditError::Serialization(e.to_string()))
    }

    /// Compact JSON of the policy and environment parameters.
    pub fn param_json(&self) -> String {
        serde_json::json!({ "policy": self.policy, "environment": self.environment }).to_string()
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(BanditError::Config("horizon must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(BanditError::Config("runs must be at least 1".into()));
        }
        if self.full_trace && self.horizon > FULL_TRACE_LIMIT {
            return Err(BanditError::Config(format!(
                "full traces are limited to horizons of at most {FULL_TRACE_LIMIT}"
            )));
        }
        if let Some(points) = &self.checkpoints {
            if points.windows(2).any(|w| w[0] >= w[1]) {
                return Err(BanditError::Config(
                    "checkpoints must be strictly increasing".into(),
                ));
            }
            if let Some(&bad) = points.iter().find(|&&t| t == 0 || t > self.horizon) {
                return Err(BanditError::Config(format!(
                    "checkpoint {bad} outside [1, {}]",
                    self.horizon
                )));
            }
        }
        self.policy.validate()?;
        self.environment.validate()?;
        let linear_env = matches!(self.environment, EnvSpec::Factorial { .. });
        if self.policy.is_linear() != linear_env {
            return Err(BanditError::Config(format!(
                "policy {} is incompatible with environment {}",
                self.policy.label(),
                self.environment.label()
            )));
        }
        Ok(())
    }

    /// The steps at which traces are recorded.
    pub fn resolved_checkpoints(&self) -> Vec<u64> {
        if self.full_trace {
            (1..=self.horizon).collect()
        } else {
            self.checkpoints
                .clone()
                .unwrap_or_else(|| geometric_checkpoints(self.horizon))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bernoulli_config() -> ExperimentConfig {
        ExperimentConfig::new(
            "unit",
            PolicySpec::bts(100),
            EnvSpec::Bernoulli {
                arms: 10,
                epsilon: 0.1,
                optimal: 0,
            },
            1000,
            4,
            7,
        )
    }

    #[test]
    fn geometric_grid() {
        assert_eq!(geometric_checkpoints(1), vec![1]);
        assert_eq!(geometric_checkpoints(10), vec![1, 2, 5, 10]);
        assert_eq!(
            geometric_checkpoints(300),
            vec![1, 2, 5, 10, 20, 50, 100, 200, 300]
        );
        assert_eq!(geometric_checkpoints(100_000).len(), 16);
    }

    #[test]
    fn toml_round_trip() {
        let mut config = bernoulli_config();
        config.checkpoints = Some(vec![1, 10, 1000]);
        let text = config.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), config);
    }

    #[test]
    fn parses_handwritten_file() {
        let text = r#"
            experiment_id = "demo"
            horizon = 500
            runs = 3
            master_seed = 1

            [policy]
            kind = "bts"
            J = 10

            [environment]
            kind = "bernoulli"
            K = 5
            epsilon = 0.2
        "#;
        let config = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(config.policy, PolicySpec::bts(10));
        assert_eq!(config.resolved_checkpoints().last(), Some(&500));
    }

    #[test]
    fn rejects_invalid_configs() {
        let check = |f: &dyn Fn(&mut ExperimentConfig)| {
            let mut c = bernoulli_config();
            f(&mut c);
            let err = c.validate().unwrap_err();
            assert_eq!(err.exit_code(), 2, "{err}");
        };
        check(&|c| c.horizon = 0);
        check(&|c| c.runs = 0);
        check(&|c| c.checkpoints = Some(vec![5, 5]));
        check(&|c| c.checkpoints = Some(vec![0, 5]));
        check(&|c| c.checkpoints = Some(vec![2000]));
        check(&|c| c.policy = PolicySpec::bts(0));
        check(&|c| c.policy = PolicySpec::BayesLinear);
        check(&|c| c.environment = EnvSpec::Factorial { gamma: 1.0 });
        check(&|c| {
            c.environment = EnvSpec::Bernoulli {
                arms: 3,
                epsilon: 0.1,
                optimal: 3,
            }
        });
        check(&|c| {
            c.full_trace = true;
            c.horizon = FULL_TRACE_LIMIT + 1;
        });
        assert!(ExperimentConfig::from_toml_str("horizon = 3").is_err());
    }

    #[test]
    fn full_trace_lists_every_step() {
        let mut c = bernoulli_config();
        c.horizon = 7;
        c.full_trace = true;
        assert_eq!(c.resolved_checkpoints(), (1..=7).collect::<Vec<_>>());
    }
}
