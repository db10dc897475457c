use std::fmt;
use std::str::FromStr;

use super::config::{EnvSpec, ExperimentConfig, PolicySpec};
use crate::error::{BanditError, Result};

/// Master seed used by every preset.
pub const PRESET_SEED: u64 = 2016;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    Paper,
    #[default]
    Desk,
}

impl FromStr for Scale {
    type Err = BanditError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Scale::Paper),
            "desk" => Ok(Scale::Desk),
            other => Err(BanditError::Config(format!(
                "unknown scale '{other}' (expected paper or desk)"
            ))),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Paper => "paper",
            Scale::Desk => "desk",
        })
    }
}

/// Preset names with their optional arguments and defaults.
pub fn preset_names() -> &'static [(&'static str, &'static str)] {
    &[
        ("fig2-bernoulli(K, eps, J)", "Beta-TS, BTS(J) and BTS-inf on a K-armed Bernoulli bandit; defaults K=10, eps=0.1, J=1000"),
        ("fig3-jsweep", "BTS with J in {10, 100, 1000, 10000, inf} on K=10, eps=0.1"),
        ("fig4-factorial(gamma)", "linear BTS (J=1000, lambda=1) and Bayesian linear TS on the 2^3 factorial design; default gamma=1"),
    ]
}

fn unknown(name: &str) -> BanditError {
    let valid: Vec<&str> = preset_names().iter().map(|(n, _)| *n).collect();
    BanditError::Config(format!(
        "unknown preset '{name}'; valid presets: {}",
        valid.join(", ")
    ))
}

/// Split `base(a, b)` into `base` and its arguments.
fn split_args(name: &str) -> Result<(&str, Vec<&str>)> {
    let name = name.trim();
    match name.split_once('(') {
        None => Ok((name, Vec::new())),
        Some((base, rest)) => {
            let inner = rest.strip_suffix(')').ok_or_else(|| unknown(name))?;
            let args = inner
                .split(',')
                .map(str::trim)
                .filter(|a| !a.is_empty())
                .collect();
            Ok((base.trim(), args))
        }
    }
}

fn arg<T: FromStr>(args: &[&str], i: usize, default: T, name: &str) -> Result<T> {
    match args.get(i) {
        None => Ok(default),
        Some(a) => a
            .parse()
            .map_err(|_| BanditError::Config(format!("bad argument '{a}' for preset {name}"))),
    }
}

fn bernoulli_scale(scale: Scale) -> (u64, u64) {
    match scale {
        Scale::Paper => (1_000_000, 1000),
        Scale::Desk => (100_000, 200),
    }
}

fn factorial_scale(_scale: Scale) -> (u64, u64) {
    (10_000, 100)
}

/// Expand a named preset into its experiment configs. All configs of a
/// preset share the environment and master seed, so they can be compared
/// run by run.
pub fn preset(name: &str, scale: Scale) -> Result<Vec<ExperimentConfig>> {
    let (base, args) = split_args(name)?;
    let bernoulli = |arms, epsilon| EnvSpec::Bernoulli {
        arms,
        epsilon,
        optimal: 0,
    };
    let configs = match base {
        "fig2-bernoulli" => {
            if args.len() > 3 {
                return Err(unknown(name));
            }
            let arms: usize = arg(&args, 0, 10, base)?;
            let epsilon: f64 = arg(&args, 1, 0.1, base)?;
            let replicates: usize = arg(&args, 2, 1000, base)?;
            let (horizon, runs) = bernoulli_scale(scale);
            let env = bernoulli(arms, epsilon);
            [
                PolicySpec::BetaTs {
                    alpha0: 1.0,
                    beta0: 1.0,
                },
                PolicySpec::bts(replicates),
                PolicySpec::BtsInf {
                    alpha0: 1.0,
                    beta0: 1.0,
                },
            ]
            .into_iter()
            .map(|policy| {
                let id = format!("fig2-{env}/{policy}");
                ExperimentConfig::new(id, policy, env.clone(), horizon, runs, PRESET_SEED)
            })
            .collect()
        }
        "fig3-jsweep" => {
            if !args.is_empty() {
                return Err(unknown(name));
            }
            let (horizon, runs) = bernoulli_scale(scale);
            let env = bernoulli(10, 0.1);
            [10, 100, 1000, 10_000]
                .map(PolicySpec::bts)
                .into_iter()
                .chain([PolicySpec::BtsInf {
                    alpha0: 1.0,
                    beta0: 1.0,
                }])
                .map(|policy| {
                    let id = format!("fig3-jsweep/{policy}");
                    ExperimentConfig::new(id, policy, env.clone(), horizon, runs, PRESET_SEED)
                })
                .collect()
        }
        "fig4-factorial" => {
            if args.len() > 1 {
                return Err(unknown(name));
            }
            let gamma: f64 = arg(&args, 0, 1.0, base)?;
            let (horizon, runs) = factorial_scale(scale);
            let env = EnvSpec::Factorial { gamma };
            [
                PolicySpec::LinearBts {
                    replicates: 1000,
                    lambda: 1.0,
                },
                PolicySpec::BayesLinear,
            ]
            .into_iter()
            .map(|policy| {
                let id = format!("fig4-{env}/{policy}");
                ExperimentConfig::new(id, policy, env.clone(), horizon, runs, PRESET_SEED)
            })
            .collect()
        }
        _ => return Err(unknown(name)),
    };
    let configs: Vec<ExperimentConfig> = configs;
    for c in &configs {
        c.validate()?;
    }
    Ok(configs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig2_full_scale() {
        let configs = preset("fig2-bernoulli(10, 0.1, 1000)", Scale::Paper).unwrap();
        assert_eq!(configs.len(), 3);
        for c in &configs {
            assert_eq!((c.horizon, c.runs), (1_000_000, 1000));
        }
        assert_eq!(configs[1].policy, PolicySpec::bts(1000));
        assert_eq!(configs[0].policy.label(), "beta-ts");
        assert_eq!(configs[2].policy.label(), "bts-inf");
    }

    #[test]
    fn fig2_arguments() {
        let configs = preset("fig2-bernoulli(100,0.02,10)", Scale::Desk).unwrap();
        assert_eq!(
            configs[0].environment,
            EnvSpec::Bernoulli {
                arms: 100,
                epsilon: 0.02,
                optimal: 0
            }
        );
        assert_eq!(configs[1].policy, PolicySpec::bts(10));
        assert_eq!((configs[0].horizon, configs[0].runs), (100_000, 200));
    }

    #[test]
    fn fig4_full_scale() {
        let configs = preset("fig4-factorial(1)", Scale::Paper).unwrap();
        assert_eq!((configs[0].horizon, configs[0].runs), (10_000, 100));
        assert_eq!(
            configs[0].policy,
            PolicySpec::LinearBts {
                replicates: 1000,
                lambda: 1.0
            }
        );
        assert_eq!(configs[1].policy, PolicySpec::BayesLinear);
        assert_eq!(configs[0].environment, EnvSpec::Factorial { gamma: 1.0 });
    }

    #[test]
    fn jsweep_differs_only_in_replicates() {
        let configs = preset("fig3-jsweep", Scale::Desk).unwrap();
        assert_eq!(configs.len(), 5);
        let labels: Vec<String> = configs.iter().map(|c| c.policy.to_string()).collect();
        assert_eq!(
            labels,
            ["bts-J10", "bts-J100", "bts-J1000", "bts-J10000", "bts-inf"]
        );
        for c in &configs {
            assert_eq!(c.environment, configs[0].environment);
            assert_eq!(
                (c.horizon, c.runs, c.master_seed),
                (100_000, 200, PRESET_SEED)
            );
        }
    }

    #[test]
    fn unknown_preset_lists_names() {
        let err = preset("fig9", Scale::Desk).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        for (name, _) in preset_names() {
            assert!(msg.contains(name), "{msg}");
        }
        assert!(preset("fig2-bernoulli(10, x)", Scale::Desk).is_err());
        assert!(preset("fig3-jsweep(3)", Scale::Desk).is_err());
        assert!("huge".parse::<Scale>().is_err());
    }
}
