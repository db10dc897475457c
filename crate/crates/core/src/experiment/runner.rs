use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aggregate::AggregateCurve;
use super::config::ExperimentConfig;
use crate::arm::StepRecord;
use crate::error::{BanditError, Result};
use crate::policy::Policy;
use crate::rng::{derive_stream, StreamKey, StreamRole};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: u64,
    pub cum_regret: f64,
    pub cum_reward: f64,
}

/// Cumulative regret and reward of one run at the configured checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub run_index: u64,
    pub points: Vec<TracePoint>,
}

/// Run `run_index` of `config` with the policy it specifies.
pub fn run_episode(config: &ExperimentConfig, run_index: u64) -> Result<RegretTrace> {
    config.validate()?;
    let env = config.environment.build()?;
    let dim = design_dim(env.as_ref());
    let mut policy = config.policy.build(env.num_arms(), dim)?;
    run_episode_with(config, run_index, policy.as_mut(), |_, _| {})
}

fn design_dim(env: &dyn crate::env::Environment) -> usize {
    match env.context() {
        crate::policy::Context::Design(d) => d.dim(),
        crate::policy::Context::Empty => 0,
    }
}

/// Run an episode of `config`'s environment with an arbitrary policy,
/// calling `observer` after every step. The policy spec in `config` is
/// ignored.
pub fn run_episode_with<F>(
    config: &ExperimentConfig,
    run_index: u64,
    policy: &mut dyn Policy,
    mut observer: F,
) -> Result<RegretTrace>
where
    F: FnMut(&StepRecord, &dyn Policy),
{
    let env = config.environment.build()?;
    let checkpoints = config.resolved_checkpoints();
    let key = |role| StreamKey::new(config.master_seed, run_index, role);
    let mut env_rng = derive_stream(key(StreamRole::Environment));
    let mut policy_rng = derive_stream(key(StreamRole::Policy));
    let mut weight_rng = derive_stream(key(StreamRole::ReplicateWeights));

    let mut points = Vec::with_capacity(checkpoints.len());
    let mut pending = checkpoints.iter().copied().peekable();
    let (mut cum_regret, mut cum_reward) = (0.0, 0.0);
    for t in 1..=config.horizon {
        let context = env.context();
        let arm = policy.select(context, &mut policy_rng)?;
        let outcome = env.pull(arm, &mut env_rng)?;
        policy.update(context, arm, outcome.reward, &mut weight_rng)?;
        let record = StepRecord {
            t,
            arm,
            reward: outcome.reward,
            counterfactual_optimal: outcome.counterfactual_optimal,
        };
        cum_regret += record.regret();
        cum_reward += record.reward.value();
        observer(&record, policy);
        if pending.next_if_eq(&t).is_some() {
            points.push(TracePoint {
                t,
                cum_regret,
                cum_reward,
            });
        }
    }
    Ok(RegretTrace { run_index, points })
}

/// Wall time and replicate-update operation counts per fixed-size window of
/// steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingProfile {
    pub window: u64,
    pub window_nanos: Vec<u64>,
    pub window_ops: Vec<u64>,
}

pub fn run_timed_episode(
    config: &ExperimentConfig,
    run_index: u64,
    window: u64,
) -> Result<(RegretTrace, TimingProfile)> {
    if window == 0 {
        return Err(BanditError::InvalidParameter(
            "timing window must be positive".into(),
        ));
    }
    config.validate()?;
    let env = config.environment.build()?;
    let mut policy = config
        .policy
        .build(env.num_arms(), design_dim(env.as_ref()))?;
    let mut profile = TimingProfile {
        window,
        window_nanos: Vec::new(),
        window_ops: Vec::new(),
    };
    let mut mark = Instant::now();
    let mut ops_mark = 0;
    let trace = run_episode_with(config, run_index, policy.as_mut(), |record, policy| {
        if record.t % window == 0 {
            let now = Instant::now();
            profile.window_nanos.push((now - mark).as_nanos() as u64);
            mark = now;
            let ops = policy.replicate_update_ops();
            profile.window_ops.push(ops - ops_mark);
            ops_mark = ops;
        }
    })?;
    Ok((trace, profile))
}

/// Traces of every run plus the aggregated regret curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub checkpoints: Vec<u64>,
    pub traces: Vec<RegretTrace>,
    pub regret: AggregateCurve,
}

impl ExperimentResult {
    fn from_traces(config: &ExperimentConfig, traces: Vec<RegretTrace>) -> Result<Self> {
        let checkpoints = config.resolved_checkpoints();
        let regret = aggregate(&checkpoints, &traces, |p| p.cum_regret)?;
        Ok(ExperimentResult {
            config: config.clone(),
            checkpoints,
            traces,
            regret,
        })
    }

    pub fn reward(&self) -> Result<AggregateCurve> {
        aggregate(&self.checkpoints, &self.traces, |p| p.cum_reward)
    }
}

fn aggregate(
    checkpoints: &[u64],
    traces: &[RegretTrace],
    value: impl Fn(&TracePoint) -> f64,
) -> Result<AggregateCurve> {
    let values: Vec<Vec<f64>> = traces
        .iter()
        .map(|tr| tr.points.iter().map(&value).collect())
        .collect();
    AggregateCurve::from_runs(checkpoints, &values)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(BanditError::Config(
            "at least one worker is required".into(),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BanditError::InvalidParameter(format!("thread pool: {e}")))
}

/// Run every replication of `config` on `workers` threads. Output depends
/// only on the config, never on the worker count.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<ExperimentResult> {
    config.validate()?;
    let traces = pool(workers)?.install(|| {
        (0..config.runs)
            .into_par_iter()
            .map(|r| run_episode(config, r))
            .collect::<Result<Vec<_>>>()
    })?;
    ExperimentResult::from_traces(config, traces)
}

/// Two policies run against identically seeded environments, with the
/// per-run difference in cumulative reward (A − B).
#[derive(Debug, Clone, PartialEq)]
pub struct PairedResult {
    pub a: ExperimentResult,
    pub b: ExperimentResult,
    pub difference: AggregateCurve,
}

pub fn run_paired_comparison(
    a: &ExperimentConfig,
    b: &ExperimentConfig,
    workers: usize,
) -> Result<PairedResult> {
    let mismatch = |what: &str| BanditError::Config(format!("paired configs differ in {what}"));
    if a.environment != b.environment {
        return Err(mismatch("environment"));
    }
    if a.horizon != b.horizon {
        return Err(mismatch("horizon"));
    }
    if a.runs != b.runs {
        return Err(mismatch("runs"));
    }
    if a.master_seed != b.master_seed {
        return Err(mismatch("master_seed"));
    }
    if a.resolved_checkpoints() != b.resolved_checkpoints() {
        return Err(mismatch("checkpoints"));
    }
    let ra = run_experiment(a, workers)?;
    let rb = run_experiment(b, workers)?;
    let diffs: Vec<Vec<f64>> = ra
        .traces
        .iter()
        .zip(&rb.traces)
        .map(|(ta, tb)| {
            ta.points
                .iter()
                .zip(&tb.points)
                .map(|(pa, pb)| pa.cum_reward - pb.cum_reward)
                .collect()
        })
        .collect();
    let difference = AggregateCurve::from_runs(&ra.checkpoints, &diffs)?;
    Ok(PairedResult {
        a: ra,
        b: rb,
        difference,
    })
}
