//! `bts`: run bandit simulations, paired comparisons and the exact
//! bootstrap-distribution oracle from the command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bts_core::bernoulli::WeightScheme;
use bts_core::experiment::{
    format_number, preset, preset_names, read_configs, run_experiment, run_paired_comparison,
    write_config, write_results, CurveRecord, EnvSpec, ExperimentConfig, OutputFormat, PolicySpec,
    Scale, TraceRecord,
};
use bts_core::oracle::{
    beta_reference_density, distribution_distance, expected_donb_pmf, EstimatorMode,
};
use bts_core::{BanditError, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bts",
    version,
    about = "Bootstrap Thompson sampling simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment, a config file, or a preset.
    Run(RunArgs),
    /// Paired comparison of two policies on identically seeded environments.
    Compare(CompareArgs),
    /// Exact double-or-nothing bootstrap distribution for Bernoulli data.
    Oracle(OracleArgs),
    /// List presets.
    Presets,
}

#[derive(Args, Clone, Default)]
struct EnvFlags {
    /// Environment kind: bernoulli or factorial.
    #[arg(long)]
    env: Option<String>,
    /// Number of Bernoulli arms.
    #[arg(long = "K")]
    arms: Option<usize>,
    /// Gap between the best Bernoulli arm (0.5) and the others.
    #[arg(long)]
    eps: Option<f64>,
    /// Heteroscedasticity of the factorial environment.
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct ScheduleFlags {
    /// Horizon.
    #[arg(long = "T")]
    horizon: Option<u64>,
    #[arg(long)]
    runs: Option<u64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated step indices, or `all` for every step.
    #[arg(long)]
    checkpoints: Option<String>,
}

#[derive(Args, Clone)]
struct OutputFlags {
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Args)]
struct RunArgs {
    /// Config file (TOML); flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset name, e.g. `fig2-bernoulli(10, 0.1, 1000)`.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// paper or desk.
    #[arg(long, default_value = "desk")]
    scale: String,
    /// beta-ts, bts, bts-inf, linear-bts or bayes-linear.
    #[arg(long)]
    policy: Option<String>,
    #[command(flatten)]
    policy_params: PolicyFlags,
    #[command(flatten)]
    env: EnvFlags,
    #[command(flatten)]
    schedule: ScheduleFlags,
    #[command(flatten)]
    output: OutputFlags,
    /// Experiment id for flag-built configs.
    #[arg(long)]
    id: Option<String>,
}

#[derive(Args, Clone, Default)]
struct PolicyFlags {
    /// Bootstrap replicates.
    #[arg(long = "J")]
    replicates: Option<usize>,
    /// Ridge penalty of linear BTS.
    #[arg(long)]
    lambda: Option<f64>,
    /// Replicate weights of Bernoulli BTS: double-or-nothing, poisson or exponential.
    #[arg(long)]
    weights: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    /// Preset supplying both policies, e.g. `fig4-factorial(1)`.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value = "desk")]
    scale: String,
    /// Policy A (the difference is A − B).
    #[arg(long = "policy-a", required_unless_present = "preset")]
    policy_a: Option<String>,
    #[arg(long = "policy-b", required_unless_present = "preset")]
    policy_b: Option<String>,
    #[command(flatten)]
    policy_params: PolicyFlags,
    #[command(flatten)]
    env: EnvFlags,
    #[command(flatten)]
    schedule: ScheduleFlags,
    #[command(flatten)]
    output: OutputFlags,
}

#[derive(Args)]
struct OracleArgs {
    /// Number of observations.
    #[arg(long)]
    n: u64,
    /// True success probability.
    #[arg(long)]
    theta: f64,
    /// pure, prior or prior:<alpha0>:<beta0>.
    #[arg(long, default_value = "pure")]
    mode: String,
    #[arg(long, default_value = "oracle")]
    out: PathBuf,
    /// Number of points in the Beta density grid.
    #[arg(long, default_value_t = 200)]
    grid: usize,
}

fn weight_scheme(name: &str) -> Result<WeightScheme> {
    match name {
        "double-or-nothing" => Ok(WeightScheme::DoubleOrNothing),
        "poisson" => Ok(WeightScheme::Poisson),
        "exponential" => Ok(WeightScheme::Exponential),
        other => Err(BanditError::Config(format!(
            "unknown weight scheme '{other}'"
        ))),
    }
}

fn policy_spec(kind: &str, flags: &PolicyFlags) -> Result<PolicySpec> {
    let replicates = flags.replicates.unwrap_or(1000);
    let lambda = flags.lambda.unwrap_or(1.0);
    let weights = flags
        .weights
        .as_deref()
        .map_or(Ok(WeightScheme::DoubleOrNothing), weight_scheme)?;
    Ok(match kind {
        "beta-ts" => PolicySpec::BetaTs {
            alpha0: 1.0,
            beta0: 1.0,
        },
        "bts" => PolicySpec::Bts {
            replicates,
            alpha0: 1.0,
            beta0: 1.0,
            weights,
        },
        "bts-inf" => PolicySpec::BtsInf {
            alpha0: 1.0,
            beta0: 1.0,
        },
        "linear-bts" => PolicySpec::LinearBts { replicates, lambda },
        "bayes-linear" => PolicySpec::BayesLinear,
        other => return Err(BanditError::Config(format!(
            "unknown policy '{other}' (expected beta-ts, bts, bts-inf, linear-bts or bayes-linear)"
        ))),
    })
}

fn env_spec(flags: &EnvFlags) -> Result<EnvSpec> {
    match flags.env.as_deref().unwrap_or("bernoulli") {
        "bernoulli" => Ok(EnvSpec::Bernoulli {
            arms: flags.arms.unwrap_or(10),
            epsilon: flags.eps.unwrap_or(0.1),
            optimal: 0,
        }),
        "factorial" => Ok(EnvSpec::Factorial {
            gamma: flags.gamma.unwrap_or(1.0),
        }),
        other => Err(BanditError::Config(format!(
            "unknown environment '{other}' (expected bernoulli or factorial)"
        ))),
    }
}

/// Apply explicitly given flags on top of a config from a file or preset.
fn override_config(
    config: &mut ExperimentConfig,
    policy: &PolicyFlags,
    env: &EnvFlags,
    schedule: &ScheduleFlags,
) -> Result<()> {
    if env.env.is_some() {
        config.environment = env_spec(env)?;
    }
    match &mut config.environment {
        EnvSpec::Bernoulli { arms, epsilon, .. } => {
            *arms = env.arms.unwrap_or(*arms);
            *epsilon = env.eps.unwrap_or(*epsilon);
        }
        EnvSpec::Factorial { gamma } => *gamma = env.gamma.unwrap_or(*gamma),
    }
    match &mut config.policy {
        PolicySpec::Bts { replicates, .. } => {
            *replicates = policy.replicates.unwrap_or(*replicates)
        }
        PolicySpec::LinearBts { replicates, lambda } => {
            *replicates = policy.replicates.unwrap_or(*replicates);
            *lambda = policy.lambda.unwrap_or(*lambda);
        }
        _ => {}
    }
    if let (Some(w), PolicySpec::Bts { weights, .. }) = (&policy.weights, &mut config.policy) {
        *weights = weight_scheme(w)?;
    }
    config.horizon = schedule.horizon.unwrap_or(config.horizon);
    config.runs = schedule.runs.unwrap_or(config.runs);
    config.master_seed = schedule.seed.unwrap_or(config.master_seed);
    match schedule.checkpoints.as_deref() {
        None => {}
        Some("all") => {
            config.full_trace = true;
            config.checkpoints = None;
        }
        Some(list) => {
            let points = list
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<u64>()
                        .map_err(|_| BanditError::Config(format!("bad checkpoint '{s}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            config.full_trace = false;
            config.checkpoints = Some(points);
        }
    }
    config.validate()
}

fn read_config_file(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = fs::read_to_string(path).map_err(|e| BanditError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    read_configs(&text)
}

fn resolve_run(args: &RunArgs) -> Result<Vec<ExperimentConfig>> {
    let mut configs = if let Some(name) = &args.preset {
        preset(name, args.scale.parse()?)?
    } else if let Some(path) = &args.config {
        read_config_file(path)?
    } else {
        let policy = policy_spec(args.policy.as_deref().unwrap_or("bts"), &args.policy_params)?;
        let env = env_spec(&args.env)?;
        let id = args.id.clone().unwrap_or_else(|| format!("{env}/{policy}"));
        vec![ExperimentConfig::new(id, policy, env, 10_000, 10, 1)]
    };
    if args.policy.is_some() && (args.preset.is_some() || args.config.is_some()) {
        let policy = policy_spec(
            args.policy.as_deref().unwrap_or_default(),
            &args.policy_params,
        )?;
        for c in &mut configs {
            c.policy = policy.clone();
        }
    }
    for c in &mut configs {
        override_config(c, &args.policy_params, &args.env, &args.schedule)?;
    }
    Ok(configs)
}

fn run(args: RunArgs) -> Result<()> {
    let configs = resolve_run(&args)?;
    let format: OutputFormat = args.output.format.parse()?;
    let mut traces = Vec::new();
    let mut curves = Vec::new();
    for config in &configs {
        let result = run_experiment(config, args.output.workers)?;
        if let Some(p) = result.regret.last() {
            println!(
                "{}: mean cumulative regret at t={} is {:.3}",
                config.experiment_id, p.t, p.mean
            );
        }
        traces.push(TraceRecord::of(&result));
        curves.push(CurveRecord::regret(&result));
    }
    let paths = write_results(&traces, &curves, format, &args.output.out)?;
    write_config(&configs, &args.output.out)?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let (mut a, mut b) = if let Some(name) = &args.preset {
        let mut configs = preset(name, args.scale.parse()?)?;
        if configs.len() != 2 {
            return Err(BanditError::Config(format!(
                "preset {name} does not define a pair"
            )));
        }
        let b = configs.pop().expect("two configs");
        (configs.pop().expect("two configs"), b)
    } else {
        let env = env_spec(&args.env)?;
        let pa = policy_spec(
            args.policy_a.as_deref().unwrap_or_default(),
            &args.policy_params,
        )?;
        let pb = policy_spec(
            args.policy_b.as_deref().unwrap_or_default(),
            &args.policy_params,
        )?;
        let make = |p: PolicySpec| {
            ExperimentConfig::new(format!("{env}/{p}"), p, env.clone(), 10_000, 100, 1)
        };
        (make(pa), make(pb))
    };
    override_config(&mut a, &args.policy_params, &args.env, &args.schedule)?;
    override_config(&mut b, &args.policy_params, &args.env, &args.schedule)?;
    let format: OutputFormat = args.output.format.parse()?;
    let paired = run_paired_comparison(&a, &b, args.output.workers)?;
    let id = format!("{}-vs-{}", a.experiment_id, b.policy);
    if let Some(p) = paired.difference.last() {
        println!(
            "{id}: mean reward difference at t={} is {:.3} (95% CI {})",
            p.t,
            p.mean,
            match (p.ci_low, p.ci_high) {
                (Some(lo), Some(hi)) => format!("{lo:.3} to {hi:.3}"),
                _ => "undefined for one run".to_string(),
            }
        );
    }
    let curves = vec![
        CurveRecord::difference(&paired, id),
        CurveRecord::regret(&paired.a),
        CurveRecord::regret(&paired.b),
    ];
    let traces = vec![TraceRecord::of(&paired.a), TraceRecord::of(&paired.b)];
    write_results(&traces, &curves, format, &args.output.out)?;
    write_config(&[a, b], &args.output.out)?;
    Ok(())
}

fn oracle(args: OracleArgs) -> Result<()> {
    let mode: EstimatorMode = args.mode.parse()?;
    if args.grid == 0 {
        return Err(BanditError::Config("grid needs at least one point".into()));
    }
    let pmf = expected_donb_pmf(args.n, args.theta, mode)?;
    let grid: Vec<f64> = (0..args.grid)
        .map(|k| (k as f64 + 0.5) / args.grid as f64)
        .collect();
    let density = beta_reference_density(args.theta, args.n, &grid)?;
    let out = &args.out;
    fs::create_dir_all(out).map_err(|e| BanditError::Io {
        path: out.clone(),
        source: e,
    })?;
    let mut pmf_csv = String::from("value,prob\n");
    for (v, p) in pmf.iter() {
        pmf_csv.push_str(&format!("{},{}\n", format_number(v), format_number(p)));
    }
    let mut beta_csv = String::from("grid,density\n");
    for (x, d) in grid.iter().zip(&density) {
        beta_csv.push_str(&format!("{},{}\n", format_number(*x), format_number(*d)));
    }
    for (name, text) in [("pmf.csv", pmf_csv), ("beta.csv", beta_csv)] {
        let path = out.join(name);
        fs::write(&path, text).map_err(|e| BanditError::Io { path, source: e })?;
    }
    println!(
        "n={} theta={} mode={mode}: {} support points, mean {:.6}, TV to Beta reference {:.6}",
        args.n,
        args.theta,
        pmf.len(),
        pmf.mean(),
        distribution_distance(&pmf, args.theta, args.n)?
    );
    Ok(())
}

fn presets() {
    for (name, about) in preset_names() {
        println!("{name:<28} {about}");
    }
    println!("scales: {} (T=1e6 Bernoulli / 1e4 factorial, 1000 / 100 runs), {} (T=1e5 / 1e4, 200 / 100 runs)", Scale::Paper, Scale::Desk);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Compare(args) => compare(args),
        Command::Oracle(args) => oracle(args),
        Command::Presets => {
            presets();
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
