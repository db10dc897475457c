use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::aggregate::AggregateCurve;
use super::config::ExperimentConfig;
use super::runner::{ExperimentResult, PairedResult, RegretTrace};
use crate::error::{BanditError, Result};

pub const AGGREGATE_HEADER: [&str; 9] = [
    "experiment_id",
    "policy",
    "env",
    "param_json",
    "t",
    "mean",
    "ci_low",
    "ci_high",
    "n_runs",
];
pub const TRACE_HEADER: [&str; 5] = ["experiment_id", "run", "t", "cum_regret", "cum_reward"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = BanditError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(BanditError::Config(format!(
                "unknown format '{other}' (expected csv or json)"
            ))),
        }
    }
}

impl OutputFormat {
    fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// An aggregate curve with the labels written alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRecord {
    pub experiment_id: String,
    pub policy: String,
    pub env: String,
    pub param_json: String,
    pub curve: AggregateCurve,
}

impl CurveRecord {
    /// The regret curve of an experiment.
    pub fn regret(result: &ExperimentResult) -> Self {
        let c = &result.config;
        CurveRecord {
            experiment_id: c.experiment_id.clone(),
            policy: c.policy.to_string(),
            env: c.environment.to_string(),
            param_json: c.param_json(),
            curve: result.regret.clone(),
        }
    }

    /// The cumulative-reward difference (A − B) of a paired comparison.
    pub fn difference(paired: &PairedResult, experiment_id: impl Into<String>) -> Self {
        let (a, b) = (&paired.a.config, &paired.b.config);
        CurveRecord {
            experiment_id: experiment_id.into(),
            policy: format!("{}-minus-{}", a.policy, b.policy),
            env: a.environment.to_string(),
            param_json: serde_json::json!({
                "a": a.policy,
                "b": b.policy,
                "environment": a.environment,
                "metric": "cum_reward_difference",
            })
            .to_string(),
            curve: paired.difference.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub experiment_id: String,
    pub traces: Vec<RegretTrace>,
}

impl TraceRecord {
    pub fn of(result: &ExperimentResult) -> Self {
        TraceRecord {
            experiment_id: result.config.experiment_id.clone(),
            traces: result.traces.clone(),
        }
    }
}

/// One row of the aggregates file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub experiment_id: String,
    pub policy: String,
    pub env: String,
    pub param_json: String,
    pub t: u64,
    pub mean: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub n_runs: u64,
}

/// One row of the traces file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub experiment_id: String,
    pub run: u64,
    pub t: u64,
    pub cum_regret: f64,
    pub cum_reward: f64,
}

fn aggregate_rows(curves: &[CurveRecord]) -> Vec<AggregateRow> {
    curves
        .iter()
        .flat_map(|c| {
            c.curve.points.iter().map(move |p| AggregateRow {
                experiment_id: c.experiment_id.clone(),
                policy: c.policy.clone(),
                env: c.env.clone(),
                param_json: c.param_json.clone(),
                t: p.t,
                mean: p.mean,
                ci_low: p.ci_low,
                ci_high: p.ci_high,
                n_runs: p.n_runs,
            })
        })
        .collect()
}

fn trace_rows(traces: &[TraceRecord]) -> Vec<TraceRow> {
    traces
        .iter()
        .flat_map(|rec| {
            rec.traces.iter().flat_map(move |tr| {
                tr.points.iter().map(move |p| TraceRow {
                    experiment_id: rec.experiment_id.clone(),
                    run: tr.run_index,
                    t: p.t,
                    cum_regret: p.cum_regret,
                    cum_reward: p.cum_reward,
                })
            })
        })
        .collect()
}

/// 17 significant digits; parses back to the same `f64`.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_optional(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

fn csv_bytes<const N: usize>(
    header: [&str; N],
    rows: impl Iterator<Item = [String; N]>,
) -> Result<Vec<u8>> {
    let ser = |e: csv::Error| BanditError::Serialization(e.to_string());
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(header).map_err(ser)?;
    for row in rows {
        writer.write_record(&row).map_err(ser)?;
    }
    writer
        .into_inner()
        .map_err(|e| BanditError::Serialization(e.to_string()))
}

fn aggregate_csv(rows: &[AggregateRow]) -> Result<Vec<u8>> {
    csv_bytes(
        AGGREGATE_HEADER,
        rows.iter().map(|r| {
            [
                r.experiment_id.clone(),
                r.policy.clone(),
                r.env.clone(),
                r.param_json.clone(),
                r.t.to_string(),
                format_number(r.mean),
                format_optional(r.ci_low),
                format_optional(r.ci_high),
                r.n_runs.to_string(),
            ]
        }),
    )
}

fn trace_csv(rows: &[TraceRow]) -> Result<Vec<u8>> {
    csv_bytes(
        TRACE_HEADER,
        rows.iter().map(|r| {
            [
                r.experiment_id.clone(),
                r.run.to_string(),
                r.t.to_string(),
                format_number(r.cum_regret),
                format_number(r.cum_reward),
            ]
        }),
    )
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| BanditError::io(path, e))
}

/// Write `aggregates.<ext>` and `traces.<ext>` into `dir`, creating it if
/// needed. Returns the paths written.
pub fn write_results(
    traces: &[TraceRecord],
    curves: &[CurveRecord],
    format: OutputFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| BanditError::io(dir, e))?;
    let aggregates = aggregate_rows(curves);
    let trace_rows = trace_rows(traces);
    let (agg_bytes, trace_bytes) = match format {
        OutputFormat::Csv => (aggregate_csv(&aggregates)?, trace_csv(&trace_rows)?),
        OutputFormat::Json => (json_bytes(&aggregates)?, json_bytes(&trace_rows)?),
    };
    let agg_path = dir.join(format!("aggregates.{}", format.extension()));
    let trace_path = dir.join(format!("traces.{}", format.extension()));
    write_file(&agg_path, &agg_bytes)?;
    write_file(&trace_path, &trace_bytes)?;
    Ok(vec![agg_path, trace_path])
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| BanditError::Serialization(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Echo the resolved configs as `config.toml` (an array of `[[experiment]]`
/// tables).
pub fn write_config(configs: &[ExperimentConfig], dir: &Path) -> Result<PathBuf> {
    #[derive(Serialize)]
    struct File<'a> {
        experiment: &'a [ExperimentConfig],
    }
    fs::create_dir_all(dir).map_err(|e| BanditError::io(dir, e))?;
    let text = toml::to_string(&File {
        experiment: configs,
    })
    .map_err(|e| BanditError::Serialization(e.to_string()))?;
    let path = dir.join("config.toml");
    write_file(&path, text.as_bytes())?;
    Ok(path)
}

/// Parse either a single config or an `[[experiment]]` array.
pub fn read_configs(text: &str) -> Result<Vec<ExperimentConfig>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct File {
        experiment: Vec<ExperimentConfig>,
    }
    let configs = match toml::from_str::<File>(text) {
        Ok(file) => file.experiment,
        Err(_) => vec![toml::from_str::<ExperimentConfig>(text)
            .map_err(|e| BanditError::Config(e.to_string()))?],
    };
    for c in &configs {
        c.validate()?;
    }
    Ok(configs)
}

fn read_csv(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => BanditError::io(path, io),
        other => BanditError::Serialization(format!("{other:?}")),
    })?;
    reader
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| BanditError::Serialization(e.to_string()))
}

fn parse<T: FromStr>(field: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| BanditError::Serialization(format!("cannot parse '{field}'")))
}

fn parse_optional(field: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse(field).map(Some)
    }
}

pub fn read_aggregates_csv(path: &Path) -> Result<Vec<AggregateRow>> {
    read_csv(path)?
        .iter()
        .map(|r| {
            Ok(AggregateRow {
                experiment_id: r[0].to_string(),
                policy: r[1].to_string(),
                env: r[2].to_string(),
                param_json: r[3].to_string(),
                t: parse(&r[4])?,
                mean: parse(&r[5])?,
                ci_low: parse_optional(&r[6])?,
                ci_high: parse_optional(&r[7])?,
                n_runs: parse(&r[8])?,
            })
        })
        .collect()
}

pub fn read_traces_csv(path: &Path) -> Result<Vec<TraceRow>> {
    read_csv(path)?
        .iter()
        .map(|r| {
            Ok(TraceRow {
                experiment_id: r[0].to_string(),
                run: parse(&r[1])?,
                t: parse(&r[2])?,
                cum_regret: parse(&r[3])?,
                cum_reward: parse(&r[4])?,
            })
        })
        .collect()
}
