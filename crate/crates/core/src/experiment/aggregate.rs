use serde::{Deserialize, Serialize};

use crate::error::{BanditError, Result};

/// z-value of the two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatePoint {
    pub t: u64,
    pub mean: f64,
    /// `None` when only one run contributes.
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub n_runs: u64,
}

impl AggregatePoint {
    pub fn half_width(&self) -> Option<f64> {
        self.ci_high.map(|hi| hi - self.mean)
    }

    pub fn ci_contains(&self, x: f64) -> bool {
        match (self.ci_low, self.ci_high) {
            (Some(lo), Some(hi)) => lo <= x && x <= hi,
            _ => x == self.mean,
        }
    }

    pub fn ci_overlaps(&self, other: &AggregatePoint) -> bool {
        let lo = |p: &AggregatePoint| p.ci_low.unwrap_or(p.mean);
        let hi = |p: &AggregatePoint| p.ci_high.unwrap_or(p.mean);
        lo(self) <= hi(other) && lo(other) <= hi(self)
    }
}

/// Per-checkpoint mean across runs with a normal-approximation 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCurve {
    pub points: Vec<AggregatePoint>,
    /// Set when the curve summarizes a single run and carries no interval.
    pub single_run: bool,
}

impl AggregateCurve {
    /// `values[r][c]` is run `r`'s value at checkpoint `ts[c]`.
    pub fn from_runs(ts: &[u64], values: &[Vec<f64>]) -> Result<Self> {
        if values.is_empty() {
            return Err(BanditError::NoData);
        }
        if let Some(bad) = values.iter().find(|v| v.len() != ts.len()) {
            return Err(BanditError::DimensionMismatch {
                expected: ts.len(),
                got: bad.len(),
            });
        }
        let n = values.len();
        let points = ts
            .iter()
            .enumerate()
            .map(|(c, &t)| {
                let mean = values.iter().map(|v| v[c]).sum::<f64>() / n as f64;
                let (ci_low, ci_high) = if n > 1 {
                    let ss: f64 = values.iter().map(|v| (v[c] - mean).powi(2)).sum();
                    let half = Z95 * (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt();
                    (Some(mean - half), Some(mean + half))
                } else {
                    (None, None)
                };
                AggregatePoint {
                    t,
                    mean,
                    ci_low,
                    ci_high,
                    n_runs: n as u64,
                }
            })
            .collect();
        Ok(AggregateCurve {
            points,
            single_run: n == 1,
        })
    }

    pub fn last(&self) -> Option<&AggregatePoint> {
        self.points.last()
    }

    pub fn at(&self, t: u64) -> Option<&AggregatePoint> {
        self.points.iter().find(|p| p.t == t)
    }
}
