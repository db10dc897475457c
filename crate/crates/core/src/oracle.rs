//! Exact double-or-nothing bootstrap distributions for Bernoulli data.
//!
//! For `s` successes and `f` failures, a double-or-nothing replicate keeps
//! `s* ~ Binomial(s, 1/2)` successes and `f* ~ Binomial(f, 1/2)` failures.
//! [`donb_pmf_fixed_data`] enumerates the replicate estimate for fixed data;
//! [`expected_donb_pmf`] additionally averages over data drawn with true
//! success probability `theta`. Both are exact up to double-precision
//! rounding (compensated accumulation) and cost O(n³) at worst.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, Continuous, ContinuousCDF};
use statrs::function::factorial::binomial;

use crate::error::{BanditError, Result};

/// Largest sample size the enumeration accepts.
pub const MAX_N: u64 = 256;

/// Support values closer than this are merged into one atom.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Finite distribution on strictly increasing support values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePmf {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscretePmf {
    /// Build from `(value, probability)` atoms, merging values that agree
    /// within [`MERGE_TOLERANCE`].
    pub fn from_atoms(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.iter().any(|&(v, p)| !v.is_finite() || !p.is_finite()) {
            return Err(BanditError::NonFinite);
        }
        if atoms.iter().any(|&(_, p)| p < 0.0) {
            return Err(BanditError::InvalidParameter("negative probability".into()));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::new();
        let mut sums: Vec<CompensatedSum> = Vec::new();
        for (v, p) in atoms {
            match support.last() {
                Some(&last) if (v - last).abs() <= MERGE_TOLERANCE => {
                    sums.last_mut().expect("paired").add(p)
                }
                _ => {
                    support.push(v);
                    let mut s = CompensatedSum::default();
                    s.add(p);
                    sums.push(s);
                }
            }
        }
        Ok(DiscretePmf {
            support,
            probs: sums.iter().map(CompensatedSum::value).collect(),
        })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.probs
            .iter()
            .copied()
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn mean(&self) -> f64 {
        self.iter()
            .map(|(v, p)| v * p)
            .collect::<CompensatedSum>()
            .value()
    }

    /// Probability of the atom at `value` (zero if absent).
    pub fn prob_at(&self, value: f64) -> f64 {
        self.iter()
            .find(|&(v, _)| (v - value).abs() <= MERGE_TOLERANCE)
            .map_or(0.0, |(_, p)| p)
    }

    /// Total-variation distance between two discrete distributions.
    pub fn tv_distance(&self, other: &DiscretePmf) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = CompensatedSum::default();
        while i < self.len() || j < other.len() {
            let a = self.support.get(i).copied().unwrap_or(f64::INFINITY);
            let b = other.support.get(j).copied().unwrap_or(f64::INFINITY);
            if (a - b).abs() <= MERGE_TOLERANCE {
                acc.add((self.probs[i] - other.probs[j]).abs());
                i += 1;
                j += 1;
            } else if a < b {
                acc.add(self.probs[i]);
                i += 1;
            } else {
                acc.add(other.probs[j]);
                j += 1;
            }
        }
        0.5 * acc.value()
    }
}

/// Point estimate computed from a replicate's kept successes and failures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum EstimatorMode {
    /// `(α₀ + s*) / (α₀ + β₀ + s* + f*)`, as in the replicate bank.
    PriorRegularized { alpha0: f64, beta0: f64 },
    /// `s* / (s* + f*)`, conditioned on the replicate keeping at least one
    /// observation.
    PureMean,
}

impl EstimatorMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EstimatorMode::PriorRegularized { alpha0, beta0 }
                if !(alpha0 > 0.0 && beta0 > 0.0 && alpha0.is_finite() && beta0.is_finite()) =>
            {
                Err(BanditError::InvalidBetaShape {
                    alpha: alpha0,
                    beta: beta0,
                })
            }
            _ => Ok(()),
        }
    }

    fn estimate(&self, kept_successes: u64, kept_failures: u64) -> Option<f64> {
        let (s, f) = (kept_successes as f64, kept_failures as f64);
        match *self {
            EstimatorMode::PriorRegularized { alpha0, beta0 } => {
                Some((alpha0 + s) / (alpha0 + beta0 + s + f))
            }
            EstimatorMode::PureMean if kept_successes + kept_failures == 0 => None,
            EstimatorMode::PureMean => Some(s / (s + f)),
        }
    }
}

impl fmt::Display for EstimatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorMode::PriorRegularized { alpha0, beta0 } => {
                write!(f, "prior:{alpha0}:{beta0}")
            }
            EstimatorMode::PureMean => f.write_str("pure"),
        }
    }
}

impl FromStr for EstimatorMode {
    type Err = BanditError;

    /// `pure`, `prior` (α₀ = β₀ = 1) or `prior:<α₀>:<β₀>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            BanditError::Config(format!(
                "unknown estimator mode '{s}' (expected pure, prior or prior:<a>:<b>)"
            ))
        };
        let mode = match s {
            "pure" | "pure-mean" => EstimatorMode::PureMean,
            "prior" => EstimatorMode::PriorRegularized {
                alpha0: 1.0,
                beta0: 1.0,
            },
            other => {
                let rest = other.strip_prefix("prior:").ok_or_else(bad)?;
                let (a, b) = rest.split_once(':').ok_or_else(bad)?;
                EstimatorMode::PriorRegularized {
                    alpha0: a.parse().map_err(|_| bad())?,
                    beta0: b.parse().map_err(|_| bad())?,
                }
            }
        };
        mode.validate()?;
        Ok(mode)
    }
}

/// `Binomial(n, 1/2)` probabilities for `k = 0..=n`, by halving Pascal rows.
fn half_binomial_rows(max_n: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![1.0]];
    for n in 1..=max_n {
        let prev = &rows[n - 1];
        let row = (0..=n)
            .map(|k| {
                let left = if k > 0 { prev[k - 1] } else { 0.0 };
                let right = prev.get(k).copied().unwrap_or(0.0);
                0.5 * (left + right)
            })
            .collect();
        rows.push(row);
    }
    rows
}

fn check_size(n: u64) -> Result<()> {
    if n > MAX_N {
        Err(BanditError::InvalidParameter(format!(
            "enumeration supports n <= {MAX_N}, got {n}"
        )))
    } else {
        Ok(())
    }
}

/// Accumulated `P(s*, f*)` over a triangular grid; converted to a pmf of
/// the estimate.
struct KeptTable {
    max_s: usize,
    cells: Vec<CompensatedSum>,
}

impl KeptTable {
    fn new(max_s: usize, max_f: usize) -> Self {
        KeptTable {
            max_s,
            cells: vec![CompensatedSum::default(); (max_s + 1) * (max_f + 1)],
        }
    }

    fn add(&mut self, kept_s: usize, kept_f: usize, p: f64) {
        self.cells[kept_f * (self.max_s + 1) + kept_s].add(p);
    }

    fn into_pmf(self, mode: EstimatorMode, scale: f64) -> Result<DiscretePmf> {
        let width = self.max_s + 1;
        let atoms = self
            .cells
            .iter()
            .enumerate()
            .filter_map(|(idx, cell)| {
                let p = cell.value();
                if p == 0.0 {
                    return None;
                }
                let (kept_s, kept_f) = ((idx % width) as u64, (idx / width) as u64);
                mode.estimate(kept_s, kept_f).map(|v| (v, p * scale))
            })
            .collect();
        DiscretePmf::from_atoms(atoms)
    }
}

/// Exact distribution of one double-or-nothing replicate's estimate given
/// `successes` and `failures`.
pub fn donb_pmf_fixed_data(
    successes: u64,
    failures: u64,
    mode: EstimatorMode,
) -> Result<DiscretePmf> {
    mode.validate()?;
    let n = successes + failures;
    if n == 0 {
        return Err(BanditError::NoData);
    }
    check_size(n)?;
    let (s, f) = (successes as usize, failures as usize);
    let rows = half_binomial_rows(s.max(f));
    let mut table = KeptTable::new(s, f);
    for (a, &pa) in rows[s].iter().enumerate() {
        for (b, &pb) in rows[f].iter().enumerate() {
            table.add(a, b, pa * pb);
        }
    }
    let scale = match mode {
        EstimatorMode::PureMean => 1.0 / (1.0 - 0.5f64.powi(n as i32)),
        EstimatorMode::PriorRegularized { .. } => 1.0,
    };
    table.into_pmf(mode, scale)
}

/// Distribution of a replicate estimate after `n` Bernoulli(`theta`)
/// observations, averaging over the data as well as the replicate weights.
pub fn expected_donb_pmf(n: u64, theta: f64, mode: EstimatorMode) -> Result<DiscretePmf> {
    mode.validate()?;
    if n == 0 {
        return Err(BanditError::NoData);
    }
    check_size(n)?;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(BanditError::InvalidParameter(format!(
            "theta must lie in (0, 1), got {theta}"
        )));
    }
    let n_us = n as usize;
    let rows = half_binomial_rows(n_us);
    let mut table = KeptTable::new(n_us, n_us);
    for s in 0..=n_us {
        let f = n_us - s;
        let weight = binomial(n, s as u64) * theta.powi(s as i32) * (1.0 - theta).powi(f as i32);
        for (a, &pa) in rows[s].iter().enumerate() {
            let wa = weight * pa;
            for (b, &pb) in rows[f].iter().enumerate() {
                table.add(a, b, wa * pb);
            }
        }
    }
    // s + f = n in every stratum, so the empty-replicate probability 2^-n is
    // common to all of them and conditioning is one global rescale.
    let scale = match mode {
        EstimatorMode::PureMean => 1.0 / (1.0 - 0.5f64.powi(n as i32)),
        EstimatorMode::PriorRegularized { .. } => 1.0,
    };
    table.into_pmf(mode, scale)
}

fn reference_beta(theta: f64, n: u64) -> Result<Beta> {
    let (a, b) = (theta * n as f64, (1.0 - theta) * n as f64);
    if !(a > 0.0 && b > 0.0) {
        return Err(BanditError::InvalidBetaShape { alpha: a, beta: b });
    }
    Beta::new(a, b).map_err(|_| BanditError::InvalidBetaShape { alpha: a, beta: b })
}

/// Density of `Beta(θn, (1-θ)n)` at each grid point (zero outside `[0, 1]`).
pub fn beta_reference_density(theta: f64, n: u64, grid: &[f64]) -> Result<Vec<f64>> {
    let beta = reference_beta(theta, n)?;
    Ok(grid
        .iter()
        .map(|&x| {
            if (0.0..=1.0).contains(&x) {
                beta.pdf(x)
            } else {
                0.0
            }
        })
        .collect())
}

/// How the continuous Beta reference is discretized for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binning {
    /// `bins` cells of equal Beta mass (Beta quantiles). Atoms of the pmf are
    /// assigned to the cell containing their Beta CDF value; an atom sitting
    /// on a cell boundary is split evenly between the two cells.
    EqualMass { bins: usize },
    /// One cell per support atom, bounded by midpoints between neighbouring
    /// atoms (and by 0 and 1 at the ends); the Beta mass of each cell is
    /// compared with the atom's probability.
    SupportMidpoints,
}

impl Default for Binning {
    fn default() -> Self {
        Binning::EqualMass { bins: 10 }
    }
}

const BOUNDARY_TOLERANCE: f64 = 1e-9;

fn equal_mass_histogram(pmf: &DiscretePmf, beta: &Beta, bins: usize) -> Vec<f64> {
    let mut hist = vec![CompensatedSum::default(); bins];
    for (v, p) in pmf.iter() {
        let c = beta.cdf(v.clamp(0.0, 1.0)) * bins as f64;
        let k = c.round();
        if k > 0.0 && (k as usize) < bins && (c - k).abs() < BOUNDARY_TOLERANCE {
            hist[k as usize - 1].add(0.5 * p);
            hist[k as usize].add(0.5 * p);
        } else {
            hist[(c.max(0.0) as usize).min(bins - 1)].add(p);
        }
    }
    hist.iter().map(CompensatedSum::value).collect()
}

fn midpoint_cell_masses(support: &[f64], beta: &Beta) -> Vec<f64> {
    let mut edges = Vec::with_capacity(support.len() + 1);
    edges.push(0.0);
    edges.extend(support.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    edges.push(1.0);
    edges
        .windows(2)
        .map(|w| beta.cdf(w[1]) - beta.cdf(w[0]))
        .collect()
}

/// The Beta reference as a pmf under `binning`: equal-mass cells are
/// represented by their median quantile, midpoint cells by `support`.
pub fn discretized_beta(
    theta: f64,
    n: u64,
    binning: Binning,
    support: &[f64],
) -> Result<DiscretePmf> {
    let beta = reference_beta(theta, n)?;
    match binning {
        Binning::EqualMass { bins } => {
            check_bins(bins)?;
            let atoms = (0..bins)
                .map(|k| {
                    (
                        beta.inverse_cdf((k as f64 + 0.5) / bins as f64),
                        1.0 / bins as f64,
                    )
                })
                .collect();
            DiscretePmf::from_atoms(atoms)
        }
        Binning::SupportMidpoints => {
            let masses = midpoint_cell_masses(support, &beta);
            DiscretePmf::from_atoms(support.iter().copied().zip(masses).collect())
        }
    }
}

fn check_bins(bins: usize) -> Result<()> {
    if bins == 0 {
        Err(BanditError::InvalidParameter(
            "at least one bin is required".into(),
        ))
    } else {
        Ok(())
    }
}

/// Total-variation distance between `pmf` and `Beta(θn, (1-θ)n)` after
/// discretizing into ten equal-mass cells.
pub fn distribution_distance(pmf: &DiscretePmf, theta: f64, n: u64) -> Result<f64> {
    distribution_distance_with(pmf, theta, n, Binning::default())
}

pub fn distribution_distance_with(
    pmf: &DiscretePmf,
    theta: f64,
    n: u64,
    binning: Binning,
) -> Result<f64> {
    let beta = reference_beta(theta, n)?;
    if pmf.is_empty() {
        return Err(BanditError::NoData);
    }
    let diffs: CompensatedSum = match binning {
        Binning::EqualMass { bins } => {
            check_bins(bins)?;
            let target = 1.0 / bins as f64;
            equal_mass_histogram(pmf, &beta, bins)
                .into_iter()
                .map(|p| (p - target).abs())
                .collect()
        }
        Binning::SupportMidpoints => midpoint_cell_masses(pmf.support(), &beta)
            .into_iter()
            .zip(pmf.probs())
            .map(|(q, p)| (p - q).abs())
            .collect(),
    };
    Ok(0.5 * diffs.value())
}
