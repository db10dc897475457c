//! Linear-model policies for arms described by feature rows.
//!
//! [`LinearBts`] keeps `J` online ridge accumulators, each fed a
//! double-or-nothing half of the data, and plays greedily against the ridge
//! solution of one uniformly chosen replicate per round. [`BayesLinear`] is
//! conjugate Gaussian Thompson sampling with an `N(0, I)` prior and unit noise
//! variance.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use crate::arm::{ArmId, Reward};
use crate::error::{BanditError, Result};
use crate::policy::{Context, Policy};
use crate::select::argmax_random_tiebreak;

/// Feature rows of every arm (`K × d`).
#[derive(Debug, Clone, PartialEq)]
pub struct ArmDesign {
    rows: DMatrix<f64>,
}

impl ArmDesign {
    pub fn new(rows: DMatrix<f64>) -> Result<Self> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(BanditError::EmptyCandidates);
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(BanditError::NonFinite);
        }
        Ok(ArmDesign { rows })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(BanditError::DimensionMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(k, d, |i, j| rows[i][j]))
    }

    pub fn num_arms(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn row(&self, arm: ArmId) -> Result<Vec<f64>> {
        let i = arm.check(self.num_arms())?.index();
        Ok(self.rows.row(i).iter().copied().collect())
    }

    /// `x_a · theta` for every arm.
    pub fn scores(&self, theta: &DVector<f64>) -> Result<Vec<f64>> {
        if theta.len() != self.dim() {
            return Err(BanditError::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        Ok((&self.rows * theta).iter().copied().collect())
    }
}

fn check_observation(dim: usize, x: &[f64], y: f64) -> Result<()> {
    if x.len() != dim {
        return Err(BanditError::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(BanditError::NonFinite);
    }
    Ok(())
}

/// `A += x xᵀ`, `b += y x`. Both triangles get the same product, so `A`
/// stays exactly symmetric.
fn rank_one_update(a: &mut DMatrix<f64>, b: &mut DVector<f64>, x: &[f64], y: f64) {
    let d = x.len();
    let cells = a.as_mut_slice();
    for (c, &xc) in x.iter().enumerate() {
        if xc == 0.0 {
            continue;
        }
        let col = &mut cells[c * d..(c + 1) * d];
        for (cell, &xr) in col.iter_mut().zip(x) {
            *cell += xr * xc;
        }
    }
    for (bi, &xi) in b.iter_mut().zip(x) {
        *bi += y * xi;
    }
}

/// Summation-form ridge regression: `A = λI + Σ x xᵀ`, `b = Σ x y`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeAccumulator {
    a: DMatrix<f64>,
    b: DVector<f64>,
    lambda: f64,
    observations: u64,
}

impl RidgeAccumulator {
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(BanditError::InvalidParameter(format!(
                "ridge penalty must be positive, got {lambda}"
            )));
        }
        if dim == 0 {
            return Err(BanditError::InvalidParameter(
                "dimension must be positive".into(),
            ));
        }
        Ok(RidgeAccumulator {
            a: DMatrix::identity(dim, dim) * lambda,
            b: DVector::zeros(dim),
            lambda,
            observations: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Number of observations folded in so far.
    pub fn observations(&self) -> u64 {
        self.observations
    }

    pub fn update(&mut self, x: &[f64], y: f64) -> Result<()> {
        check_observation(self.dim(), x, y)?;
        rank_one_update(&mut self.a, &mut self.b, x, y);
        self.observations += 1;
        Ok(())
    }

    /// Ridge estimate `A⁻¹ b` by Cholesky solve.
    pub fn point(&self) -> Result<DVector<f64>> {
        let chol =
            Cholesky::new(self.a.clone()).ok_or(BanditError::AccumulatorNotPositiveDefinite)?;
        Ok(chol.solve(&self.b))
    }

    /// Overwrite the sufficient statistics, e.g. to install a known fit.
    pub fn set_state(&mut self, a: DMatrix<f64>, b: DVector<f64>) -> Result<()> {
        let d = self.dim();
        if a.shape() != (d, d) || b.len() != d {
            return Err(BanditError::DimensionMismatch {
                expected: d,
                got: b.len(),
            });
        }
        self.a = a;
        self.b = b;
        Ok(())
    }
}

fn design<'a>(context: Context<'a>) -> Result<&'a ArmDesign> {
    match context {
        Context::Design(d) => Ok(d),
        Context::Empty => Err(BanditError::Config(
            "linear policies need the arm design as context".into(),
        )),
    }
}

/// Bootstrap Thompson sampling over online ridge replicates.
#[derive(Debug, Clone)]
pub struct LinearBts {
    replicates: Vec<RidgeAccumulator>,
    coin_words: Vec<u64>,
    replicate_ops: u64,
}

impl LinearBts {
    pub fn new(dim: usize, replicates: usize, lambda: f64) -> Result<Self> {
        if replicates == 0 {
            return Err(BanditError::InvalidParameter("J must be at least 1".into()));
        }
        let proto = RidgeAccumulator::new(dim, lambda)?;
        Ok(Self::from_replicates(vec![proto; replicates]))
    }

    pub fn from_replicates(replicates: Vec<RidgeAccumulator>) -> Self {
        assert!(!replicates.is_empty(), "at least one replicate");
        LinearBts {
            coin_words: vec![0; replicates.len().div_ceil(64)],
            replicates,
            replicate_ops: 0,
        }
    }

    pub fn replicates(&self) -> &[RidgeAccumulator] {
        &self.replicates
    }

    pub fn replicates_mut(&mut self) -> &mut [RidgeAccumulator] {
        &mut self.replicates
    }

    /// Fold `(x, y)` into each replicate with probability 1/2.
    ///
    /// Draws exactly `ceil(J / 64)` words; the coin of replicate `j` is bit
    /// `j % 64` of word `j / 64`.
    pub fn observe(&mut self, x: &[f64], y: f64, rng: &mut dyn RngCore) -> Result<()> {
        check_observation(self.replicates[0].dim(), x, y)?;
        for w in self.coin_words.iter_mut() {
            *w = rng.next_u64();
        }
        for (j, rep) in self.replicates.iter_mut().enumerate() {
            if (self.coin_words[j >> 6] >> (j & 63)) & 1 == 1 {
                rank_one_update(&mut rep.a, &mut rep.b, x, y);
                rep.observations += 1;
            }
        }
        self.replicate_ops += self.replicates.len() as u64;
        Ok(())
    }
}

impl Policy for LinearBts {
    fn name(&self) -> &'static str {
        "linear-bts"
    }

    fn select(&mut self, context: Context<'_>, rng: &mut dyn RngCore) -> Result<ArmId> {
        let arms = design(context)?;
        let j = rng.random_range(0..self.replicates.len());
        let theta = self.replicates[j].point()?;
        let scores = arms.scores(&theta)?;
        argmax_random_tiebreak(&scores, rng).map(ArmId)
    }

    fn update(
        &mut self,
        context: Context<'_>,
        arm: ArmId,
        reward: Reward,
        rng: &mut dyn RngCore,
    ) -> Result<()> {
        let x = design(context)?.row(arm)?;
        self.observe(&x, reward.value(), rng)
    }

    fn replicate_update_ops(&self) -> u64 {
        self.replicate_ops
    }
}

/// Conjugate Bayesian linear regression with prior `N(0, I)` and unit noise.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesLinear {
    precision: DMatrix<f64>,
    b: DVector<f64>,
}

impl BayesLinear {
    pub const NOISE_VARIANCE: f64 = 1.0;

    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(BanditError::InvalidParameter(
                "dimension must be positive".into(),
            ));
        }
        Ok(BayesLinear {
            precision: DMatrix::identity(dim, dim),
            b: DVector::zeros(dim),
        })
    }

    pub fn from_state(precision: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if precision.shape() != (b.len(), b.len()) {
            return Err(BanditError::DimensionMismatch {
                expected: b.len(),
                got: precision.nrows(),
            });
        }
        Ok(BayesLinear { precision, b })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn observe(&mut self, x: &[f64], y: f64) -> Result<()> {
        check_observation(self.dim(), x, y)?;
        rank_one_update(&mut self.precision, &mut self.b, x, y);
        Ok(())
    }

    fn factor(&self) -> Result<Cholesky<f64, Dyn>> {
        Cholesky::new(self.precision.clone()).ok_or(BanditError::PrecisionNotPositiveDefinite)
    }

    pub fn posterior_mean(&self) -> Result<DVector<f64>> {
        Ok(self.factor()?.solve(&self.b))
    }

    pub fn posterior_covariance(&self) -> Result<DMatrix<f64>> {
        Ok(self.factor()?.inverse())
    }

    /// One draw from `N(A⁻¹ b, A⁻¹)`: with `A = L Lᵀ`, `Lᵀ v = z` gives
    /// `Cov(v) = (L Lᵀ)⁻¹`.
    pub fn sample(&self, rng: &mut dyn RngCore) -> Result<DVector<f64>> {
        let chol = self.factor()?;
        let mean = chol.solve(&self.b);
        let z = DVector::from_fn(self.dim(), |_, _| StandardNormal.sample(rng));
        let v = chol
            .l()
            .tr_solve_lower_triangular(&z)
            .ok_or(BanditError::PrecisionNotPositiveDefinite)?;
        Ok(mean + v)
    }
}

impl Policy for BayesLinear {
    fn name(&self) -> &'static str {
        "bayes-linear"
    }

    fn select(&mut self, context: Context<'_>, rng: &mut dyn RngCore) -> Result<ArmId> {
        let arms = design(context)?;
        let theta = self.sample(rng)?;
        let scores = arms.scores(&theta)?;
        argmax_random_tiebreak(&scores, rng).map(ArmId)
    }

    fn update(
        &mut self,
        context: Context<'_>,
        arm: ArmId,
        reward: Reward,
        _rng: &mut dyn RngCore,
    ) -> Result<()> {
        let x = design(context)?.row(arm)?;
        self.observe(&x, reward.value())
    }
}
