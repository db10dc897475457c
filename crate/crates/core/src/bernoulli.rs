//! Policies for the K-armed Bernoulli bandit.
//!
//! * [`BetaTs`]: Beta-Bernoulli Thompson sampling.
//! * [`Bts`]: bootstrap Thompson sampling over a bank of `J` online
//!   double-or-nothing replicates, one Beta pseudo-count pair per arm and
//!   replicate. Selection draws a replicate independently per arm.
//! * [`BtsInf`]: the `J = ∞` variant that keeps success/failure counts and
//!   draws a fresh double-or-nothing resample of them every round.

use rand::{Rng, RngCore};
use rand_distr::{Beta, Binomial, Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};

use crate::arm::{ArmId, Reward};
use crate::error::{BanditError, Result};
use crate::policy::{Context, Policy};
use crate::select::argmax_random_tiebreak;

fn check_prior(alpha: f64, beta: f64) -> Result<()> {
    if alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite() {
        Ok(())
    } else {
        Err(BanditError::InvalidBetaShape { alpha, beta })
    }
}

fn check_arms(num_arms: usize) -> Result<()> {
    if num_arms == 0 {
        Err(BanditError::InvalidParameter(
            "at least one arm is required".into(),
        ))
    } else {
        Ok(())
    }
}

/// Beta-Bernoulli Thompson sampling.
#[derive(Debug, Clone)]
pub struct BetaTs {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    draws: Vec<f64>,
}

impl BetaTs {
    pub fn new(num_arms: usize, prior_alpha: f64, prior_beta: f64) -> Result<Self> {
        check_arms(num_arms)?;
        check_prior(prior_alpha, prior_beta)?;
        Ok(Self::from_counts(
            vec![prior_alpha; num_arms],
            vec![prior_beta; num_arms],
        ))
    }

    /// Start from explicit posterior shapes. Shapes are validated at selection.
    pub fn from_counts(alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        assert_eq!(alpha.len(), beta.len(), "alpha and beta lengths differ");
        let draws = vec![0.0; alpha.len()];
        BetaTs { alpha, beta, draws }
    }

    pub fn num_arms(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }
}

impl Policy for BetaTs {
    fn name(&self) -> &'static str {
        "beta-ts"
    }

    fn select(&mut self, _context: Context<'_>, rng: &mut dyn RngCore) -> Result<ArmId> {
        for ((draw, &a), &b) in self.draws.iter_mut().zip(&self.alpha).zip(&self.beta) {
            let dist =
                Beta::new(a, b).map_err(|_| BanditError::InvalidBetaShape { alpha: a, beta: b })?;
            *draw = dist.sample(rng);
        }
        argmax_random_tiebreak(&self.draws, rng).map(ArmId)
    }

    fn update(
        &mut self,
        _context: Context<'_>,
        arm: ArmId,
        reward: Reward,
        _rng: &mut dyn RngCore,
    ) -> Result<()> {
        let i = arm.check(self.alpha.len())?.index();
        if reward.as_binary()? {
            self.alpha[i] += 1.0;
        } else {
            self.beta[i] += 1.0;
        }
        Ok(())
    }
}

/// Distribution of the per-observation replicate weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightScheme {
    /// Weight 1 with probability 1/2, else 0.
    #[default]
    DoubleOrNothing,
    /// Poisson(1) weights.
    Poisson,
    /// Exponential(1) weights (the Bayesian bootstrap).
    Exponential,
}

/// `COIN_BYTES[b][k]` is bit `k` of byte `b` as 0.0 / 1.0.
static COIN_BYTES: [[f64; 8]; 256] = {
    let mut table = [[0.0; 8]; 256];
    let mut byte = 0;
    while byte < 256 {
        let mut k = 0;
        while k < 8 {
            if (byte >> k) & 1 == 1 {
                table[byte][k] = 1.0;
            }
            k += 1;
        }
        byte += 1;
    }
    table
};

/// Add bit `j` of the packed coin words to `row[j]`.
#[inline]
fn add_coins(row: &mut [f64], words: &[u64]) {
    for (chunk, &word) in row.chunks_mut(64).zip(words) {
        for (k, lane) in chunk.chunks_mut(8).enumerate() {
            let bits = &COIN_BYTES[((word >> (8 * k)) & 0xff) as usize];
            for (x, b) in lane.iter_mut().zip(bits) {
                *x += b;
            }
        }
    }
}

/// Per-arm, per-replicate Beta pseudo-counts.
///
/// Stored row-major by arm: replicate `j` of arm `i` lives at `i * J + j`.
/// Counts are reals so that non-integer weight schemes fit the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateBank {
    num_arms: usize,
    replicates: usize,
    prior_alpha: f64,
    prior_beta: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl ReplicateBank {
    pub fn new(
        num_arms: usize,
        replicates: usize,
        prior_alpha: f64,
        prior_beta: f64,
    ) -> Result<Self> {
        check_arms(num_arms)?;
        check_prior(prior_alpha, prior_beta)?;
        if replicates == 0 {
            return Err(BanditError::InvalidParameter("J must be at least 1".into()));
        }
        Ok(ReplicateBank {
            num_arms,
            replicates,
            prior_alpha,
            prior_beta,
            alpha: vec![prior_alpha; num_arms * replicates],
            beta: vec![prior_beta; num_arms * replicates],
        })
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn prior(&self) -> (f64, f64) {
        (self.prior_alpha, self.prior_beta)
    }

    fn slot(&self, arm: usize, replicate: usize) -> usize {
        debug_assert!(arm < self.num_arms && replicate < self.replicates);
        arm * self.replicates + replicate
    }

    pub fn counts(&self, arm: usize, replicate: usize) -> (f64, f64) {
        let s = self.slot(arm, replicate);
        (self.alpha[s], self.beta[s])
    }

    /// Overwrite one replicate's pseudo-counts.
    pub fn set_counts(
        &mut self,
        arm: usize,
        replicate: usize,
        alpha: f64,
        beta: f64,
    ) -> Result<()> {
        check_prior(alpha, beta)?;
        let s = self.slot(arm, replicate);
        self.alpha[s] = alpha;
        self.beta[s] = beta;
        Ok(())
    }

    /// Point estimate `alpha / (alpha + beta)` of one replicate.
    #[inline]
    pub fn estimate(&self, arm: usize, replicate: usize) -> f64 {
        let s = self.slot(arm, replicate);
        self.alpha[s] / (self.alpha[s] + self.beta[s])
    }

    pub fn alpha_row(&self, arm: usize) -> &[f64] {
        &self.alpha[arm * self.replicates..(arm + 1) * self.replicates]
    }

    pub fn beta_row(&self, arm: usize) -> &[f64] {
        &self.beta[arm * self.replicates..(arm + 1) * self.replicates]
    }

    fn rows_mut(&mut self, arm: usize) -> (&mut [f64], &mut [f64]) {
        let range = arm * self.replicates..(arm + 1) * self.replicates;
        (&mut self.alpha[range.clone()], &mut self.beta[range])
    }
}

/// Bootstrap Thompson sampling for Bernoulli rewards.
#[derive(Debug, Clone)]
pub struct Bts {
    bank: ReplicateBank,
    scheme: WeightScheme,
    coin_words: Vec<u64>,
    estimates: Vec<f64>,
    replicate_ops: u64,
}

impl Bts {
    pub fn new(
        num_arms: usize,
        replicates: usize,
        prior_alpha: f64,
        prior_beta: f64,
    ) -> Result<Self> {
        Ok(Self::from_bank(ReplicateBank::new(
            num_arms,
            replicates,
            prior_alpha,
            prior_beta,
        )?))
    }

    pub fn from_bank(bank: ReplicateBank) -> Self {
        Bts {
            coin_words: vec![0; bank.replicates.div_ceil(64)],
            estimates: vec![0.0; bank.num_arms],
            bank,
            scheme: WeightScheme::DoubleOrNothing,
            replicate_ops: 0,
        }
    }

    pub fn with_weight_scheme(mut self, scheme: WeightScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn bank(&self) -> &ReplicateBank {
        &self.bank
    }

    pub fn weight_scheme(&self) -> WeightScheme {
        self.scheme
    }
}

impl Policy for Bts {
    fn name(&self) -> &'static str {
        "bts"
    }

    fn select(&mut self, _context: Context<'_>, rng: &mut dyn RngCore) -> Result<ArmId> {
        let j = self.bank.replicates;
        for (arm, est) in self.estimates.iter_mut().enumerate() {
            let pick = rng.random_range(0..j);
            *est = self.bank.estimate(arm, pick);
        }
        argmax_random_tiebreak(&self.estimates, rng).map(ArmId)
    }

    /// Coin `j` of this round is bit `j % 64` of the `j / 64`-th word drawn
    /// for the round; exactly `ceil(J / 64)` words are drawn per update, so
    /// the coin for `(t, j)` sits at a fixed position of the weights stream.
    fn update(
        &mut self,
        _context: Context<'_>,
        arm: ArmId,
        reward: Reward,
        rng: &mut dyn RngCore,
    ) -> Result<()> {
        let i = arm.check(self.bank.num_arms)?.index();
        let success = reward.as_binary()?;
        let replicates = self.bank.replicates;
        match self.scheme {
            WeightScheme::DoubleOrNothing => {
                for w in self.coin_words.iter_mut() {
                    *w = rng.next_u64();
                }
                let (alpha, beta) = self.bank.rows_mut(i);
                add_coins(if success { alpha } else { beta }, &self.coin_words);
            }
            WeightScheme::Poisson => {
                let poisson = Poisson::new(1.0).expect("unit rate");
                let (alpha, beta) = self.bank.rows_mut(i);
                let row = if success { alpha } else { beta };
                for x in row.iter_mut() {
                    let w: f64 = poisson.sample(rng);
                    *x += w;
                }
            }
            WeightScheme::Exponential => {
                let (alpha, beta) = self.bank.rows_mut(i);
                let row = if success { alpha } else { beta };
                for x in row.iter_mut() {
                    let w: f64 = Exp1.sample(rng);
                    *x += w;
                }
            }
        }
        self.replicate_ops += replicates as u64;
        Ok(())
    }

    fn replicate_update_ops(&self) -> u64 {
        self.replicate_ops
    }
}

/// Success/failure counts per arm plus the Beta prior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SufficientStats {
    pub successes: Vec<u64>,
    pub failures: Vec<u64>,
}

impl SufficientStats {
    pub fn new(num_arms: usize) -> Self {
        SufficientStats {
            successes: vec![0; num_arms],
            failures: vec![0; num_arms],
        }
    }

    pub fn pulls(&self, arm: usize) -> u64 {
        self.successes[arm] + self.failures[arm]
    }
}

/// Bootstrap Thompson sampling with an effectively infinite replicate count.
#[derive(Debug, Clone)]
pub struct BtsInf {
    stats: SufficientStats,
    prior_alpha: f64,
    prior_beta: f64,
    estimates: Vec<f64>,
}

impl BtsInf {
    pub fn new(num_arms: usize, prior_alpha: f64, prior_beta: f64) -> Result<Self> {
        check_arms(num_arms)?;
        Self::from_stats(SufficientStats::new(num_arms), prior_alpha, prior_beta)
    }

    pub fn from_stats(stats: SufficientStats, prior_alpha: f64, prior_beta: f64) -> Result<Self> {
        check_prior(prior_alpha, prior_beta)?;
        if stats.successes.len() != stats.failures.len() {
            return Err(BanditError::DimensionMismatch {
                expected: stats.successes.len(),
                got: stats.failures.len(),
            });
        }
        Ok(BtsInf {
            estimates: vec![0.0; stats.successes.len()],
            stats,
            prior_alpha,
            prior_beta,
        })
    }

    pub fn num_arms(&self) -> usize {
        self.stats.successes.len()
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }
}

fn half_thin(count: u64, rng: &mut dyn RngCore) -> f64 {
    if count == 0 {
        return 0.0;
    }
    Binomial::new(count, 0.5).expect("p = 1/2").sample(rng) as f64
}

impl Policy for BtsInf {
    fn name(&self) -> &'static str {
        "bts-inf"
    }

    fn select(&mut self, _context: Context<'_>, rng: &mut dyn RngCore) -> Result<ArmId> {
        let (a0, b0) = (self.prior_alpha, self.prior_beta);
        for (arm, est) in self.estimates.iter_mut().enumerate() {
            let s = half_thin(self.stats.successes[arm], rng);
            let f = half_thin(self.stats.failures[arm], rng);
            *est = (a0 + s) / (a0 + b0 + s + f);
        }
        argmax_random_tiebreak(&self.estimates, rng).map(ArmId)
    }

    fn update(
        &mut self,
        _context: Context<'_>,
        arm: ArmId,
        reward: Reward,
        _rng: &mut dyn RngCore,
    ) -> Result<()> {
        let i = arm.check(self.num_arms())?.index();
        if reward.as_binary()? {
            self.stats.successes[i] += 1;
        } else {
            self.stats.failures[i] += 1;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use crate::testutil::ConstRng;

    fn freq(policy: &mut dyn Policy, arm: usize, trials: usize, seed: u64) -> f64 {
        let mut rng = Stream::from_seed_u64(seed);
        let hits = (0..trials)
            .filter(|_| policy.select(Context::Empty, &mut rng).unwrap().index() == arm)
            .count();
        hits as f64 / trials as f64
    }

    fn one() -> Reward {
        Reward::binary(true)
    }

    fn zero() -> Reward {
        Reward::binary(false)
    }

    #[test]
    fn beta_ts_near_degenerate() {
        let mut ts = BetaTs::from_counts(vec![1e6, 1.0], vec![1.0, 1e6]);
        assert!(freq(&mut ts, 0, 10_000, 1) >= 0.999);
    }

    #[test]
    fn beta_ts_single_arm() {
        let mut ts = BetaTs::new(1, 1.0, 1.0).unwrap();
        assert_eq!(freq(&mut ts, 0, 1000, 2), 1.0);
    }

    #[test]
    fn beta_ts_win_probability_matches_quadrature() {
        // P(Beta(2,1) > Uniform) = ∫ F_U(x) · 2x dx, by the midpoint rule.
        let cells = 100_000;
        let h = 1.0 / cells as f64;
        let exact: f64 = (0..cells)
            .map(|c| {
                let x = (c as f64 + 0.5) * h;
                x * 2.0 * x * h
            })
            .sum();
        assert!((exact - 2.0 / 3.0).abs() < 1e-9);
        let mut ts = BetaTs::from_counts(vec![2.0, 1.0], vec![1.0, 1.0]);
        let f = freq(&mut ts, 0, 100_000, 3);
        assert!((f - exact).abs() <= 0.01, "freq {f} vs {exact}");
    }

    #[test]
    fn beta_ts_rejects_bad_shape() {
        let mut ts = BetaTs::from_counts(vec![0.0, 1.0], vec![1.0, 1.0]);
        let err = ts
            .select(Context::Empty, &mut Stream::from_seed_u64(0))
            .unwrap_err();
        assert!(err.to_string().starts_with("invalid Beta shape"));
        assert!(BetaTs::new(2, -1.0, 1.0).is_err());
    }

    #[test]
    fn beta_ts_update_increments() {
        let mut rng = Stream::from_seed_u64(0);
        let mut ts = BetaTs::new(2, 1.0, 1.0).unwrap();
        ts.update(Context::Empty, ArmId(0), one(), &mut rng)
            .unwrap();
        assert_eq!((ts.alpha()[0], ts.beta()[0]), (2.0, 1.0));

        let mut ts = BetaTs::from_counts(vec![3.0], vec![5.0]);
        ts.update(Context::Empty, ArmId(0), zero(), &mut rng)
            .unwrap();
        assert_eq!((ts.alpha()[0], ts.beta()[0]), (3.0, 6.0));

        let mut ts = BetaTs::new(3, 1.0, 1.0).unwrap();
        for _ in 0..100 {
            ts.update(Context::Empty, ArmId(1), one(), &mut rng)
                .unwrap();
        }
        for _ in 0..50 {
            ts.update(Context::Empty, ArmId(1), zero(), &mut rng)
                .unwrap();
        }
        assert_eq!((ts.alpha()[1], ts.beta()[1]), (101.0, 51.0));
        assert_eq!((ts.alpha()[0], ts.beta()[0]), (1.0, 1.0));
    }

    #[test]
    fn non_binary_reward_rejected() {
        let mut rng = Stream::from_seed_u64(0);
        let r = Reward::new(0.5).unwrap();
        let mut ts = BetaTs::new(2, 1.0, 1.0).unwrap();
        let err = ts
            .update(Context::Empty, ArmId(0), r, &mut rng)
            .unwrap_err();
        assert!(err.to_string().starts_with("non-binary reward"));
        let mut bts = Bts::new(2, 4, 1.0, 1.0).unwrap();
        assert!(bts.update(Context::Empty, ArmId(0), r, &mut rng).is_err());
        let mut inf = BtsInf::new(2, 1.0, 1.0).unwrap();
        assert!(inf.update(Context::Empty, ArmId(0), r, &mut rng).is_err());
    }

    #[test]
    fn fresh_bank_selects_uniformly() {
        let mut bts = Bts::new(3, 100, 1.0, 1.0).unwrap();
        for arm in 0..3 {
            let f = freq(&mut bts, arm, 100_000, 10 + arm as u64);
            assert!((f - 1.0 / 3.0).abs() <= 0.01, "arm {arm}: {f}");
        }
    }

    #[test]
    fn single_replicate_is_deterministic() {
        let mut bank = ReplicateBank::new(2, 1, 1.0, 1.0).unwrap();
        bank.set_counts(0, 0, 5.0, 1.0).unwrap();
        bank.set_counts(1, 0, 1.0, 5.0).unwrap();
        let mut bts = Bts::from_bank(bank);
        assert_eq!(freq(&mut bts, 0, 1000, 4), 1.0);
    }

    #[test]
    fn replicate_choice_is_per_arm() {
        // arm 0 replicates at 0.8 / 0.2, arm 1 at 0.5 / 0.5; arm 0 wins iff it
        // draws the 0.8 replicate: probability 1/2.
        let mut bank = ReplicateBank::new(2, 2, 1.0, 1.0).unwrap();
        bank.set_counts(0, 0, 8.0, 2.0).unwrap();
        bank.set_counts(0, 1, 2.0, 8.0).unwrap();
        let mut bts = Bts::from_bank(bank);
        let f = freq(&mut bts, 0, 100_000, 5);
        assert!((f - 0.5).abs() <= 0.01, "freq {f}");
    }

    #[test]
    fn forced_coins() {
        let mut bts = Bts::new(2, 1, 1.0, 1.0).unwrap();
        bts.update(Context::Empty, ArmId(0), one(), &mut ConstRng(u64::MAX))
            .unwrap();
        assert_eq!(bts.bank().counts(0, 0), (2.0, 1.0));

        let mut bts = Bts::new(2, 4, 1.0, 1.0).unwrap();
        let before = bts.bank().clone();
        bts.update(Context::Empty, ArmId(1), one(), &mut ConstRng(0))
            .unwrap();
        bts.update(Context::Empty, ArmId(1), zero(), &mut ConstRng(0))
            .unwrap();
        assert_eq!(bts.bank(), &before);
    }

    #[test]
    fn coin_bits_map_to_replicates() {
        let mut bts = Bts::new(1, 130, 1.0, 1.0).unwrap();
        // word pattern 0b101: replicates 0 and 2 of every 64-block
        bts.update(Context::Empty, ArmId(0), one(), &mut ConstRng(0b101))
            .unwrap();
        let alpha = bts.bank().alpha_row(0);
        for (j, &a) in alpha.iter().enumerate() {
            let expect = if j % 64 == 0 || j % 64 == 2 { 2.0 } else { 1.0 };
            assert_eq!(a, expect, "replicate {j}");
        }
    }

    #[test]
    fn greedy_when_single_replicate_always_updated() {
        let mut rng = Stream::from_seed_u64(8);
        let mut bts = Bts::new(3, 1, 1.0, 1.0).unwrap();
        let mut ts = BetaTs::new(3, 1.0, 1.0).unwrap();
        let rewards = [(0, 1), (1, 0), (2, 1), (2, 1), (0, 0), (1, 1), (2, 0)];
        for &(arm, r) in &rewards {
            let r = Reward::binary(r == 1);
            bts.update(Context::Empty, ArmId(arm), r, &mut ConstRng(u64::MAX))
                .unwrap();
            ts.update(Context::Empty, ArmId(arm), r, &mut rng).unwrap();
        }
        let means: Vec<f64> = (0..3)
            .map(|i| ts.alpha()[i] / (ts.alpha()[i] + ts.beta()[i]))
            .collect();
        let greedy = argmax_random_tiebreak(&means, &mut rng).unwrap();
        for _ in 0..200 {
            assert_eq!(
                bts.select(Context::Empty, &mut rng).unwrap().index(),
                greedy
            );
        }
    }

    #[test]
    fn replicate_increments_average_half() {
        let mut rng = Stream::from_seed_u64(21);
        let mut bts = Bts::new(2, 1000, 1.0, 1.0).unwrap();
        for t in 0..1000 {
            let r = Reward::binary(t % 3 == 0);
            bts.update(Context::Empty, ArmId(1), r, &mut rng).unwrap();
        }
        let bank = bts.bank();
        let mean = (0..1000)
            .map(|j| {
                let (a, b) = bank.counts(1, j);
                a + b - 2.0
            })
            .sum::<f64>()
            / 1000.0;
        assert!((mean - 500.0).abs() <= 35.0, "mean {mean}");
        assert!(bank.alpha_row(0).iter().all(|&a| a == 1.0));
        assert!(bank.beta_row(0).iter().all(|&b| b == 1.0));
    }

    #[test]
    fn op_count_is_j_per_update() {
        let mut rng = Stream::from_seed_u64(1);
        let mut bts = Bts::new(4, 333, 1.0, 1.0).unwrap();
        let mut last = 0;
        for t in 0..500u64 {
            let arm = bts.select(Context::Empty, &mut rng).unwrap();
            bts.update(Context::Empty, arm, Reward::binary(t % 2 == 0), &mut rng)
                .unwrap();
            let ops = bts.replicate_update_ops();
            assert_eq!(ops - last, 333);
            last = ops;
        }
    }

    #[test]
    fn alternative_weight_schemes_have_unit_mean() {
        for scheme in [WeightScheme::Poisson, WeightScheme::Exponential] {
            let mut rng = Stream::from_seed_u64(9);
            let mut bts = Bts::new(1, 2000, 1.0, 1.0)
                .unwrap()
                .with_weight_scheme(scheme);
            for _ in 0..50 {
                bts.update(Context::Empty, ArmId(0), one(), &mut rng)
                    .unwrap();
            }
            let row = bts.bank().alpha_row(0);
            let mean = row.iter().map(|a| a - 1.0).sum::<f64>() / row.len() as f64;
            assert!((mean - 50.0).abs() < 1.0, "{scheme:?}: {mean}");
            assert!(bts.bank().beta_row(0).iter().all(|&b| b == 1.0));
        }
    }

    #[test]
    fn replicate_increments_fit_binomial() {
        // chi-square goodness of fit of per-replicate increments after 12
        // pulls against Binomial(12, 1/2); tails pooled, 8 degrees of freedom
        let n = 12;
        let replicates = 4000;
        let mut rng = Stream::from_seed_u64(404);
        let mut bts = Bts::new(2, replicates, 1.0, 1.0).unwrap();
        for t in 0..n {
            bts.update(
                Context::Empty,
                ArmId(0),
                Reward::binary(t % 4 == 1),
                &mut rng,
            )
            .unwrap();
        }
        let mut observed = [0.0f64; 13];
        for j in 0..replicates {
            let (a, b) = bts.bank().counts(0, j);
            observed[(a + b - 2.0) as usize] += 1.0;
        }
        let pmf: Vec<f64> = (0..=n)
            .map(|k| {
                let c = (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
                c / 4096.0
            })
            .collect();
        let bins: Vec<(f64, f64)> = {
            let mut v = vec![(
                observed[0..=2].iter().sum::<f64>(),
                pmf[0..=2].iter().sum::<f64>() * replicates as f64,
            )];
            for k in 3..=9 {
                v.push((observed[k], pmf[k] * replicates as f64));
            }
            v.push((
                observed[10..=12].iter().sum::<f64>(),
                pmf[10..=12].iter().sum::<f64>() * replicates as f64,
            ));
            v
        };
        let chi2: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
        assert!(chi2 < 26.12, "chi-square {chi2}");
    }

    #[test]
    fn selection_law_ignores_replicate_order() {
        let build = |arm0: [(f64, f64); 4], arm1: [(f64, f64); 4]| {
            let mut bank = ReplicateBank::new(2, 4, 1.0, 1.0).unwrap();
            for j in 0..4 {
                bank.set_counts(0, j, arm0[j].0, arm0[j].1).unwrap();
                bank.set_counts(1, j, arm1[j].0, arm1[j].1).unwrap();
            }
            Bts::from_bank(bank)
        };
        let arm0 = [(9.0, 1.0), (1.0, 9.0), (6.0, 4.0), (3.0, 7.0)];
        let arm1 = [(5.0, 5.0), (5.0, 5.0), (2.0, 8.0), (8.0, 2.0)];
        // enumerate the 16 equiprobable replicate pairs
        let est = |c: (f64, f64)| c.0 / (c.0 + c.1);
        let wins = arm0
            .iter()
            .flat_map(|&a| arm1.iter().map(move |&b| (est(a) > est(b)) as u32))
            .sum::<u32>();
        let exact = wins as f64 / 16.0;

        let mut original = build(arm0, arm1);
        let mut shuffled = build(
            [arm0[2], arm0[0], arm0[3], arm0[1]],
            [arm1[3], arm1[2], arm1[1], arm1[0]],
        );
        let f = freq(&mut original, 0, 100_000, 61);
        let g = freq(&mut shuffled, 0, 100_000, 62);
        assert!((f - exact).abs() <= 0.01, "{f} vs {exact}");
        assert!((g - exact).abs() <= 0.01, "{g} vs {exact}");
    }

    #[test]
    fn bts_inf_uniform_without_data() {
        let mut inf = BtsInf::new(2, 1.0, 1.0).unwrap();
        let f = freq(&mut inf, 0, 100_000, 6);
        assert!((f - 0.5).abs() <= 0.01, "freq {f}");
    }

    #[test]
    fn bts_inf_rarely_picks_empty_arm_against_successes() {
        // Arm 1 (no data, estimate 1/2) only ties arm 0 when s* = 0, which
        // happens with probability 1/16; it then wins half of those ties.
        let stats = SufficientStats {
            successes: vec![4, 0],
            failures: vec![0, 0],
        };
        let mut inf = BtsInf::from_stats(stats, 1.0, 1.0).unwrap();
        let f = freq(&mut inf, 1, 100_000, 7);
        assert!(f <= 0.0625 + 0.01, "freq {f}");
        assert!((f - 1.0 / 32.0).abs() < 0.005, "freq {f}");
    }

    #[test]
    fn bts_inf_update_counts() {
        let stats = SufficientStats {
            successes: vec![3, 0],
            failures: vec![0, 0],
        };
        let mut inf = BtsInf::from_stats(stats, 1.0, 1.0).unwrap();
        let mut rng = Stream::from_seed_u64(0);
        inf.update(Context::Empty, ArmId(0), one(), &mut rng)
            .unwrap();
        inf.update(Context::Empty, ArmId(1), zero(), &mut rng)
            .unwrap();
        assert_eq!(inf.stats().successes, vec![4, 0]);
        assert_eq!(inf.stats().failures, vec![0, 1]);
    }

    #[test]
    fn out_of_range_arm() {
        let mut rng = Stream::from_seed_u64(0);
        let mut bts = Bts::new(2, 4, 1.0, 1.0).unwrap();
        assert!(matches!(
            bts.update(Context::Empty, ArmId(2), one(), &mut rng),
            Err(BanditError::ArmOutOfRange { .. })
        ));
    }
}
