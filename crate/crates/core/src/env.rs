//! Benchmark reward generators.
//!
//! Both environments consume exactly one base draw per pull (a uniform for
//! Bernoulli, a standard normal for the factorial design) and derive the
//! optimal arm's counterfactual reward from that same draw. Regret computed
//! from the counterfactual is therefore coupled to the realized reward, and
//! the environment stream advances identically whichever arm is played.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use crate::arm::{ArmId, Reward};
use crate::error::{BanditError, Result};
use crate::linear::ArmDesign;
use crate::policy::Context;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullOutcome {
    pub reward: Reward,
    pub counterfactual_optimal: Reward,
}

pub trait Environment: Send + Sync {
    fn num_arms(&self) -> usize;

    fn optimal_arm(&self) -> ArmId;

    fn mean(&self, arm: ArmId) -> f64;

    fn context(&self) -> Context<'_>;

    fn pull(&self, arm: ArmId, rng: &mut dyn RngCore) -> Result<PullOutcome>;
}

/// K arms; the optimal one pays with probability 1/2, the rest with `1/2 - ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliEnv {
    means: Vec<f64>,
    epsilon: f64,
    optimal: ArmId,
}

impl BernoulliEnv {
    pub const BEST_MEAN: f64 = 0.5;

    pub fn new(num_arms: usize, epsilon: f64, optimal: ArmId) -> Result<Self> {
        if num_arms < 2 {
            return Err(BanditError::InvalidParameter(format!(
                "Bernoulli environment needs K >= 2, got {num_arms}"
            )));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(BanditError::InvalidParameter(format!(
                "epsilon must lie in (0, 0.5), got {epsilon}"
            )));
        }
        let optimal = optimal.check(num_arms)?;
        let mut means = vec![Self::BEST_MEAN - epsilon; num_arms];
        means[optimal.index()] = Self::BEST_MEAN;
        Ok(BernoulliEnv {
            means,
            epsilon,
            optimal,
        })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Pull with an explicit base uniform `u`.
    pub fn pull_with_uniform(&self, arm: ArmId, u: f64) -> Result<PullOutcome> {
        let i = arm.check(self.means.len())?.index();
        Ok(PullOutcome {
            reward: Reward::binary(u < self.means[i]),
            counterfactual_optimal: Reward::binary(u < Self::BEST_MEAN),
        })
    }
}

impl Environment for BernoulliEnv {
    fn num_arms(&self) -> usize {
        self.means.len()
    }

    fn optimal_arm(&self) -> ArmId {
        self.optimal
    }

    fn mean(&self, arm: ArmId) -> f64 {
        self.means[arm.index()]
    }

    fn context(&self) -> Context<'_> {
        Context::Empty
    }

    fn pull(&self, arm: ArmId, rng: &mut dyn RngCore) -> Result<PullOutcome> {
        let u: f64 = rng.random();
        self.pull_with_uniform(arm, u)
    }
}

/// Coefficients of the full-factorial model, columns ordered as in
/// [`FactorialEnv::design_row`].
pub const FACTORIAL_BETA: [f64; 8] = [1.00, -0.20, 0.10, 0.20, 0.10, 0.05, 0.10, 0.01];

/// Three two-level factors, all eight cells, heteroscedastic Gaussian noise.
///
/// Arm `a` is the cell `(x1, x2, x3)` with `x1 = a & 1`, `x2 = (a >> 1) & 1`,
/// `x3 = (a >> 2) & 1`. The noise variance of an arm is its design row dotted
/// with `σ² = (1, 0, 0, γ, 0, 0, 0, γ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorialEnv {
    design: ArmDesign,
    beta: DVector<f64>,
    sigma2: DVector<f64>,
    gamma: f64,
    means: Vec<f64>,
    variances: Vec<f64>,
    std_devs: Vec<f64>,
    optimal: ArmId,
}

impl FactorialEnv {
    pub const NUM_ARMS: usize = 8;
    pub const DIM: usize = 8;

    pub fn new(gamma: f64) -> Result<Self> {
        Self::with_coefficients(FACTORIAL_BETA, gamma)
    }

    pub fn with_coefficients(beta: [f64; 8], gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(BanditError::InvalidParameter(format!(
                "gamma must be a non-negative number, got {gamma}"
            )));
        }
        let rows: Vec<Vec<f64>> = (0..Self::NUM_ARMS).map(Self::design_row).collect();
        let design = ArmDesign::from_rows(&rows)?;
        let beta = DVector::from_column_slice(&beta);
        let sigma2 = DVector::from_column_slice(&[1.0, 0.0, 0.0, gamma, 0.0, 0.0, 0.0, gamma]);
        let means: Vec<f64> = (design.matrix() * &beta).iter().copied().collect();
        let variances: Vec<f64> = (design.matrix() * &sigma2).iter().copied().collect();
        let std_devs = variances.iter().map(|v| v.sqrt()).collect();
        let optimal = (0..means.len())
            .max_by(|&a, &b| means[a].total_cmp(&means[b]))
            .map(ArmId)
            .expect("eight arms");
        Ok(FactorialEnv {
            design,
            beta,
            sigma2,
            gamma,
            means,
            variances,
            std_devs,
            optimal,
        })
    }

    /// Full-factorial row `[1, x1, x2, x3, x1x2, x1x3, x2x3, x1x2x3]` of `arm`.
    pub fn design_row(arm: usize) -> Vec<f64> {
        let x1 = (arm & 1) as f64;
        let x2 = ((arm >> 1) & 1) as f64;
        let x3 = ((arm >> 2) & 1) as f64;
        vec![1.0, x1, x2, x3, x1 * x2, x1 * x3, x2 * x3, x1 * x2 * x3]
    }

    pub fn design(&self) -> &ArmDesign {
        &self.design
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn variance_components(&self) -> &DVector<f64> {
        &self.sigma2
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// Pull with an explicit base standard normal `z`.
    pub fn pull_with_normal(&self, arm: ArmId, z: f64) -> Result<PullOutcome> {
        let i = arm.check(self.means.len())?.index();
        let o = self.optimal.index();
        Ok(PullOutcome {
            reward: Reward::new(self.means[i] + self.std_devs[i] * z)?,
            counterfactual_optimal: Reward::new(self.means[o] + self.std_devs[o] * z)?,
        })
    }

    pub fn design_matrix(&self) -> &DMatrix<f64> {
        self.design.matrix()
    }
}

impl Environment for FactorialEnv {
    fn num_arms(&self) -> usize {
        self.means.len()
    }

    fn optimal_arm(&self) -> ArmId {
        self.optimal
    }

    fn mean(&self, arm: ArmId) -> f64 {
        self.means[arm.index()]
    }

    fn context(&self) -> Context<'_> {
        Context::Design(&self.design)
    }

    fn pull(&self, arm: ArmId, rng: &mut dyn RngCore) -> Result<PullOutcome> {
        let z: f64 = StandardNormal.sample(rng);
        self.pull_with_normal(arm, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bernoulli_means() {
        let env = BernoulliEnv::new(10, 0.1, ArmId(0)).unwrap();
        assert_eq!(env.means()[0], 0.5);
        for &m in &env.means()[1..] {
            assert_abs_diff_eq!(m, 0.4, epsilon = 1e-15);
        }
        let env = BernoulliEnv::new(2, 0.02, ArmId(1)).unwrap();
        assert_abs_diff_eq!(env.means()[0], 0.48, epsilon = 1e-15);
        assert_eq!(env.means()[1], 0.5);
        assert_eq!(env.optimal_arm(), ArmId(1));
    }

    #[test]
    fn bernoulli_validation() {
        assert!(BernoulliEnv::new(10, 0.6, ArmId(0)).is_err());
        assert!(BernoulliEnv::new(10, 0.0, ArmId(0)).is_err());
        assert!(BernoulliEnv::new(1, 0.1, ArmId(0)).is_err());
        assert!(BernoulliEnv::new(3, 0.1, ArmId(3)).is_err());
    }

    #[test]
    fn bernoulli_threshold_coupling() {
        let env = BernoulliEnv::new(10, 0.1, ArmId(0)).unwrap();
        let out = env.pull_with_uniform(ArmId(3), 0.45).unwrap();
        assert_eq!(out.reward.value(), 0.0);
        assert_eq!(out.counterfactual_optimal.value(), 1.0);
    }

    #[test]
    fn bernoulli_regret_increment_is_binary() {
        // Three u-intervals: [0, 0.4) both pay, [0.4, 0.5) only the optimal
        // arm pays, [0.5, 1) neither pays.
        let env = BernoulliEnv::new(4, 0.1, ArmId(0)).unwrap();
        for (u, expect) in [
            (0.1, 0.0),
            (0.399, 0.0),
            (0.4, 1.0),
            (0.499, 1.0),
            (0.5, 0.0),
            (0.99, 0.0),
        ] {
            let out = env.pull_with_uniform(ArmId(2), u).unwrap();
            assert_eq!(
                out.counterfactual_optimal.value() - out.reward.value(),
                expect,
                "u={u}"
            );
        }
        let mut rng = Stream::from_seed_u64(5);
        for _ in 0..10_000 {
            let out = env.pull(ArmId(1), &mut rng).unwrap();
            let inc = out.counterfactual_optimal.value() - out.reward.value();
            assert!(inc == 0.0 || inc == 1.0);
            let opt = env.pull(ArmId(0), &mut rng).unwrap();
            assert_eq!(opt.reward, opt.counterfactual_optimal);
        }
    }

    #[test]
    fn bernoulli_long_run_average() {
        let env = BernoulliEnv::new(3, 0.1, ArmId(2)).unwrap();
        let mut rng = Stream::from_seed_u64(11);
        let n = 100_000;
        for arm in 0..3 {
            let total: f64 = (0..n)
                .map(|_| env.pull(ArmId(arm), &mut rng).unwrap().reward.value())
                .sum();
            let p = env.means()[arm];
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((total / n as f64 - p).abs() <= 3.0 * sd);
        }
    }

    #[test]
    fn factorial_means_match_reported_values() {
        let env = FactorialEnv::new(0.0).unwrap();
        let expect = [1.00, 0.80, 1.10, 1.00, 1.20, 1.05, 1.40, 1.36];
        for (m, e) in env.means().iter().zip(expect) {
            assert_abs_diff_eq!(*m, e, epsilon = 1e-12);
        }
        assert_eq!(env.optimal_arm(), ArmId(6));
    }

    #[test]
    fn factorial_design_is_full_factorial() {
        let env = FactorialEnv::new(1.0).unwrap();
        let x = env.design_matrix();
        assert_eq!(x.shape(), (8, 8));
        // full rank: the eight cells identify all eight coefficients
        assert!(x.clone().lu().determinant().abs() > 0.5);
        assert_eq!(x.row(7).iter().copied().collect::<Vec<_>>(), vec![1.0; 8]);
        assert_eq!(
            x.row(6).iter().copied().collect::<Vec<_>>(),
            vec![1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0]
        );
    }

    #[test]
    fn factorial_variances() {
        let env = FactorialEnv::new(2.0).unwrap();
        assert_eq!(env.variances(), &[1.0, 1.0, 1.0, 1.0, 3.0, 3.0, 3.0, 5.0]);
        let env = FactorialEnv::new(0.0).unwrap();
        assert!(env.variances().iter().all(|&v| v == 1.0));
        assert!(FactorialEnv::new(-0.1).is_err());
    }

    #[test]
    fn factorial_optimum_independent_of_gamma() {
        for gamma in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0] {
            assert_eq!(FactorialEnv::new(gamma).unwrap().optimal_arm(), ArmId(6));
        }
    }

    #[test]
    fn factorial_zero_noise_and_coupling() {
        let env = FactorialEnv::new(1.0).unwrap();
        let out = env.pull_with_normal(ArmId(3), 0.0).unwrap();
        assert_eq!(out.reward.value(), env.means()[3]);
        let mut rng = Stream::from_seed_u64(2);
        for _ in 0..1000 {
            let out = env.pull(ArmId(6), &mut rng).unwrap();
            assert_eq!(out.reward, out.counterfactual_optimal);
        }
    }

    #[test]
    fn factorial_all_ones_variance() {
        let env = FactorialEnv::new(4.0).unwrap();
        let mut rng = Stream::from_seed_u64(33);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| env.pull(ArmId(7), &mut rng).unwrap().reward.value())
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 9.0).abs() <= 0.15, "variance {var}");
        assert!((mean - 1.36).abs() < 0.05);
    }

    #[test]
    fn factorial_homoscedastic_residuals() {
        let env = FactorialEnv::new(0.0).unwrap();
        let mut rng = Stream::from_seed_u64(4);
        let n = 50_000;
        for arm in [0usize, 4, 7] {
            let resid: Vec<f64> = (0..n)
                .map(|_| env.pull(ArmId(arm), &mut rng).unwrap().reward.value() - env.means()[arm])
                .collect();
            let m = resid.iter().sum::<f64>() / n as f64;
            let v = resid.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!(
                m.abs() < 0.02 && (v - 1.0).abs() < 0.03,
                "arm {arm}: {m} {v}"
            );
        }
    }
}
