use rand::RngCore;

use crate::arm::{ArmId, Reward};
use crate::error::Result;
use crate::linear::ArmDesign;

/// Side information handed to a policy at each round.
#[derive(Debug, Clone, Copy)]
pub enum Context<'a> {
    /// Bernoulli bandits carry no context.
    Empty,
    /// Feature rows of every arm; static for the factorial environment.
    Design(&'a ArmDesign),
}

/// A bandit policy. The harness calls `select` and `update` strictly alternately.
///
/// `select` draws from the policy stream; `update` draws replicate weights
/// from the replicate-weights stream.
pub trait Policy: Send {
    fn name(&self) -> &'static str;

    fn select(&mut self, context: Context<'_>, rng: &mut dyn RngCore) -> Result<ArmId>;

    fn update(
        &mut self,
        context: Context<'_>,
        arm: ArmId,
        reward: Reward,
        rng: &mut dyn RngCore,
    ) -> Result<()>;

    /// Cumulative count of replicate coin/weight evaluations performed by
    /// `update`. Zero for policies without replicates.
    fn replicate_update_ops(&self) -> u64 {
        0
    }
}

/// Plays the same arm every round. Useful as a regret baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedArm(pub ArmId);

impl Policy for FixedArm {
    fn name(&self) -> &'static str {
        "fixed-arm"
    }

    fn select(&mut self, _context: Context<'_>, _rng: &mut dyn RngCore) -> Result<ArmId> {
        Ok(self.0)
    }

    fn update(
        &mut self,
        _context: Context<'_>,
        _arm: ArmId,
        _reward: Reward,
        _rng: &mut dyn RngCore,
    ) -> Result<()> {
        Ok(())
    }
}
