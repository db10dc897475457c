use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{BanditError, Result};

/// Zero-based arm index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArmId(pub usize);

impl ArmId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }

    pub fn check(self, num_arms: usize) -> Result<Self> {
        if self.0 < num_arms {
            Ok(self)
        } else {
            Err(BanditError::ArmOutOfRange {
                arm: self.0,
                num_arms,
            })
        }
    }
}

impl fmt::Display for ArmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Observed reward. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Reward(f64);

impl Reward {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Reward(value))
        } else {
            Err(BanditError::NonFinite)
        }
    }

    pub fn binary(success: bool) -> Self {
        Reward(if success { 1.0 } else { 0.0 })
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// The reward as a success indicator, rejecting anything but 0 or 1.
    pub fn as_binary(self) -> Result<bool> {
        if self.0 == 1.0 {
            Ok(true)
        } else if self.0 == 0.0 {
            Ok(false)
        } else {
            Err(BanditError::NonBinaryReward(self.0))
        }
    }
}

/// One select/pull/update round as seen by the harness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: u64,
    pub arm: ArmId,
    pub reward: Reward,
    /// Reward the optimal arm would have paid with the same random draw.
    pub counterfactual_optimal: Reward,
}

impl StepRecord {
    pub fn regret(&self) -> f64 {
        self.counterfactual_optimal.value() - self.reward.value()
    }
}
