//! Bootstrap Thompson sampling for multi-armed bandits.
//!
//! Policies, benchmark environments, an exact enumeration of the
//! double-or-nothing bootstrap distribution for Bernoulli data, and a
//! replicated simulation harness with common-random-numbers regret.

pub mod arm;
pub mod bernoulli;
pub mod env;
pub mod error;
pub mod experiment;
pub mod linear;
pub mod oracle;
pub mod policy;
pub mod rng;
pub mod select;

#[cfg(test)]
mod testutil;

pub use arm::{ArmId, Reward, StepRecord};
pub use error::{BanditError, Result};
pub use policy::{Context, FixedArm, Policy};
pub use rng::{derive_stream, Stream, StreamKey, StreamRole};
pub use select::argmax_random_tiebreak;
