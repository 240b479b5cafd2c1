//! Piecewise-stationary multi-armed bandits: classical policies, the
//! single-change instances that fool them, lower-bound calculators and a
//! certification harness that checks each bound against simulation.

pub mod bounds;
pub mod error;
pub mod figures;
pub mod forge;
pub mod instance;
pub mod policy;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
pub use instance::{Instance, RewardSpec, Segment, ValidationReport};
pub use policy::{init_policy, Policy, PolicySpec, TieResolver, TieRule};

/// Seed used whenever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_240_917;
