//! Team formation from additively separable preferences: allocation
//! mechanisms, an exact welfare optimizer, fairness metrics and an
//! experiment harness.

pub mod aceei;
pub mod data;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod mechanisms;
pub mod metrics;
pub mod model;
pub mod optimizer;

pub use error::{Error, Result};
pub use mechanisms::{Mechanism, MechanismKind};
pub use model::{feasible, team_size_schedule, validate_partition, Game, Partition, SerialOrder, SizeRule};
