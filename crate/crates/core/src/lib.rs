//! Multi-district Eggenberger–Pólya urn model of voter preference formation.
//!
//! Each district is an urn of coloured balls (one colour per party). At every
//! step a district is chosen uniformly at random, a ball is drawn either from
//! that district or, with the imitation probability, from another district,
//! and `K` balls of the drawn colour are added to the chosen district.
//!
//! The crate is split into:
//!
//! - [`config`]: simulation parameters and initial allocations,
//! - [`urn`]: the sampling engine,
//! - [`election`]: first-past-the-post tallies and regional aggregates,
//! - [`stats`]: replicate-level reductions (histograms, fits, KS),
//! - [`analytic`]: exact distributions and seat–vote curves used as oracles,
//! - [`rng`]: per-replicate random streams.

pub mod analytic;
pub mod config;
pub mod election;
pub mod rng;
pub mod stats;
pub mod urn;

pub use config::{AllocationBlock, ConfigError, InitialAllocation, SimulationConfig};
pub use election::{regional_shares, tally, ElectionResult, RegionalSplit, TieRule};
pub use rng::{replicate_rng, replicate_seed, SimRng};
pub use urn::{init_state, simulate, simulate_with, DrawEvent, UrnProcess, UrnState};
