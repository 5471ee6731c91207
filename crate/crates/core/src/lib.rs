//! Virtual-cell formation and uplink resource allocation.
//!
//! The crate is organised the way the problem decomposes:
//!
//! - [`netgen`] draws seeded network scenarios (positions, path loss,
//!   shadowing, Rayleigh fading).
//! - [`cluster`] groups base stations into virtual base stations
//!   (minimax-linkage dendrogram, k-means, spectral) and affiliates users.
//! - [`ic`] allocates channels and powers inside a virtual cell when each
//!   base station decodes on its own (interference coordination).
//! - [`comp`] allocates powers when the base stations of a cell decode
//!   jointly, maximizing the log-det sum capacity.
//! - [`harness`] sweeps all of the above over Monte Carlo realizations.
//! - [`oracle`] holds brute-force reference solvers used to cross-check the
//!   fast paths.

pub mod cluster;
pub mod comp;
pub mod error;
pub mod harness;
pub mod ic;
pub mod netgen;
pub mod oracle;

pub use cluster::{AffiliationRule, BsPartition, Dendrogram, Point, VirtualCellLayout};
pub use comp::{CompPower, CompProblem};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, Report, Scheme};
pub use ic::{CellProblem, ChannelAssignment, PowerAllocation, SolverOptions};
pub use netgen::{NetworkScenario, ScenarioConfig};
