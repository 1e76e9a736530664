//! Simulation and analysis of a generative model for community types in
//! directed networks with two node groups.
//!
//! Networks evolve under per-group swap and change moves ([`dynamics`]); their
//! block densities are classified into assortative, core-periphery,
//! disassortative or source-basin relationships ([`metrics`]); the long-time
//! equilibrium is predicted in closed form ([`meanfield`]); and the
//! assortative-preference plane is mapped into regions of each type
//! ([`phase`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod meanfield;
pub mod metrics;
pub mod params;
pub mod phase;
pub mod rng;

pub use dynamics::{empirical_beta, MoveOutcome, SimClock, Simulation, TrajectoryRecord};
pub use error::{Error, Result};
pub use graph::{BlockCounts, Group, LabeledDigraph, NodeId};
pub use meanfield::{omega_predicted, MeanFieldSolution};
pub use metrics::{classify, density, density_degree_normalized, CommunityType, DensityMatrix};
pub use params::{GroupParams, ModelParams};
pub use phase::{critical_swap, scan_grid, CriticalSwap, PhaseGrid};
pub use rng::RngHandle;
