//! Maps of the assortative-preference plane `(P^A_0, P^A_1)` and the critical
//! swap probability below which only source-basin structure remains.

mod boundary;
mod critical;
mod grid;

pub use boundary::{extract_boundaries, BoundaryPolyline};
pub use critical::{
    boundary_residuals, critical_swap, CriticalSwap, RootCandidate, BOUNDARY_NAMES,
};
pub use grid::{
    scan_grid, Axis, PhaseGrid, PhasePoint, REFERENCE_GROUP_SIZE, REFERENCE_MEAN_DEGREE,
};
