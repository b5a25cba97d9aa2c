//! Speculative sampling for flow-matching ODEs.
//!
//! A sampler integrates `dx/dt = v(x, t)` over a [`TimeGrid`] on `[0, 1]`.
//! [`full_euler`] is the sequential baseline. [`flowcast`] drafts every remaining
//! node from the current anchor with the anchor velocity held constant, verifies
//! all drafts in one parallel batch, and corrects at the first draft whose
//! velocity strays more than ε (in MSE) from the anchor's.
//! [`analysis`] evaluates the global error bound and the threshold rule that
//! keeps speculative deviation within a tolerance, and [`bench`] runs seeded
//! sweeps that write CSV and JSON results.

// NaN must fail range checks, so they are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bench;
pub mod error;
pub mod field;
pub mod fields;
pub mod grid;
pub mod integrator;
pub mod sampling;
pub mod state;
pub mod stats;

pub use error::{FlowError, Result};
pub use field::{FieldRegularity, Provenance, VelocityField};
pub use grid::TimeGrid;
pub use integrator::{flowcast, full_euler, reference_on_grid, reference_solution, SpecRun, SpecTrace, Trajectory};
pub use state::{mse, StateVector};
pub use stats::{CorrectionRule, RunStats, SpecConfig};
