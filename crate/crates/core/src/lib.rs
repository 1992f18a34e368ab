//! Timed navigation of a disk robot among moving disk obstacles on a grid.
//!
//! The pipeline has four stages:
//!
//! 1. [`planner`] searches (configuration, safe interval) states for a timed
//!    plan of wait, rotate and translate actions, each starting and ending at
//!    rest, that keeps clear of static cells and of moving obstacles
//!    (optionally with an extra safety margin δ).
//! 2. [`refiner`] turns every plan action into an acceleration-bounded
//!    reference: accelerate, cruise, decelerate per axis, and a cubic for
//!    heading changes.
//! 3. [`controller_sim`] tracks the reference with a pole-placement state
//!    feedback on a double integrator and audits clearance at every step.
//! 4. [`bench`] runs batches of random instances and aggregates success rate,
//!    tracking error and cost per acceleration bound and inflation.

pub mod bench;
pub mod controller_sim;
pub mod error;
pub mod geometry;
pub mod grid_world;
pub mod planner;
pub mod refiner;
pub mod safe_intervals;

pub use error::{Error, Result};
pub use geometry::Point2;
