//! Sparse signal recovery from compressed linear measurements.
//!
//! The pipeline: [`problem`] builds s-sparse ground truths, random
//! measurement matrices, and exact measurements y = U x; [`solver`] runs the
//! thresholded gradient iteration with a geometrically decaying l1 parameter;
//! [`rip`] measures restricted-isometry constants by brute force (or random
//! sampling at sizes where enumeration is infeasible); [`checks`] re-verifies
//! the solver's support-concentration and error-decay guarantees from raw
//! iterates; [`harness`] orchestrates seeded multi-trial sweeps over
//! (s, m) grids and aggregates them into plot-ready tables.

pub mod checks;
pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod problem;
pub mod rip;
pub mod solver;

pub use error::{Error, Result};
