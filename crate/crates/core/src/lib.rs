//! Ensemble-based a posteriori error estimation.
//!
//! A set of numerical solutions computed on one grid by structurally different
//! schemes differ from each other only through their approximation errors.
//! Stacking all pairwise differences gives a rank-deficient linear system for
//! the per-solution errors; [`inverse`] regularizes it with a zero-order
//! Tikhonov term and solves it independently at every vectorized grid element.
//!
//! * [`field`] holds the grid/field containers and the flat-index convention.
//! * [`io`] reads and writes the shared field container (binary and CSV).
//! * [`inverse`] assembles the difference system and solves the inverse problem.
//! * [`metrics`] computes effectivity indices and related quality measures.

pub mod error;
pub mod field;
pub mod inverse;
pub mod io;
pub mod metrics;

pub use error::{Error, Result};
pub use field::{FieldSet, FlatIndex, Grid2D, GridField, Quantity, SolutionEnsemble, VarTag};
pub use inverse::{
    DifferenceSystem, ErrorEstimate, InitialGuess, IpConfig, PointDiagnostics, PointRhs, SolverKind,
};
