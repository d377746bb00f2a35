//! Steady 2D Euler solutions and exact shock-interference flowfields.

pub mod analytic;
pub mod case;
pub mod error;
pub mod gas;

pub use case::{CaseKind, FlowCase};
pub use error::{FlowError, Result};
pub use gas::{Axis, Cons, Primitive, GAMMA};
pub mod boundary;
pub mod march;
pub mod schemes;
pub mod state;
pub mod verify;

pub use boundary::{Boundary, Side};
pub use march::{march_to_steady, MarchConfig, RunResult, Solver};
pub use schemes::{Dissipation, Method, SchemeSpec};
pub use state::State;
