//! Reference solutions, error norms and the benchmark drivers.

pub mod cantilever;
pub mod exact;
pub mod norms;
pub mod studies;

pub use cantilever::{CantileverDynamics, CantileverRun};
pub use exact::{colliding_flow, colliding_flow_exact, Beam, ExactSolution, Kolosov, PlateWithHole};
pub use norms::{error_norms, interpolate, ErrorReport};
pub use studies::*;
