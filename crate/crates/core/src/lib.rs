//! Phase times for relativistic particles tunneling through two successive
//! square barriers.
//!
//! The crate evaluates the closed-form two-barrier phase time, its
//! transparent-limit (`qa ≪ 1`) reductions, and an independent 1-D Dirac
//! scattering oracle whose phase time is obtained by numerically
//! differentiating the transmission phase with respect to energy. On top of
//! those sit the traversal-velocity analysis and the `tunnelgate` command-line
//! tool.
//!
//! All physics is evaluated internally in natural units (`ħ = c = m = 1`).
//! [`BarrierSystem`] accepts either natural or SI inputs and converts once at
//! the boundary.

pub mod analysis;
pub mod approx;
pub mod cli;
pub mod error;
pub mod exact;
pub mod grid;
pub mod kinematics;
pub mod oracle;
pub mod units;
pub mod verify;

pub use error::{Error, Result};
pub use exact::{Method, TimeResult};
pub use grid::Execution;
pub use kinematics::{derive_kinematics, validate_transparency, BarrierSystem, Kinematics, SolutionBranch};
pub use units::UnitSystem;
