//! Numerical simulator and geometric verification engine for closed
//! Dirac-Nambu-Goto bosonic p-branes (strings and membranes).
//!
//! The crate evolves the constrained Hamiltonian system of a p-brane in a
//! fixed background spacetime, monitors its constraints and Poincare charges,
//! evaluates the covariant symplectic structure on solution perturbations,
//! checks the discretized Poisson-bracket algebra, and computes the
//! Gauss-Bonnet canonical pair on string worldsheets.

pub mod background;
pub mod charges;
pub mod dynamics;
pub mod error;
pub mod gauss_bonnet;
pub mod geometry;
pub mod grid;
pub mod runner;
pub mod scenario;
pub mod symplectic;
pub mod verify;

pub use background::BackgroundMetric;
pub use dynamics::{GaugeChoice, PhaseState, Trajectory};
pub use error::{Error, Result};
pub use grid::{Grid, GridField, SmallMatrix};
