//! Dynamics of the time-dependent Hamiltonian `H(t) = p^4/8 eta^3 + p^2/2 mu + f(t) x`:
//! invariant construction, power-series eigenfunctions of the invariant, and an
//! ordered-exponential evolution operator checked against exact and split-step
//! propagators.

pub mod algebra;
pub mod config;
pub mod error;
pub mod grid;
pub mod invariant;
pub mod params;
pub mod pipeline;
pub mod propagator;
pub mod schedule;
pub mod series;

pub use algebra::{AlgebraElement, Basis, ConstraintTable};
pub use error::{Error, Result};
pub use params::PhysicalParams;
pub use schedule::{Schedule, TimeGrid, Trajectory};
