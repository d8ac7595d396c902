//! Measurement-disturbance quantumness of quantum states and ensembles.
//!
//! The crate computes how much complete projective measurements must
//! disturb a state or an ensemble, the closed-form entanglement of
//! disturbance of pure bipartite states with its analytic bounds, Haar
//! averages, and bounds on the data-hiding capability of state pairs.

pub mod cli;
pub mod disturbance;
pub mod error;
pub mod hiding;
pub mod linalg;
pub mod measure;
mod optimize;
pub mod parallel;
pub mod qubit;
pub mod states;


pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use states::{Ensemble, PureState, QuantumState};
pub use disturbance::{entanglement_of_disturbance, quantumness, Distance, DisturbanceReport, OptimizerConfig};
pub use measure::{MeasurementScope, ProjectiveMeasurement};
