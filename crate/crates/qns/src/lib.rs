//! Quantum no-signalling correlations as Choi matrices, strongly no-signalling
//! simulators, channel simulation, and perfect-strategy verification for
//! quantum non-local games.

pub mod channel;
pub mod classical;
pub mod correlation;
pub mod error;
pub mod games;
pub mod io;
pub mod linalg;
pub mod random;
pub mod report;
pub mod simulate;
pub mod stochastic;
pub mod tensor;
pub mod tracial;
pub mod valuation;

pub use channel::Channel;
pub use classical::{ClassicalCorrelation, ClassicalGame};
pub use correlation::{ClassTag, Correlation, SqnsCorrelation};
pub use error::{Error, Result};
pub use report::{Check, Report};
pub use stochastic::{StochOpMatrix, StronglyStochOpMatrix};
pub use tensor::{CMatrix, LabeledMatrix, Leg, LegSystem, C64, DEFAULT_TOL};
