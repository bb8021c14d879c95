//! Variational simulation of quench dynamics in the tilted Ising chain with
//! neural quantum states.

pub mod ansatz;
pub mod error;
pub mod estimators;
pub mod evolution;
pub mod linalg;
pub mod oracle;
pub mod sampling;
pub mod solvers;
pub mod spin;

pub use faer::c64;

pub use ansatz::{Ansatz, Fnn, Network, Rbm, Shape};
pub use error::{Error, Result};
pub use sampling::{MetropolisConfig, SampleMode, SampleSet, Sampler};
pub use solvers::{Partition, SolverConfig, SolverDiagnostics, SolverMethod};
pub use spin::{SpinConfig, TiltedIsing, TrotterBlock, TrotterSchedule};
