//! Compilation of pairing-Hamiltonian dynamics onto nearest-neighbor qubit
//! chains, with an exact dense simulator to check the result.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the double-precision instantiation.

pub mod analysis;
pub mod compiler;
pub mod config;
pub mod error;
pub mod fourier;
pub mod identities;
pub mod models;
pub mod pauli;
pub mod scalar;
pub mod schedule;
pub mod simulator;
pub mod spectroscopy;

pub use error::{Error, Result};
pub use scalar::Real;

pub type DenseOperator = pauli::DenseOperator<f64>;
pub type StateVector = pauli::StateVector<f64>;
pub type PauliString = pauli::PauliString<f64>;
pub type PairingModel = models::PairingModel<f64>;
pub type HardwareModel = models::HardwareModel<f64>;
pub type Overrides = models::Overrides<f64>;
pub use models::{HardwareKind, TrotterOptions};
pub type GateSchedule = schedule::GateSchedule<f64>;
pub type Instruction = schedule::Instruction<f64>;
pub use schedule::{Axis, GateCount};
pub use compiler::{CompileOptions, SynthesisTarget, XxyyRoute, ZzRoute};
pub use analysis::Metric;
pub use config::Config;
pub type ProtocolConfig = spectroscopy::ProtocolConfig<f64>;
pub type EigenSectorTable = spectroscopy::EigenSectorTable<f64>;
pub use spectroscopy::{Gap, InitialState, Peak, Spectrum};
