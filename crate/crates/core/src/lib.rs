//! Simulation toolkit for the (n, n) quantum visual secret sharing scheme.
//!
//! Every pixel of a bilevel image is encoded into an n-qubit parity state
//! `|C_b⟩`, the equal superposition of all n-bit strings whose XOR is the
//! pixel bit `b` (0 = white, 1 = black). Participant `j` receives qubit `j`
//! of every pixel register. Measuring all n qubits and XOR-ing the outcome
//! recovers `b`; any proper subset of qubits has a uniform marginal and so
//! carries no information about the pixel.
//!
//! Modules:
//!
//! * [`statevector`]: dense n-qubit register with H, X, Z, CNOT, Toffoli,
//!   measurement and exact marginals.
//! * [`parity`]: parity-state construction, gate circuits and the
//!   assembly emitter.
//! * [`protocol`]: dealer and participant workflow, share and session files,
//!   subset audits.
//! * [`naor`]: the classical (n, n) pixel-expansion baseline and the scheme
//!   comparison report.
//! * [`image`]: bilevel images and PBM (P1/P4) I/O.
//!
//! Qubits are numbered from 1. Qubit 1 is the most significant bit of a
//! basis index, so the bitstring `x1 x2 ... xn` reads left to right.

pub mod error;
pub mod image;
pub mod naor;
pub mod parity;
pub mod protocol;
pub mod report;
pub mod seed;
pub mod stats;
pub mod statevector;

pub use error::{Error, Result};
pub use image::{BinaryImage, Color, PbmVariant};
pub use parity::{Circuit, Gate, ParitySpec};
pub use protocol::{AuditReport, Backend, SessionStore, ShareFile, Verdict};
pub use statevector::{BasisOutcome, MarginalDistribution, StateVector};
