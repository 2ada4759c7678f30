//! Numerical toolkit for quantum-information resources under operational
//! restrictions: channels, entropies, entanglement, discord, superselection
//! restricted Bell tests and the quantumness of operations.

pub mod bell;
pub mod channel_spec;
pub mod channels;
pub mod discord;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod infotheory;
pub mod io;
pub mod linalg;
pub mod optim;
pub mod phase;
pub mod quantumness;
pub mod random;

pub use channels::{ChoiMatrix, EinselectionSpec, QuantumChannel};
pub use error::{Error, Result};
pub use infotheory::ExtendedReal;
pub use linalg::{CMatrix, CVector, DensityMatrix, PureState, Tolerances, C64};
