//! Dense qudit simulation of quantum maskers and of a qudit commitment
//! scheme whose entangled commodity (QOTT) comes from a trusted initializer.
//!
//! The crate is organised bottom-up:
//!
//! * [`qudit`]: labelled registers, states, gates, measurement and
//!   information measures over dense complex matrices.
//! * [`maskers`]: the four concrete masker circuits, their purification to a
//!   safe-key state, entropy audits and dual-masker synthesis.
//! * [`qott`]: the commodity prepared by the trusted initializer, its twirl
//!   structure and shared-randomness accounting.
//! * [`protocol`]: SETUP / COMMIT / REVEAL with honest and adversarial
//!   parties, the delayed-teleportation oracle, noise and repetition.
//! * [`baseline`]: the classical line/point one-time-table bit commitment.

pub mod baseline;
pub mod error;
pub mod maskers;
pub mod protocol;
pub mod qott;
pub mod qudit;
pub mod rng;

pub use error::{Error, Result};
pub use qudit::{DensityOperator, Dim, Ensemble, Matrix, PureState, Register, Unitary, Vector, C64};
