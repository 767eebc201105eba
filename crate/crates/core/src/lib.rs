//! Grover search on registers of Rydberg atoms.

pub mod dynamics;
pub mod error;
pub mod errorbudget;
pub mod hilbert;
pub mod interactions;
pub mod protocols;
pub mod pulses;
pub mod verify;

pub use error::{Error, Result};
