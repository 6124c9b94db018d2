//! Truncated-Fock-basis simulator and trainer for a continuous-variable
//! quantum Boltzmann machine: entangled thermal seed state, trainable
//! non-unitary QITE blocks with ancilla post-selection, training of the
//! visible-mode density matrix against classical or quantum targets, and
//! photon-loss robustness studies.

pub mod error;
pub mod fock;
pub mod gates;
pub mod quadrature;
pub mod distributions;
pub mod engine;
pub mod trainer;
pub mod gadget;
pub mod noise;
pub mod config;
pub mod runner;

pub use error::{Error, Result};
