//! Quantum state-vector simulation and interference path sums.
//!
//! The crate covers dense pure-state simulation ([`statevec`]), product-state
//! and Schmidt-rank analysis ([`entanglement`]), Boolean functions
//! ([`boolean`]), an audited algorithm suite ([`circuits`]), multi-barrier
//! interference amplitudes by path enumeration and by forward recursion
//! ([`interference`]), and a trainable interference neuron
//! ([`approximator`]). File and wire formats live in [`formats`].

pub mod approximator;
pub mod boolean;
pub mod circuits;
pub mod entanglement;
pub mod error;
pub mod formats;
pub mod interference;
pub mod statevec;

pub use error::{Error, Result};
pub use statevec::{Amplitude, PureState, SingleQubitGate};
