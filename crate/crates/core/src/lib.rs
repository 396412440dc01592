//! Capacity formulas for channel-state coding: entanglement generation from a
//! noisy channel used together with a noisy shared bipartite state.
//!
//! The crate is `no_std` and only needs `alloc`. I/O, configuration and the
//! command-line front end live in the `csc` crate.

#![no_std]

extern crate alloc;

pub mod capacity;
pub mod channel;
pub mod decoupling;
pub mod error;
pub mod info;
pub mod linalg;
pub mod optimize;
pub mod state;
pub mod superactivation;

pub use channel::{state_as_channel, IsometricExtension, KrausChannel};
pub use error::{Error, Result};
pub use state::{trace_distance, LabeledState, Spectrum, Subsystem};
