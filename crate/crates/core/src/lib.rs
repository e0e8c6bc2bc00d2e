//! Attractor-network path integration without the standard library.
//!
//! The crate holds everything that is pure computation:
//!
//! * [`cann`]: reference continuous attractor networks on a ring (head direction)
//!   and a 3-torus (grid cells), with population-vector decoding.
//! * [`encoding`]: interpolated one-hot encodings fed to the learned replicas.
//! * [`trajgen`]: seeded stimulus sequences and oracle-labelled datasets.
//! * [`replica`]: the recurrent replica network, exact BPTT, Adam and training.
//! * [`pi`]: cue integration and the joint pose state machine.
//! * [`graph`]: the spatial-experience graph and its relaxation.
//! * [`eval`]: trajectory association, alignment, error metrics and fidelity.
//!
//! File formats, timing and the command-line tool live in the `cannpi` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod angle;
pub mod cann;
pub mod encoding;
mod error;
pub mod eval;
pub mod graph;
pub mod pi;
pub mod replica;
pub mod rng;
pub mod trajgen;

pub use error::{Error, Result};
