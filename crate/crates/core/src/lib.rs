//! Spatial non-adiabatic passage of a charged particle in a three-trap ring
//! threaded by magnetic flux.
//!
//! * [`model3l`]: three-level Hamiltonian with Peierls phases and its propagator.
//! * [`pulsedesign`]: SAP pulses, counter-diabatic driving and invariant-based
//!   inverse engineering of the tunnelling amplitudes.
//! * [`mapping`]: delta-trap bound states and the table that converts
//!   tunnelling amplitudes into barrier heights and trap depths.
//! * [`continuum`]: split-step propagation of the 1D ring model.
//! * [`harness`]: named scenarios, scans and CSV output behind the CLI.

pub mod continuum;
pub mod error;
pub mod harness;
pub mod io;
pub mod mapping;
pub mod model3l;
pub mod pulsedesign;

pub use error::{Error, Result};
