//! State-averaged orbital-optimized variational quantum eigensolver (SA-OO-VQE)
//! on a dense statevector simulator.
//!
//! The crate is organized bottom-up:
//!
//! * [`integrals`]: integral containers, FCIDUMP / AOINT readers and writers,
//!   MO transformation and the frozen-core active-space Hamiltonian.
//! * [`fermion`] and [`pauli`]: spin-free second-quantized operators, the
//!   Jordan-Wigner mapping and Pauli-sum algebra.
//! * [`statevector`] and [`rdm`]: state preparation, exponentiated Pauli
//!   evolution, expectation values and spin-free reduced density matrices.
//! * [`ansatz`]: the generalized spin-free doubles ansatz with its Trotter
//!   ordering and gate accounting.
//! * [`savqe`]: the state-averaged VQE inner loop.
//! * [`orbital`]: state-averaged Newton-Raphson orbital optimization.
//! * [`reference`]: exact CASCI, the internal SA-CASSCF reference and
//!   cross-basis overlaps/fidelities.
//! * [`ci_model`]: two-level cone models for conical intersections.
//! * [`driver`]: the outer SA-OO-VQE loop, PES scans and crossing location.

// NaN must fail validity checks, so `!(x > 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod ci_model;
pub mod cli;
pub mod driver;
mod error;
pub mod fermion;
pub mod integrals;
pub mod optimize;
pub mod orbital;
pub mod pauli;
pub mod rdm;
pub mod reference;
pub mod savqe;
pub mod statevector;
pub mod synthetic;
pub mod tensor;

pub use error::{Error, Result};
