//! Spectral and dynamics engine for the two-dimensional harmonic oscillator in
//! noncommutative phase space.
//!
//! The crate is organized around the pipeline
//! noncommutative parameters → effective oscillator → truncated Fock-space
//! operator matrices → closed-form spectrum and invariant-based dynamics, with
//! every closed-form result audited by independent numerical oracles (dense
//! Hermitian diagonalization and direct Schrödinger time stepping).

// `!(x > y)` deliberately treats NaN as out of domain.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fockspace;
pub mod ncspace;
pub mod oracle;
pub mod quad;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
