//! Exact spectra of generalized quantum Rabi models.
//!
//! Local Frobenius solutions of the Bargmann-space ODEs are glued by a
//! Wronskian condition whose zeros are the eigenvalues. A truncated Fock-space
//! diagonalization is provided as an independent check.

// Negated float comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod dual;
pub mod cli;
pub mod fockoracle;
pub mod heun;
pub mod odecore;
pub mod rabi_eps;
pub mod rabi_nl;
pub mod spectral;
pub mod spectrum;
