//! Constructive solver for the coupling problem for entire functions.
//!
//! Given a finite set `sigma` of nonzero reals and coupling constants
//! `eta`, the solver builds the unique pair of real polynomials
//! `(phi_minus, phi_plus)` normalized by `phi_minus(0) = phi_plus(0) = 1`
//! that satisfies `phi_minus(l) = eta(l) * phi_plus(l)` on `sigma` and makes
//! `z * phi_minus * phi_plus / W` a Herglotz-Nevanlinna function, where
//! `W(z) = prod (1 - z / l)`.
//!
//! The crate is `no_std` (it needs `alloc`). Modules:
//!
//! - [`scalar`]: exact rationals and configurable-precision binary floats.
//! - [`poly`]: dense polynomials over either scalar kind.
//! - [`roots`]: Sturm sequences, real-root isolation, interlacing.
//! - [`herglotz`]: rational Herglotz-Nevanlinna functions and their
//!   continued-fraction expansion.
//! - [`coupling`]: the solver, the reduction of zero/infinite couplings, the
//!   general solvability test, truncation ladders and the verifier.
//! - [`string`]: forward and inverse spectral theory of a string carrying
//!   finitely many point masses.
//! - [`peakon`]: Camassa-Holm multipeakons reconstructed through coupling
//!   problems.
#![no_std]

extern crate alloc;

pub mod coupling;
pub mod herglotz;
pub mod peakon;
pub mod poly;
pub mod roots;
pub mod scalar;
pub mod string;

pub use coupling::{Coupling, CouplingData, CouplingError, SolutionPair, SolverTrace};
pub use herglotz::{CfTriple, ContinuedFraction, HerglotzError, HerglotzRational};
pub use poly::Polynomial;
pub use scalar::{Complex, Float, Rational, Scalar, ScalarKind};
