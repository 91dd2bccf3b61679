//! Randomised, time-changed inverse first-passage problem for Lévy processes.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! * [`levy`]: mixed-exponential jump-diffusions and their Laplace and
//!   characteristic exponents.
//! * [`spectral`]: the minimiser `θ*`, the killing-rate bound `λ*`, the left
//!   inverse `φ̄` and the roots of the Cramér–Lundberg equation `ψ(ρ) = q`.
//! * [`wiener_hopf`]: Wiener–Hopf factors (including the continuation to
//!   `q ∈ [-λ*, 0)`), Esscher identities and first-passage transforms.
//! * [`qid`]: the λ-invariant initial law `μ_λ` of the process killed below zero.
//! * [`curve`] and [`ifpt`]: target survival curves, the time change
//!   `I(t) = -log H̄(t) / λ`, and the frailty construction.
//! * [`mc`]: exact path sampling of first-passage times.
//! * [`cva`]: expected positive exposure and the fair value of the loss on a
//!   vulnerable call.
//!
//! IO, parallel drivers and the command line live in the `levy-ifpt` crate.

#![no_std]
// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod prelude;

pub mod curve;
pub mod cva;
pub mod error;
pub mod ifpt;
pub mod laplace;
pub mod levy;
pub mod mc;
pub mod poly;
pub mod qid;
pub mod quad;
pub mod spectral;
pub mod wiener_hopf;

pub use curve::SurvivalCurve;
pub use error::{Error, Result};
pub use levy::{BrownianDriftLevy, ExpTerm, MixedExpLevy, ValidationReport};
pub use num_complex::Complex64;
pub use qid::QuasiInvariantDist;
pub use spectral::{RootSet, SpectralData};
