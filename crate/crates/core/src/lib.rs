//! Pseudospectral laboratory for the cubic fourth-order nonlinear Schrödinger
//! equation
//!
//! ```text
//! i ∂ₜu − Δ²u + μΔu = ±|u|²u
//! ```
//!
//! with Wiener-randomized initial data on a periodic box.
//!
//! The crate is organized bottom-up:
//!
//! * [`grid`] — torus geometry, unitary FFTs, Fourier multipliers,
//!   Littlewood-Paley projections and every norm used downstream.
//! * [`randomization`] — the smooth partition of unity, counter-based
//!   coefficient sampling and the unit/dilated cube randomizations.
//! * [`propagator`] — the free flow `U_μ(t) = exp(−it(Δ² − μΔ))`, dispersive
//!   decay fitting and admissible-pair checks.
//! * [`solver`] — Strang split-step integration, conserved quantities, the
//!   Duhamel map, Picard iteration and the scattering diagnostic.
//! * [`estimates`] — exponent formulas, the scaling identity, Monte Carlo tail
//!   experiments and the bilinear ratio sweep.
//! * [`snapshot`] — the binary field snapshot format and trajectory index.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimates;
pub mod fit;
pub mod grid;
pub mod propagator;
pub mod randomization;
pub mod snapshot;
pub mod solver;
pub mod step;

mod fft;

pub use error::{Error, Result};
pub use grid::{Field, Grid, LpMode, NormKind, Representation, Trajectory};
pub use num_complex::Complex64;
pub use propagator::PropagatorParams;
pub use randomization::{BumpFunction, CoefficientDistribution, RandomizationSpec};
pub use solver::{EvolutionConfig, PicardConfig, Sign};
