//! Steady axisymmetric Navier-Stokes flow in a circular pipe, as a small
//! perturbation of Hagen-Poiseuille flow.
//!
//! The perturbation is written with a stream function `psi` and a swirl
//! `v^theta`, Fourier transformed along the (periodized) pipe axis and
//! collocated on Chebyshev-type radial nodes. [`nonlinear::LinearSolver`]
//! applies the linearized solve mode by mode; [`nonlinear::picard_iterate`]
//! adds the quadratic terms. [`analysis`] holds the numerical checks of the
//! linear estimates, the decay fits and the radial inequalities.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod fields;
pub mod grid;
pub mod mode_solver;
pub mod nonlinear;
pub mod norms;
pub mod radial;
pub mod report;
pub mod state;
pub mod transform;
