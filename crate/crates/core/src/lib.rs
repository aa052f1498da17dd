//! Numerical harmonic analysis for Lévy-type operators on compact Lie
//! groups (the d-torus and SU(2)).
//!
//! The crate builds generators of Feller semigroups from their
//! characteristics (killing rate c, drift b, diffusion matrix a, jump
//! measure μ), computes their pseudo-differential symbols weight-by-weight
//! through noncommutative Fourier analysis, evolves the associated
//! semigroups spectrally, cross-validates them against Monte Carlo path
//! simulation, verifies the positive maximum principle, and inverts the
//! canonical decomposition to recover characteristics from a black-box
//! operator.
//!
//! Module layout:
//! * [`group`] — group arithmetic, exponential charts, Haar quadrature;
//! * [`rep`] — irreducible representations and derived representations;
//! * [`fourier`] — forward/inverse Fourier transforms, decay profiles,
//!   dual zeta sums;
//! * [`generator`] — Lévy measures, characteristics, generator application;
//! * [`symbol`] — symbols, spectral synthesis, semigroup evolution;
//! * [`simulate`] — path simulation and empirical semigroups;
//! * [`pmp`] — positive-maximum-principle checks and characteristic
//!   extraction.

pub mod error;
pub mod fourier;
pub mod generator;
pub mod group;
pub mod linalg;
pub mod pmp;
pub mod rep;
pub mod simulate;
pub mod symbol;

pub use error::{LieflowError, Result};
