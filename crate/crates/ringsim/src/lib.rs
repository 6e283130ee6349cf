//! Simulation suite for a symmetry-protected qubit built from a ring of six
//! Josephson junctions.
//!
//! The crate is organised around the physical pipeline:
//!
//! * [`spin`] — exact diagonalization of the periodic M-spin chain and the
//!   symmetry classification of its low-lying doublet.
//! * [`sparse`] — Lanczos eigensolver for large sparse Hermitian operators,
//!   plus a dense reference solver used as an oracle.
//! * [`circuit`] — full charge-basis quantization of the six-node Josephson
//!   ring: capacitance matrix, flux bookkeeping, spectra, matrix elements.
//! * [`potential`] — classical potential landscape of the ring, minima and
//!   junction currents.
//! * [`noise`] — 1/f noise synthesis, response-surface fitting of the qubit
//!   gap and Monte Carlo dephasing curves.
//! * [`disorder`] — random parameter disorder ensembles.
//! * [`runner`] — manifest-driven batch experiments writing CSV artifacts,
//!   used by the `ringsim` binary and the examples.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod circuit;
pub mod csvio;
pub mod disorder;
pub mod heatmap;
pub mod manifest;
pub mod noise;
pub mod potential;
pub mod runner;
pub mod sparse;
pub mod spin;

pub use num_complex::Complex64;
