//! Continuous-time quantum walks (CTQW) and classical continuous-time random
//! walks (CTRW) on finite graphs.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: generators for the Dual Sierpinski Gasket, Cayley trees,
//!   hypercubic tori, rings, chains and complete graphs, plus Laplacians and
//!   chemical distances.
//! - [`spectral`]: dense eigendecomposition, the exact iterative DSG
//!   spectrum and degeneracy clustering.
//! - [`dynamics`]: spectral propagators for the classical master equation
//!   and the Schrödinger equation with `H = γL`.
//! - [`observables`]: displacements, return probabilities, long-time
//!   averages and envelope/crossing diagnostics.
//! - [`bessel`] and [`analytic`]: closed-form infinite-lattice baselines.
//! - [`io`]: JSON and CSV exchange formats.
//!
//! Time is always measured in units of `1/γ`.

pub mod analytic;
pub mod bessel;
pub mod dynamics;
mod error;
pub mod graph;
pub mod io;
pub mod observables;
pub mod spectral;

pub use error::{Error, Result};
