//! Numerical toolkit for critical p-Laplacian problems with mixed
//! Dirichlet / Robin boundary conditions.
//!
//! The crate computes the universal constants of the problem as radial
//! integrals, evaluates extremal-bubble test functions and their energies
//! on curved half-ball model domains, fits the large-lambda expansions of
//! those energies, checks quotient levels against the concentration
//! threshold `S / 2^{p/n}`, and estimates the Sobolev quotient on planar
//! domains by finite-element minimization.
//!
//! Modules map onto the pipeline:
//!
//! * [`constants`] - radial-integral constants, the Sobolev constant and
//!   the concentration threshold;
//! * [`bubble`] - the extremal profile, cutoff test functions, and a
//!   pointwise residual check of the profile equation;
//! * [`geometry`] - curved half-ball model domains with volume and
//!   boundary-graph quadrature;
//! * [`asymptotics`] - lambda sweeps, expansion fits, threshold verdicts,
//!   dominance of the curvature vs boundary-potential channels;
//! * [`fem`] - planar meshes and the projected-descent quotient minimizer;
//! * [`config`] / [`runner`] - batch experiment configs and report
//!   generation for the command-line front end.

pub mod asymptotics;
pub mod bubble;
pub mod config;
pub mod constants;
pub mod error;
pub mod fem;
pub mod fit;
pub mod geometry;
pub mod quad;
pub mod runner;

pub use error::{Convergence, Error, Result};
