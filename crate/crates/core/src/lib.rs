//! Causal diffusion by iterated spherical means.
//!
//! A substance diffusing with constant speed `c0` and period `tau` is
//! transported by averaging over spheres: on `(n tau, (n+1) tau]` the
//! concentration is the spherical mean of the last checkpoint
//! `v(., n tau)` over spheres of radius `c0 (t - n tau)`. The crate
//! provides the Green function of this process as a rotationally
//! symmetric measure, a grid-based evolution engine, the flux and
//! wave-type residual operators, and numerical diagnostics contrasting it
//! with convolution semigroups such as the Gaussian heat kernel.

pub mod checks;
pub mod diagnostics;
pub mod dim;
pub mod error;
pub mod evolution;
pub mod field;
pub mod quadrature;
pub mod radial;
mod special;

pub use dim::Dim;
pub use error::{Error, Result};
pub use radial::{convolve_radial, Atom, RadialMeasure, Segment, ShellKernel};
pub use field::{GridField, ScalarField, SphereQuadrature};
pub use evolution::{ModelParams, TimeDecomposition};
