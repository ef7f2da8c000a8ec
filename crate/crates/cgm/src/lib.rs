//! Simulation and numerical-analysis laboratory for the corner growth model
//! with inhomogeneous exponential weights.
//!
//! The crate is organized bottom-up:
//!
//! * [`params`] — doubly-indexed rate parameters `a_m(i)`, `b_n(j)` and their
//!   summary quantities (running minima, empirical measures).
//! * [`measures`] — finite measures on the line (atoms + uniform pieces) and
//!   their Cauchy transforms `A(z)`, `B(z)` with exact derivatives.
//! * [`centering`] — the finite-size variational problem: minimizer `zeta`,
//!   centering `M(m,n)`, variance scale `C(m,n)`, and the infinite-series
//!   variant for block-constant weight limits.
//! * [`shape`] — shape function `gamma(x,y)`, limit-shape geometry (boundary
//!   curve, flat segments, spikes/crevices), and limiting height/flux.
//! * [`lpp`] — last-passage dynamic programming: weight grids, wavefront
//!   solver, stationary boundary grids, exit points, growth clusters.
//! * [`tasep`] — height, particle, and flux observables of the associated
//!   exclusion process with step initial condition.
//! * [`verify`] — Monte Carlo verification: KS tests, Burke-property checks,
//!   permutation invariance, exit-point localization, Hausdorff comparison of
//!   clusters against predicted limit shapes.
//!
//! All randomness derives from a single `u64` seed through counter-based
//! streams ([`rng`]), so every artifact is bit-reproducible.

pub mod centering;
pub mod error;
pub mod lpp;
pub mod measures;
pub mod numeric;
pub mod params;
pub mod rng;
pub mod shape;
pub mod tasep;
pub mod verify;

pub use error::{Error, Result};
