//! Spectral Galerkin solutions of the incompressible MHD equations on the
//! d-torus, their a-posteriori error estimators, and existence certificates
//! for the exact solution obtained from scalar control Cauchy problems.
//!
//! The pipeline, end to end:
//!
//! 1. build a divergence-free initial pair `(u0, b0)` in Fourier space
//!    ([`data`]),
//! 2. integrate the Galerkin ODE system on a finite symmetric mode set `G`
//!    ([`galerkin`]),
//! 3. sample the growth estimators `D_p` and the differential error
//!    estimators `ε_p` supported on `dG` ([`estimators`]),
//! 4. feed them into the Riccati-type control equation of order `n`; its
//!    solution `R_n` bounds `‖u - u_G‖_n`, its blow-up time is a certified
//!    lower bound on the exact solution's lifespan, and the condition
//!    `(D_n + R_n)(t1) ≤ μ / Ĝ_n` upgrades the bound to global existence
//!    with an explicit decay envelope ([`control`]).
//!
//! [`pipeline`] wires these into deterministic, file-producing runs.

pub mod bilinear;
pub mod constants;
pub mod control;
pub mod data;
pub mod error;
pub mod estimators;
pub mod field;
pub mod galerkin;
pub mod mode;
pub mod ode;
pub mod pipeline;
pub mod spline;

pub use error::{Error, Result};
