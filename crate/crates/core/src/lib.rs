//! Exact construction and certification of Besicovitch cocycles over
//! irrational circle rotations.
//!
//! The cylinder map is `T(x, t) = (x + α mod 1, t + φ(x))` where
//! `φ = Σ_l (f_l(· + α) − f_l)` is assembled from fast-oscillating
//! piecewise-linear bumps tuned to the continued-fraction convergents of α.
//! Everything that carries a certificate is computed with arbitrary-precision
//! rationals; only the orbit simulator in [`dynamics`] uses (fixed-point)
//! approximations, and it tracks an explicit error bound.
//!
//! Module map:
//!
//! - [`cf`]: partial quotients, convergents, rational brackets of α
//! - [`params`]: level selection `k_n`, the scalars `A_n`, `Λ_n`, and growth certificates
//! - [`cocycle`]: exact evaluation of `f_n`, `φ`, `φ^(m)` and the direct Birkhoff sum
//! - [`targets`]: the four Cantor-type families `F^{s₋s₊}`
//! - [`audit`]: divergence certificates for sampled points of each family
//! - [`dimension`]: nested-interval Hausdorff dimension bounds and box counting
//! - [`dynamics`]: orbit simulation and empirical chaos probes

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod audit;
pub mod cf;
pub mod cocycle;
pub mod dimension;
pub mod dynamics;
mod error;
pub mod logs;
pub mod params;
pub mod rat;
pub mod targets;

pub use error::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;
