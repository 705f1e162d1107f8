//! Geometric Lévy models for asset pricing.
//!
//! The crate is organised bottom-up:
//!
//! - [`exponents`]: Lévy exponents `psi` of the supported families.
//! - [`premium`]: the excess rate of return `R(lambda, sigma)` and its FX inverse.
//! - [`pricing`]: pricing kernel, asset, FX and dividend valuations at a
//!   realised driver value.
//! - [`sampling`]: seedable simulation of increments and paths, Monte Carlo.
//! - [`options`]: call prices by Monte Carlo and exact series / quadrature.
//! - [`multifactor`]: independent vector drivers and piecewise-constant
//!   coefficient schedules.
//! - [`verify`]: the invariant suite run by `glm verify`.

pub mod error;
pub mod exponents;
pub mod quadrature;
pub mod premium;
pub mod pricing;
pub mod sampling;
pub mod options;
pub mod multifactor;
pub mod verify;

pub use error::{Error, Result};
pub use exponents::{FamilyKind, Family, Interval, LevyModel};
