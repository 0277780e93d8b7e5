//! Composition operators `C_T f = f ∘ T` on Orlicz–Sobolev spaces, made
//! computable on two carrier models:
//!
//! * finite atomic measure spaces with exact rational weights ([`measure`],
//!   [`analysis`], [`oracle`]), where kernels, injectivity and ascent are
//!   decided exactly;
//! * rectangular grids in one or two dimensions ([`grid`]), where weak
//!   derivatives are finite differences and the chain rule and boundedness
//!   estimate for affine maps are checked numerically.
//!
//! [`orlicz`] supplies the N-functions, modulars and Luxemburg norms used by
//! both. [`cli`] holds the scenario format and the `oplab` commands.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod grid;
pub mod measure;
pub mod oracle;
pub mod orlicz;
pub mod rational;

pub use error::{Error, Result};
pub use rational::Rational;
