//! Spectral laboratory for the periodic generalized KdV equation
//! `u_t + u_xxx = ∂_x P(u)` on 𝕋 = [0, 2π).

pub mod cli;
pub mod config;
pub mod dispersion;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod fourier;
pub mod gauge;
pub mod nonlinearity;
pub mod normal_form;
pub mod solver;
pub mod tuples;

pub use error::{Error, Result};
pub use fourier::{Band, PaddedField, SobolevIndex, SpectralField};
pub use gauge::Trajectory;
pub use nonlinearity::PolyNonlinearity;
