//! Spectral solver for steady traveling waves of a viscous, heat-conducting
//! fluid layer with a free surface and temperature-dependent surface tension.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod linear;
pub mod model;
pub mod nonlinear;
pub mod ode;
pub mod spectral;

pub use error::{Error, Result};
