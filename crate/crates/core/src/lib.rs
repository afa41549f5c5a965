//! Geodesic loop dynamics, blow-down points and semiclassical quasimodes on
//! model Riemannian manifolds.

pub mod dynamics;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod harness;
pub mod numerics;
pub mod quasimode;
pub mod spectral;

pub use error::{Error, Result};
