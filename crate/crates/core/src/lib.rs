//! Frequency-in-time (FIT) and quantum spectral analysis (QSA) estimators with the
//! multiresolution, denoising, super-resolution, edge and metric machinery around them.

pub mod base;
pub mod cli;
pub mod denoise;
pub mod edges;
pub mod error;
pub mod fit1d;
pub mod fit2d;
pub mod io;
pub mod metrics;
pub mod multires;
pub mod qsa;
pub mod superres;
pub mod synth;

pub use base::{Image, Kernel1D, Kernel2D, Padding, Plane, Signal};
pub use error::{Error, Result};
pub use multires::Basis;
