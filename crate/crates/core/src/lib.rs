//! Reconstruction of bordered Riemann surfaces from restricted Dirichlet-to-Neumann data.
//!
//! The boundary datum is a closed curve `γ` with three real functions `u_ℓ` and the
//! boundary traces of the holomorphic forms `∂ũ_ℓ`. From it the crate recovers the
//! complex curve `Y ⊂ CP²` fiber by fiber, the values of the meromorphic quotients
//! `∂ũ_ℓ/∂F₂`, and decides the shock-wave and moment criteria that characterize
//! which boundary data come from a surface.

pub mod boundary;
pub mod branches;
pub mod cli;
pub mod curve;
pub mod error;
pub mod forms;
pub mod io;
pub mod linalg;
pub mod moments;
pub mod oracle;
pub mod series;
pub mod shockwave;

pub use error::{Error, Result};
pub use num_complex::Complex64;
