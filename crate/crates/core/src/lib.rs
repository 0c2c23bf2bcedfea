//! Multi-modes Monte Carlo interior-penalty discontinuous Galerkin (MCIP-DG)
//! solver for the time-harmonic Maxwell equations in weakly random media.
//!
//! The random medium enters through the index of refraction
//! `alpha = 1 + eps * eta`. Two sampling algorithms are provided:
//!
//! * [`driver::run_standard`] assembles and factorizes a sample-dependent
//!   system for every Monte Carlo draw;
//! * [`driver::run_multimodes`] expands the solution in powers of `eps`,
//!   assembles and factorizes the deterministic IP-DG operator once, and
//!   obtains every mode of every sample by forward/backward substitution.
//!
//! Module map:
//!
//! | module           | contents                                              |
//! |------------------|-------------------------------------------------------|
//! | [`mesh`]         | uniform hexahedral partitions of the unit cube        |
//! | [`dg`]           | broken P1 space, traces, jumps, quadrature, DG norms   |
//! | [`assembly`]     | IP-DG matrices, load vectors, mode sources             |
//! | [`linalg`]       | reusable sparse complex LU                             |
//! | [`random_field`] | Gaussian / uniform / Karhunen-Loeve cell fields        |
//! | [`driver`]       | both algorithms, error tables, diagnostics             |

pub mod assembly;
pub mod dg;
pub mod driver;
mod error;
pub mod linalg;
pub mod mesh;
pub mod par;
pub mod random_field;

pub use error::{Error, Result};
pub use num_complex::Complex64;
