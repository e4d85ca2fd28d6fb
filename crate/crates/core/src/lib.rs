//! Reversionary Heston model: Riccati solver, characteristic functions,
//! rough Heston targets, COS pricing, calibration and Monte Carlo.

// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod charfn;
pub mod cmath;
pub mod error;
pub mod functional;
pub mod kernel;
pub mod mc;
pub mod params;
pub mod pricing;
pub mod riccati;
pub mod rough;

pub use cmath::C64;
pub use error::{Error, Result};
pub use functional::{make_finite_dim_functional, PiecewiseFunctional};
pub use kernel::{kernel_l1_distance, Kernel};
pub use params::{MeanReversion, Regime, ReversionaryParams, RoughParams};
