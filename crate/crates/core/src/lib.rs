//! Fractional nonlinear Yule model: special functions, fractional birth
//! processes, finite-time and limiting in-degree distributions, and
//! Monte Carlo simulation of the growing network.

pub mod error;
pub mod fnbp;
pub mod numerics;
pub mod pmf;
pub mod rates;
pub mod sim;
pub mod specfun;
pub mod validate;
pub mod yule_net;

pub use error::{Error, Result};
