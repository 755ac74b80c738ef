//! Tail-risk econometrics: return-series primitives, seeded Monte Carlo,
//! diagnostic and unit-root tests, AR(1)-GARCH(1,1) filtering, extreme-value
//! fits, VaR/ES estimators, VaR backtests and bivariate copulas.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backtest;
pub mod copula;
pub mod dist;
pub mod error;
pub mod evt;
pub mod garch;
pub mod htest;
pub mod linalg;
pub mod mc;
pub mod optim;
pub mod quad;
pub mod risk;
pub mod rng;
pub mod series;
pub mod stats;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use series::{Convention, ReturnSeries};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
