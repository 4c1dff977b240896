//! Geometric INAR(1) count time series.
//!
//! A first-order integer autoregression `X_t = theta * X_{t-1} + eps_t` whose
//! marginal and innovation laws are both geometric. The operator `*` sums
//! zero-modified geometric counting variables, which makes the one-step and
//! h-step transition laws available in closed form.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod forecasting;
pub mod mcstudy;
pub mod model;
pub mod numeric;
pub mod operator;
pub mod optimize;
pub mod process;

pub use error::{Error, Result};
pub use estimation::{FitResult, Method, ModelKind};
pub use model::CountModel;
pub use operator::GeoInarModel;
pub use process::CountSeries;
