//! The conditional-law interface shared by Geo-INAR and the baseline models.

use crate::baselines::{inarch_fit_ml, pinar_fit_ml};
use crate::error::{invalid, Error, Result};
use crate::estimation::{fit_cls, fit_ml, fit_yw, log_likelihood, FitResult, Method, MlOptions, ModelKind};
use crate::operator::GeoInarModel;
use crate::process::{stationary_summary, CountSeries, StationarySummary, StepKernel};

/// A first-order Markov count model described by its one-step conditional law.
pub trait CountModel: Send + Sync {
    fn kind(&self) -> ModelKind;

    /// `(mu, alpha)`, with `mu` the marginal mean.
    fn params(&self) -> (f64, f64);

    /// `ln P(X_t = j | X_{t-1} = i)` for `j = 0..=jmax`.
    fn ln_transition_row(&self, i: u64, jmax: u64) -> Vec<f64>;

    fn transition_row(&self, i: u64, jmax: u64) -> Vec<f64> {
        self.ln_transition_row(i, jmax)
            .into_iter()
            .map(f64::exp)
            .collect()
    }

    fn conditional_mean(&self, x: u64) -> f64;

    fn conditional_variance(&self, x: u64) -> f64;

    fn log_likelihood(&self, series: &CountSeries) -> f64;

    fn n_params(&self) -> usize {
        2
    }

    fn marginal_variance(&self) -> f64;

    /// Lag-one autocorrelation.
    fn acf1(&self) -> f64;

    /// Full stationary summary, when the marginal law is known in closed form.
    fn stationary_summary(&self) -> Option<StationarySummary>;
}

impl CountModel for GeoInarModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Geoinar
    }

    fn params(&self) -> (f64, f64) {
        (self.mu(), self.alpha())
    }

    fn ln_transition_row(&self, i: u64, jmax: u64) -> Vec<f64> {
        StepKernel::new(self, 1).ln_row(i, jmax)
    }

    fn conditional_mean(&self, x: u64) -> f64 {
        StepKernel::new(self, 1).mean(x)
    }

    fn conditional_variance(&self, x: u64) -> f64 {
        StepKernel::new(self, 1).variance(x)
    }

    fn log_likelihood(&self, series: &CountSeries) -> f64 {
        log_likelihood(self, series)
    }

    fn marginal_variance(&self) -> f64 {
        self.sigma2()
    }

    fn acf1(&self) -> f64 {
        self.alpha()
    }

    fn stationary_summary(&self) -> Option<StationarySummary> {
        Some(stationary_summary(self))
    }
}

/// Fits `kind` by `method` and returns the result with the fitted model.
///
/// The baselines support maximum likelihood only.
pub fn fit_model(
    kind: ModelKind,
    method: Method,
    series: &CountSeries,
) -> Result<(FitResult, Box<dyn CountModel>)> {
    let opts = MlOptions::default();
    match (kind, method) {
        (ModelKind::Geoinar, _) => {
            let fit = match method {
                Method::Cls => fit_cls(series)?,
                Method::Yw => fit_yw(series)?,
                Method::Ml => fit_ml(series, &opts)?,
            };
            let model = fit.geoinar().map_err(|_| {
                Error::DegenerateData(format!(
                    "{method} estimates (mu = {:.6}, alpha = {:.6}) lie outside the parameter space",
                    fit.mu_hat, fit.alpha_hat
                ))
            })?;
            Ok((fit, Box::new(model)))
        }
        (ModelKind::Pinar, Method::Ml) => {
            let (fit, m) = pinar_fit_ml(series, &opts)?;
            Ok((fit, Box::new(m)))
        }
        (ModelKind::Inarch, Method::Ml) => {
            let (fit, m) = inarch_fit_ml(series, &opts)?;
            Ok((fit, Box::new(m)))
        }
        (k, m) => Err(invalid(format!("{k} supports ML fitting only, not {m}"))),
    }
}
