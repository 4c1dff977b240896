//! Browser bindings: simulate a path, forecast from a value, fit a series.
//!
//! Each export wraps a plain Rust function of the same name in [`native`],
//! which is what the tests exercise.

use wasm_bindgen::prelude::*;

pub mod native {
    use geoinar::estimation::{fit_cls, fit_ml, fit_yw, MlOptions};
    use geoinar::forecasting::{forecast_distribution, FORECAST_TAIL};
    use geoinar::process::{simulate, InitialState};
    use geoinar::{CountSeries, FitResult, GeoInarModel, Method, Result};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Stationary path of length `n`.
    pub fn simulate_path(mu: f64, alpha: f64, n: usize, seed: u64) -> Result<Vec<u32>> {
        let model = GeoInarModel::new(mu, alpha)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let series = simulate(&model, n, &mut rng, InitialState::Stationary)?;
        Ok(series
            .values()
            .iter()
            .map(|&x| u32::try_from(x).unwrap_or(u32::MAX))
            .collect())
    }

    /// `P(X_{t+h} = j | X_t = x_last)` for `j = 0, 1, ...`, truncated once the
    /// omitted tail is below `1e-12`.
    pub fn forecast_pmf(mu: f64, alpha: f64, x_last: u32, h: u32) -> Result<Vec<f64>> {
        let model = GeoInarModel::new(mu, alpha)?;
        Ok(forecast_distribution(&model, u64::from(x_last), h, FORECAST_TAIL)?.pmf)
    }

    pub fn fit_series(values: &[u32], method: &str) -> Result<FitResult> {
        let series = CountSeries::new(values.iter().map(|&x| u64::from(x)).collect())?;
        match method.parse::<Method>()? {
            Method::Cls => fit_cls(&series),
            Method::Yw => fit_yw(&series),
            Method::Ml => fit_ml(&series, &MlOptions::default()),
        }
    }
}

fn js(e: geoinar::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = simulatePath)]
pub fn simulate_path(mu: f64, alpha: f64, n: usize, seed: u32) -> Result<Vec<u32>, JsError> {
    native::simulate_path(mu, alpha, n, u64::from(seed)).map_err(js)
}

#[wasm_bindgen(js_name = forecastPmf)]
pub fn forecast_pmf(mu: f64, alpha: f64, x_last: u32, h: u32) -> Result<Vec<f64>, JsError> {
    native::forecast_pmf(mu, alpha, x_last, h).map_err(js)
}

/// Estimates and standard errors handed to JavaScript.
#[wasm_bindgen]
pub struct Fit {
    inner: geoinar::FitResult,
}

#[wasm_bindgen]
impl Fit {
    #[wasm_bindgen(getter)]
    pub fn mu(&self) -> f64 {
        self.inner.mu_hat
    }

    #[wasm_bindgen(getter)]
    pub fn alpha(&self) -> f64 {
        self.inner.alpha_hat
    }

    #[wasm_bindgen(getter, js_name = seMu)]
    pub fn se_mu(&self) -> Option<f64> {
        self.inner.se_mu
    }

    #[wasm_bindgen(getter, js_name = seAlpha)]
    pub fn se_alpha(&self) -> Option<f64> {
        self.inner.se_alpha
    }

    #[wasm_bindgen(getter)]
    pub fn aic(&self) -> Option<f64> {
        self.inner.aic
    }

    /// Warnings joined by newlines; empty when there are none.
    #[wasm_bindgen(getter)]
    pub fn warnings(&self) -> String {
        self.inner.warnings.join("\n")
    }
}

#[wasm_bindgen(js_name = fitSeries)]
pub fn fit_series(values: Vec<u32>, method: &str) -> Result<Fit, JsError> {
    native::fit_series(&values, method)
        .map(|inner| Fit { inner })
        .map_err(js)
}
