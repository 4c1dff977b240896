//! The zero-modified negative binomial operator and the Geo-INAR(1) model
//! parameters it is built from.
//!
//! For `theta = (mu, alpha)` the operator acts as `theta * X = G_1 + ... + G_X`
//! with `G_i ~ ZMG(1 - alpha/mu_eps, mu_eps)` and `mu_eps = (1 - alpha) mu`.
//! Geometric marginals and geometric innovations then hold simultaneously.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{sample_zmg, GeoParams, ZmgParams};
use crate::error::{invalid, Result};

/// Geo-INAR(1) parameters `(mu, alpha)` with `0 < alpha < mu / (1 + mu)`.
///
/// Only `mu` and `alpha` are stored; every derived quantity is recomputed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoInarModel {
    mu: f64,
    alpha: f64,
}

impl GeoInarModel {
    pub fn new(mu: f64, alpha: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(invalid(format!("mu must be finite and > 0, got {mu}")));
        }
        let upper = mu / (1.0 + mu);
        if !(alpha.is_finite() && alpha > 0.0 && alpha < upper) {
            return Err(invalid(format!(
                "alpha must lie in (0, mu/(1+mu)) = (0, {upper:.6}), got {alpha}"
            )));
        }
        Ok(Self { mu, alpha })
    }

    /// Upper end of the admissible `alpha` range for a given `mu`.
    pub fn alpha_upper(mu: f64) -> f64 {
        mu / (1.0 + mu)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Innovation mean `(1 - alpha) mu`.
    pub fn mu_eps(&self) -> f64 {
        (1.0 - self.alpha) * self.mu
    }

    /// Marginal variance `mu (1 + mu)`.
    pub fn sigma2(&self) -> f64 {
        self.mu * (1.0 + self.mu)
    }

    /// Innovation variance `mu_eps (1 + mu_eps)`.
    pub fn sigma_eps2(&self) -> f64 {
        let m = self.mu_eps();
        m * (1.0 + m)
    }

    /// Zero-modification weight of the counting series, `1 - alpha / mu_eps`.
    pub fn pi(&self) -> f64 {
        1.0 - self.alpha / self.mu_eps()
    }

    /// `P(G = 0) = 1 - alpha / (1 + mu_eps)`.
    pub fn pi_star(&self) -> f64 {
        1.0 - self.alpha / (1.0 + self.mu_eps())
    }

    /// `(mu_eps - alpha) / (1 + mu_eps - alpha)`.
    pub fn p(&self) -> f64 {
        let d = self.mu_eps() - self.alpha;
        d / (1.0 + d)
    }

    /// Variance of one counting variable, `(1 + 2 mu)(1 - alpha) alpha`.
    pub fn var_g(&self) -> f64 {
        (1.0 + 2.0 * self.mu) * (1.0 - self.alpha) * self.alpha
    }

    pub fn counting_series(&self) -> ZmgParams {
        ZmgParams::new(self.pi(), self.mu_eps()).expect("valid model yields valid ZMG")
    }

    pub fn innovation(&self) -> GeoParams {
        GeoParams::new(self.mu_eps()).expect("valid model yields valid innovation")
    }

    pub fn marginal(&self) -> GeoParams {
        GeoParams::new(self.mu).expect("valid model yields valid marginal")
    }
}

/// Draws `theta * x`: a sum of `x` fresh counting variables. Zero maps to zero.
pub fn apply_operator<R: Rng + ?Sized>(model: &GeoInarModel, x: u64, rng: &mut R) -> u64 {
    if x == 0 {
        return 0;
    }
    let g = model.counting_series();
    (0..x).map(|_| sample_zmg(g, rng)).sum()
}

/// Law of `theta * X` for `X ~ Geo(mu)`: `ZMG(1 - alpha, mu)`.
pub fn operator_marginal(model: &GeoInarModel) -> ZmgParams {
    ZmgParams::new(1.0 - model.alpha, model.mu).expect("1 - alpha lies in (0, 1)")
}

/// Law of `theta_h * ... * theta_1 * X` for `X ~ Geo(mu)`, where
/// `theta_i = (mu, alpha_i)`: `ZMG(1 - prod alpha_i, mu)`.
///
/// Each `alpha_i` only has to lie in `(0, 1)`.
pub fn compose_operators(mu: f64, alphas: &[f64]) -> Result<ZmgParams> {
    if alphas.is_empty() {
        return Err(invalid("compose_operators needs at least one alpha"));
    }
    GeoParams::new(mu)?;
    let mut prod = 1.0;
    for &a in alphas {
        if !(a > 0.0 && a < 1.0) {
            return Err(invalid(format!("each alpha must lie in (0, 1), got {a}")));
        }
        prod *= a;
    }
    ZmgParams::new(1.0 - prod, mu)
}

/// Counting series of the `h`-fold operator `theta^(h)`:
/// `ZMG(1 - alpha^h / ((1 - alpha^h) mu), (1 - alpha^h) mu)`.
pub fn iterated_counting_series(model: &GeoInarModel, h: u32) -> Result<ZmgParams> {
    if h == 0 {
        return Err(invalid("iteration count h must be >= 1"));
    }
    let ah = model.alpha.powi(h as i32);
    let m = (1.0 - ah) * model.mu;
    ZmgParams::new(1.0 - ah / m, m)
}
