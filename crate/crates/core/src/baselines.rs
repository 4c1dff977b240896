//! Reference models: PINAR(1) with binomial thinning and Poisson innovations,
//! and Poisson INARCH(1) with `X_t | X_{t-1} ~ Poisson(beta + alpha X_{t-1})`.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimation::{
    assemble, maximize, observed_information_se, FitResult, Method, MlOptions, ModelKind,
    TransitionCounts,
};
use crate::model::CountModel;
use crate::numeric::{autocorrelation, ln_binomial, ln_factorial, ln_sum_exp, mean};
use crate::process::{CountSeries, StationarySummary};

fn poisson_ln_pmf(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    k as f64 * lambda.ln() - lambda - ln_factorial(k)
}

fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let d: Poisson<f64> = Poisson::new(lambda).expect("positive rate");
    d.sample(rng) as u64
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Moment-based starting point `(mean, lag-1 autocorrelation)` with the
/// autocorrelation pulled into `[0.05, 0.95]`.
fn moment_start(series: &CountSeries) -> Result<(f64, f64)> {
    if series.len() < 3 {
        return Err(invalid("fitting needs at least 3 observations"));
    }
    let xs = series.as_f64();
    let m = mean(&xs);
    if m <= 0.0 {
        return Err(Error::DegenerateData("series mean is zero".into()));
    }
    let a = autocorrelation(&xs, 1);
    let a = if a.is_finite() { a.clamp(0.05, 0.95) } else { 0.5 };
    Ok((m, a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinarModel {
    mu: f64,
    alpha: f64,
}

impl PinarModel {
    pub fn new(mu: f64, alpha: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(invalid(format!("mu must be positive, got {mu}")));
        }
        check_alpha(alpha)?;
        Ok(Self { mu, alpha })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn innovation_mean(&self) -> f64 {
        (1.0 - self.alpha) * self.mu
    }
}

/// `sum_m Bin(i, alpha)(m) Poisson((1-alpha) mu)(j - m)`.
pub fn pinar_transition_pmf(model: &PinarModel, i: u64, j: u64) -> f64 {
    model.ln_transition_row(i, j)[j as usize].exp()
}

impl CountModel for PinarModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Pinar
    }

    fn params(&self) -> (f64, f64) {
        (self.mu, self.alpha)
    }

    fn ln_transition_row(&self, i: u64, jmax: u64) -> Vec<f64> {
        let lam = self.innovation_mean();
        let (la, l1a) = (self.alpha.ln(), (-self.alpha).ln_1p());
        let ln_bin: Vec<f64> = (0..=i)
            .map(|m| ln_binomial(i, m) + m as f64 * la + (i - m) as f64 * l1a)
            .collect();
        let ln_pois: Vec<f64> = (0..=jmax).map(|k| poisson_ln_pmf(lam, k)).collect();
        let mut terms = Vec::new();
        (0..=jmax)
            .map(|j| {
                terms.clear();
                for m in 0..=i.min(j) {
                    terms.push(ln_bin[m as usize] + ln_pois[(j - m) as usize]);
                }
                ln_sum_exp(&terms)
            })
            .collect()
    }

    fn conditional_mean(&self, x: u64) -> f64 {
        self.alpha * x as f64 + self.innovation_mean()
    }

    fn conditional_variance(&self, x: u64) -> f64 {
        self.alpha * (1.0 - self.alpha) * x as f64 + self.innovation_mean()
    }

    /// Poisson(mu) log-density of the first observation plus the transition terms.
    fn log_likelihood(&self, series: &CountSeries) -> f64 {
        if series.is_empty() {
            return 0.0;
        }
        let counts = TransitionCounts::new(series.values());
        poisson_ln_pmf(self.mu, counts.first)
            + counts.sum_rows(|i, jmax| self.ln_transition_row(i, jmax))
    }

    fn marginal_variance(&self) -> f64 {
        self.mu
    }

    fn acf1(&self) -> f64 {
        self.alpha
    }

    fn stationary_summary(&self) -> Option<StationarySummary> {
        let mu = self.mu;
        Some(StationarySummary {
            mean: mu,
            variance: mu,
            skewness: 1.0 / mu.sqrt(),
            excess_kurtosis: 1.0 / mu,
            dispersion_index: 1.0,
            p0: (-mu).exp(),
        })
    }
}

/// Stationary PINAR(1) path started from `Poisson(mu)`.
pub fn simulate_pinar<R: Rng + ?Sized>(model: &PinarModel, n: usize, rng: &mut R) -> Result<CountSeries> {
    if n == 0 {
        return Err(invalid("simulation length must be >= 1"));
    }
    let lam = model.innovation_mean();
    let mut x = sample_poisson(model.mu, rng);
    let mut values = Vec::with_capacity(n);
    values.push(x);
    for _ in 1..n {
        let survivors = Binomial::new(x, model.alpha).expect("valid binomial").sample(rng);
        x = survivors + sample_poisson(lam, rng);
        values.push(x);
    }
    CountSeries::new(values)
}

fn pinar_loglik(counts: &TransitionCounts) -> impl Fn(f64, f64) -> f64 + '_ {
    move |mu, alpha| match PinarModel::new(mu, alpha) {
        Ok(m) => {
            poisson_ln_pmf(mu, counts.first) + counts.sum_rows(|i, j| m.ln_transition_row(i, j))
        }
        Err(_) => f64::NAN,
    }
}

/// ML fit over `(ln mu, logit alpha)`.
pub fn pinar_fit_ml(series: &CountSeries, opts: &MlOptions) -> Result<(FitResult, PinarModel)> {
    let (m0, a0) = match opts.init {
        Some(p) => p,
        None => moment_start(series)?,
    };
    let counts = TransitionCounts::new(series.values());
    let to_natural = |w: &[f64]| (w[0].exp(), sigmoid(w[1]));
    let ((mu, alpha), ll) = maximize(pinar_loglik(&counts), to_natural, [m0.ln(), logit(a0)], opts)?;
    let model = PinarModel::new(mu, alpha)?;
    let se = observed_information_se(pinar_loglik(&counts), (mu, alpha));
    let mut warnings = Vec::new();
    if se.is_none() {
        warnings.push("observed information is not positive definite; standard errors omitted".into());
    }
    let fit = assemble(ModelKind::Pinar, Method::Ml, mu, alpha, se, Some(ll), series.len(), warnings);
    Ok((fit, model))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InarchModel {
    beta: f64,
    alpha: f64,
}

impl InarchModel {
    pub fn new(beta: f64, alpha: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid(format!("beta must be positive, got {beta}")));
        }
        check_alpha(alpha)?;
        Ok(Self { beta, alpha })
    }

    /// Parameterised by the marginal mean `mu = beta / (1 - alpha)`.
    pub fn from_mean(mu: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Self::new(mu * (1.0 - alpha), alpha)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mean(&self) -> f64 {
        self.beta / (1.0 - self.alpha)
    }
}

/// `sum_{t>=2} ln Poisson(beta + alpha x_{t-1})(x_t)`, conditional on `x_1`.
pub fn inarch_log_likelihood(model: &InarchModel, series: &CountSeries) -> f64 {
    series
        .values()
        .windows(2)
        .map(|w| poisson_ln_pmf(model.beta + model.alpha * w[0] as f64, w[1]))
        .sum()
}

impl CountModel for InarchModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Inarch
    }

    fn params(&self) -> (f64, f64) {
        (self.mean(), self.alpha)
    }

    fn ln_transition_row(&self, i: u64, jmax: u64) -> Vec<f64> {
        let lam = self.conditional_mean(i);
        (0..=jmax).map(|j| poisson_ln_pmf(lam, j)).collect()
    }

    fn conditional_mean(&self, x: u64) -> f64 {
        self.beta + self.alpha * x as f64
    }

    fn conditional_variance(&self, x: u64) -> f64 {
        self.conditional_mean(x)
    }

    fn log_likelihood(&self, series: &CountSeries) -> f64 {
        inarch_log_likelihood(self, series)
    }

    fn marginal_variance(&self) -> f64 {
        self.mean() / (1.0 - self.alpha * self.alpha)
    }

    fn acf1(&self) -> f64 {
        self.alpha
    }

    fn stationary_summary(&self) -> Option<StationarySummary> {
        None
    }
}

pub fn simulate_inarch<R: Rng + ?Sized>(model: &InarchModel, n: usize, rng: &mut R) -> Result<CountSeries> {
    if n == 0 {
        return Err(invalid("simulation length must be >= 1"));
    }
    let mut x = sample_poisson(model.mean(), rng);
    let mut values = Vec::with_capacity(n);
    values.push(x);
    for _ in 1..n {
        x = sample_poisson(model.conditional_mean(x), rng);
        values.push(x);
    }
    CountSeries::new(values)
}

/// ML fit over `(ln beta, logit alpha)`; reports `mu = beta / (1 - alpha)`,
/// with standard errors from the information in `(mu, alpha)`.
pub fn inarch_fit_ml(series: &CountSeries, opts: &MlOptions) -> Result<(FitResult, InarchModel)> {
    let (m0, a0) = match opts.init {
        Some(p) => p,
        None => moment_start(series)?,
    };
    let by_beta = |beta: f64, alpha: f64| match InarchModel::new(beta, alpha) {
        Ok(m) => inarch_log_likelihood(&m, series),
        Err(_) => f64::NAN,
    };
    let to_natural = |w: &[f64]| (w[0].exp(), sigmoid(w[1]));
    let start = [(m0 * (1.0 - a0)).ln(), logit(a0)];
    let ((beta, alpha), ll) = maximize(by_beta, to_natural, start, opts)?;
    let model = InarchModel::new(beta, alpha)?;
    let by_mean = |mu: f64, alpha: f64| match InarchModel::from_mean(mu, alpha) {
        Ok(m) => inarch_log_likelihood(&m, series),
        Err(_) => f64::NAN,
    };
    let se = observed_information_se(by_mean, (model.mean(), alpha));
    let mut warnings = Vec::new();
    if se.is_none() {
        warnings.push("observed information is not positive definite; standard errors omitted".into());
    }
    let fit = assemble(
        ModelKind::Inarch,
        Method::Ml,
        model.mean(),
        alpha,
        se,
        Some(ll),
        series.len(),
        warnings,
    );
    Ok((fit, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_thinning_row() {
        let m = PinarModel::new(3.0, 0.4).unwrap();
        for j in 0..10 {
            let direct = poisson_ln_pmf(1.8, j).exp();
            assert!((pinar_transition_pmf(&m, 0, j) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn pinar_rows_sum_and_mean() {
        let m = PinarModel::new(5.0, 0.5).unwrap();
        for i in [0u64, 3, 10, 25] {
            let row = m.transition_row(i, 80);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            let mean: f64 = row.iter().enumerate().map(|(j, p)| j as f64 * p).sum();
            assert!((mean - (0.5 * i as f64 + 2.5)).abs() < 1e-8);
        }
    }

    #[test]
    fn pinar_keeps_poisson_invariant() {
        let m = PinarModel::new(2.0, 0.3).unwrap();
        let k = 40u64;
        let pi: Vec<f64> = (0..=k).map(|j| poisson_ln_pmf(2.0, j).exp()).collect();
        let rows: Vec<Vec<f64>> = (0..=k).map(|i| m.transition_row(i, k)).collect();
        for j in 0..=k as usize {
            let v: f64 = (0..=k as usize).map(|i| pi[i] * rows[i][j]).sum();
            assert!((v - pi[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn inarch_reduces_to_iid() {
        let s = CountSeries::new(vec![1, 4, 0, 2, 3]).unwrap();
        let m = InarchModel::new(2.0, 1e-300).unwrap();
        let direct: f64 = [4u64, 0, 2, 3].iter().map(|&x| poisson_ln_pmf(2.0, x)).sum();
        assert!((inarch_log_likelihood(&m, &s) - direct).abs() < 1e-12);
    }

    #[test]
    fn inarch_term_by_term() {
        let m = InarchModel::new(2.0, 0.4).unwrap();
        let s = simulate_inarch(&m, 500, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let xs = s.values();
        let mut direct = 0.0;
        for w in xs.windows(2) {
            let lam = 2.0 + 0.4 * w[0] as f64;
            let mut lf = 0.0;
            for k in 1..=w[1] {
                lf += (k as f64).ln();
            }
            direct += w[1] as f64 * lam.ln() - lam - lf;
        }
        assert!((inarch_log_likelihood(&m, &s) - direct).abs() < 1e-12 * direct.abs());
    }

    #[test]
    fn pinar_fit_recovers() {
        let m = PinarModel::new(5.0, 0.5).unwrap();
        let s = simulate_pinar(&m, 5000, &mut ChaCha8Rng::seed_from_u64(17)).unwrap();
        let (fit, fitted) = pinar_fit_ml(&s, &MlOptions::default()).unwrap();
        assert!((fit.mu_hat - 5.0).abs() < 3.0 * fit.se_mu.unwrap());
        assert!((fit.alpha_hat - 0.5).abs() < 3.0 * fit.se_alpha.unwrap());
        assert!(fit.loglik.unwrap() >= m.log_likelihood(&s) - 1e-6);
        assert!((fitted.log_likelihood(&s) - fit.loglik.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn inarch_fit_recovers() {
        let m = InarchModel::new(2.0, 0.4).unwrap();
        let s = simulate_inarch(&m, 5000, &mut ChaCha8Rng::seed_from_u64(23)).unwrap();
        let (fit, fitted) = inarch_fit_ml(&s, &MlOptions::default()).unwrap();
        assert!((fitted.alpha() - 0.4).abs() < 3.0 * fit.se_alpha.unwrap());
        assert!((fit.mu_hat - 2.0 / 0.6).abs() < 3.0 * fit.se_mu.unwrap());
        assert!((fit.mu_hat - s.mean()).abs() < 0.05 * s.mean());
    }
}
