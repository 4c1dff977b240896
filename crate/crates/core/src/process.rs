//! The Geo-INAR(1) Markov kernel: simulation, exact one- and h-step
//! transition probabilities, conditional moments and generating functions.
//!
//! The h-step law from state `i` is the one-step law of the same process with
//! `alpha` replaced by `alpha^h`, so a single kernel routine serves every
//! horizon. Matrix powering is never used to produce transition values.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    geo_truncation_point, sample_geo, zmnb_ln_row_raw, GeoParams, DEFAULT_TAIL,
};
use crate::error::{domain, invalid, Error, Result};
use crate::numeric::ln_add_exp;
use crate::operator::{apply_operator, GeoInarModel};

/// An observed or simulated sequence of non-negative counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSeries {
    values: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl CountSeries {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("a count series needs at least one observation"));
        }
        Ok(Self { values, labels: None })
    }

    /// Attaches one time label per observation.
    pub fn with_labels(values: Vec<u64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(invalid(format!(
                "{} labels for {} observations",
                labels.len(),
                values.len()
            )));
        }
        let mut s = Self::new(values)?;
        s.labels = Some(labels);
        Ok(s)
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<u64>() as f64 / self.values.len() as f64
    }

    /// The first `n` observations.
    pub fn head(&self, n: usize) -> Result<Self> {
        let n = n.min(self.values.len());
        let labels = self.labels.as_ref().map(|l| l[..n].to_vec());
        let mut s = Self::new(self.values[..n].to_vec())?;
        s.labels = labels;
        Ok(s)
    }

    /// Consecutive `(previous, current)` pairs.
    pub fn transitions(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.values.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Starting value for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InitialState {
    /// `X_0 ~ Geo(mu)`.
    #[default]
    Stationary,
    Fixed(u64),
}

/// Simulates `n` observations `X_0, ..., X_{n-1}` of
/// `X_t = theta * X_{t-1} + eps_t`, `eps_t ~ Geo((1 - alpha) mu)`.
pub fn simulate<R: Rng + ?Sized>(
    model: &GeoInarModel,
    n: usize,
    rng: &mut R,
    init: InitialState,
) -> Result<CountSeries> {
    if n == 0 {
        return Err(invalid("simulation length must be >= 1"));
    }
    let mut values = Vec::with_capacity(n);
    let mut x = match init {
        InitialState::Stationary => sample_geo(model.mu(), rng),
        InitialState::Fixed(x0) => x0,
    };
    values.push(x);
    let mu_eps = model.mu_eps();
    for _ in 1..n {
        x = apply_operator(model, x, rng) + sample_geo(mu_eps, rng);
        values.push(x);
    }
    CountSeries::new(values)
}

/// One-step kernel of a Geo-INAR(1) process with dependence `a`, where
/// `a = 0` is the independent geometric limit.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepKernel {
    mu: f64,
    a: f64,
}

impl StepKernel {
    pub(crate) fn new(model: &GeoInarModel, h: u32) -> Self {
        Self {
            mu: model.mu(),
            a: model.alpha().powi(h as i32),
        }
    }

    fn mu_eps(&self) -> f64 {
        (1.0 - self.a) * self.mu
    }

    fn pi_star(&self) -> f64 {
        1.0 - self.a / (1.0 + self.mu_eps())
    }

    fn p(&self) -> f64 {
        let d = self.mu_eps() - self.a;
        d / (1.0 + d)
    }

    /// `ln p_{i,j}` for `j = 0..=jmax`:
    /// `p_eps(j) [pi*^i + sum_{m=1}^{j} (1 + 1/mu_eps)^m P(S_i = m)]`.
    pub(crate) fn ln_row(&self, i: u64, jmax: u64) -> Vec<f64> {
        let mu_eps = self.mu_eps();
        let ln_m = mu_eps.ln();
        let ln_1m = mu_eps.ln_1p();
        let ln_p_eps = |j: u64| j as f64 * ln_m - (j as f64 + 1.0) * ln_1m;
        if i == 0 || self.a == 0.0 {
            return (0..=jmax).map(ln_p_eps).collect();
        }
        let zmnb = zmnb_ln_row_raw(self.pi_star(), self.p(), i, jmax);
        let c = (1.0 / mu_eps).ln_1p();
        let mut bracket = f64::NEG_INFINITY;
        let mut out = Vec::with_capacity(jmax as usize + 1);
        for (j, &z) in zmnb.iter().enumerate() {
            bracket = ln_add_exp(bracket, j as f64 * c + z);
            out.push(ln_p_eps(j as u64) + bracket);
        }
        out
    }

    pub(crate) fn mean(&self, x: u64) -> f64 {
        self.a * x as f64 + self.mu_eps()
    }

    pub(crate) fn variance(&self, x: u64) -> f64 {
        let m = self.mu_eps();
        (1.0 + 2.0 * self.mu) * (1.0 - self.a) * self.a * x as f64 + m * (1.0 + m)
    }
}

/// `P(X_t = j | X_{t-1} = i)`.
pub fn transition_pmf(model: &GeoInarModel, i: u64, j: u64) -> f64 {
    transition_pmf_h(model, i, j, 1)
}

/// `P(X_{t+h} = j | X_t = i)`; `h = 0` is treated as `h = 1`.
pub fn transition_pmf_h(model: &GeoInarModel, i: u64, j: u64, h: u32) -> f64 {
    StepKernel::new(model, h.max(1)).ln_row(i, j)[j as usize].exp()
}

/// `P(X_{t+h} = j | X_t = i)` for `j = 0..=jmax`.
pub fn transition_row(model: &GeoInarModel, i: u64, h: u32, jmax: u64) -> Vec<f64> {
    StepKernel::new(model, h.max(1))
        .ln_row(i, jmax)
        .into_iter()
        .map(f64::exp)
        .collect()
}

/// Default truncation for matrix work: twice the smallest `K` at which the
/// stationary cumulative mass reaches `1 - 1e-10`.
pub fn default_max_state(model: &GeoInarModel) -> u64 {
    2 * geo_truncation_point(model.mu(), DEFAULT_TAIL)
}

/// Dense, truncated `h`-step transition matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionTable {
    pub h: u32,
    pub max_state: u64,
    /// `probs[i][j] = p^(h)_{ij}` for `i, j <= max_state`.
    pub probs: Vec<Vec<f64>>,
    /// Largest row deficit `1 - sum_j probs[i][j]`.
    pub tail_mass_bound: f64,
}

impl TransitionTable {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs[i][j]
    }

    pub fn order(&self) -> usize {
        self.probs.len()
    }
}

/// Builds the `h`-step table on states `0..=max_state`.
///
/// Fails when the stationary mass beyond `max_state` is at least `1e-10`.
pub fn transition_matrix(model: &GeoInarModel, h: u32, max_state: u64) -> Result<TransitionTable> {
    if h == 0 {
        return Err(invalid("horizon h must be >= 1"));
    }
    let needed = geo_truncation_point(model.mu(), DEFAULT_TAIL);
    if max_state < needed {
        return Err(Error::Truncation(format!(
            "max_state {max_state} leaves stationary tail >= 1e-10; need at least {needed}"
        )));
    }
    let kernel = StepKernel::new(model, h);
    let build = |i: u64| -> Vec<f64> {
        kernel.ln_row(i, max_state).into_iter().map(f64::exp).collect()
    };
    #[cfg(feature = "parallel")]
    let probs: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..=max_state).into_par_iter().map(build).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let probs: Vec<Vec<f64>> = (0..=max_state).map(build).collect();

    let tail_mass_bound = probs
        .iter()
        .map(|r| 1.0 - r.iter().sum::<f64>())
        .fold(0.0, f64::max);
    Ok(TransitionTable {
        h,
        max_state,
        probs,
        tail_mass_bound,
    })
}

/// `E(X_{t+h} | X_t = x) = alpha^h x + (1 - alpha^h) mu`.
pub fn conditional_mean(model: &GeoInarModel, x: u64, h: u32) -> f64 {
    StepKernel::new(model, h.max(1)).mean(x)
}

/// `Var(X_{t+h} | X_t = x) = (1 + 2 mu)(1 - alpha^h) alpha^h x + s (1 + s)`
/// with `s = (1 - alpha^h) mu`; this solves the one-step variance recursion.
pub fn conditional_variance(model: &GeoInarModel, x: u64, h: u32) -> f64 {
    StepKernel::new(model, h.max(1)).variance(x)
}

/// `E(s^{X_{t+h}} | X_t = x) = Psi_X(s) / Psi_X(r) * r^x`, where `r` is the
/// pgf of the `h`-fold counting series evaluated at `s`.
pub fn conditional_pgf(model: &GeoInarModel, x: u64, h: u32, s: f64) -> Result<f64> {
    let h = h.max(1);
    let mu = model.mu();
    let ah = model.alpha().powi(h as i32);
    let mh = (1.0 - ah) * mu;
    let geo_pgf = |u: f64| -> Result<f64> {
        let d = 1.0 + mu * (1.0 - u);
        if d <= 0.0 {
            return Err(domain(format!("pgf argument {u} outside the geometric radius")));
        }
        Ok(1.0 / d)
    };
    let denom = 1.0 + mh * (1.0 - s);
    if !(s.abs() < (1.0 + mh) / mh) || denom <= 0.0 {
        return Err(domain(format!("pgf argument {s} outside the innovation radius")));
    }
    let r = (1.0 + (mh - ah) * (1.0 - s)) / denom;
    Ok(geo_pgf(s)? / geo_pgf(r)? * r.powi(x as i32))
}

/// `corr(X_{t+h}, X_t) = alpha^h`.
pub fn acf(model: &GeoInarModel, h: u32) -> f64 {
    model.alpha().powi(h as i32)
}

/// Joint pgf of `(X_t, X_{t-1})`, symmetric in its arguments.
pub fn joint_pgf(model: &GeoInarModel, s1: f64, s2: f64) -> Result<f64> {
    let mu = model.mu();
    let c = model.mu_eps() - model.alpha();
    // grouped so that swapping the arguments is bit-exact
    let d = 1.0 + mu * ((1.0 - s1) + (1.0 - s2) + c * ((1.0 - s1) * (1.0 - s2)));
    if !(d > 0.0) {
        return Err(domain(format!("joint pgf undefined at ({s1}, {s2})")));
    }
    Ok(1.0 / d)
}

/// Stationary (geometric) marginal summaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarySummary {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub dispersion_index: f64,
    pub p0: f64,
}

pub fn stationary_summary(model: &GeoInarModel) -> StationarySummary {
    geometric_summary(model.marginal())
}

pub(crate) fn geometric_summary(g: GeoParams) -> StationarySummary {
    let mu = g.mu();
    let p = 1.0 / (1.0 + mu);
    StationarySummary {
        mean: mu,
        variance: mu * (1.0 + mu),
        skewness: (1.0 + 2.0 * mu) / (mu * (1.0 + mu)).sqrt(),
        excess_kurtosis: 6.0 + p * p / (1.0 - p),
        dispersion_index: 1.0 + mu,
        p0: p,
    }
}
