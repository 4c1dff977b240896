//! Monte Carlo study of the three estimators over a scenario grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimation::{cls_estimates, ml_estimates, yw_estimates, Method, MlOptions};
use crate::operator::GeoInarModel;
use crate::process::{simulate, InitialState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub mu: f64,
    pub alpha: f64,
    pub sample_sizes: Vec<usize>,
    pub n_replicates: usize,
    pub methods: Vec<Method>,
    pub base_seed: u64,
}

pub const TABLE_SAMPLE_SIZES: [usize; 5] = [100, 300, 500, 700, 1000];

impl ScenarioSpec {
    /// Scenarios `a`-`d`: `mu = 5` with `alpha` = 0.1, 0.3, 0.5, 0.7.
    pub fn preset(label: char) -> Result<Self> {
        let alpha = match label.to_ascii_lowercase() {
            'a' => 0.1,
            'b' => 0.3,
            'c' => 0.5,
            'd' => 0.7,
            other => return Err(invalid(format!("unknown scenario '{other}' (expected a-d)"))),
        };
        Ok(Self {
            mu: 5.0,
            alpha,
            sample_sizes: TABLE_SAMPLE_SIZES.to_vec(),
            n_replicates: 5000,
            methods: vec![Method::Cls, Method::Yw, Method::Ml],
            base_seed: 20_240_521,
        })
    }

    fn validate(&self) -> Result<GeoInarModel> {
        if self.n_replicates == 0 {
            return Err(invalid("n_replicates must be >= 1"));
        }
        if self.sample_sizes.iter().any(|&n| n < 3) {
            return Err(invalid("sample sizes must be >= 3"));
        }
        if self.methods.is_empty() {
            return Err(invalid("at least one method is required"));
        }
        GeoInarModel::new(self.mu, self.alpha)
    }
}

/// Summary of one `(method, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub n: usize,
    pub mean_mu: f64,
    pub rel_rmse_mu: f64,
    pub sd_mu: f64,
    pub mean_alpha: f64,
    pub rel_rmse_alpha: f64,
    pub sd_alpha: f64,
    /// Replicates that entered the summary.
    pub replicates: usize,
    /// Replicates dropped because some method failed to produce an estimate.
    pub failures: usize,
    /// Replicates dropped because some method's estimate left the open
    /// parameter space.
    pub excluded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateEstimate {
    pub method: Method,
    pub n: usize,
    pub replicate: usize,
    pub mu: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub spec: ScenarioSpec,
    pub rows: Vec<SummaryRow>,
    pub estimates: Vec<ReplicateEstimate>,
}

/// `sqrt(mean((est - truth)^2)) / truth`.
pub fn relative_rmse(estimates: &[f64], true_value: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(invalid("relative RMSE needs at least one estimate"));
    }
    if true_value == 0.0 {
        return Err(invalid("relative RMSE is undefined for a zero true value"));
    }
    let mse = estimates
        .iter()
        .map(|e| (e - true_value).powi(2))
        .sum::<f64>()
        / estimates.len() as f64;
    Ok(mse.sqrt() / true_value.abs())
}

/// SplitMix64 finaliser; spreads `(base_seed, n, r)` into a stream seed.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `r` at sample size `n`. All methods share the replicate's
/// path, and the value does not depend on scheduling.
pub fn replicate_seed(base_seed: u64, n: usize, r: usize) -> u64 {
    mix(mix(mix(base_seed) ^ n as u64) ^ r as u64)
}

type Outcome = Vec<(Method, Option<(f64, f64)>)>;

/// Relative distance from the boundary below which an ML estimate counts as
/// a boundary solution.
const BOUNDARY_TOL: f64 = 1e-4;

fn admissible(method: Method, mu: f64, alpha: f64) -> bool {
    if !(mu > 0.0) {
        return false;
    }
    let ratio = alpha / GeoInarModel::alpha_upper(mu);
    match method {
        Method::Ml => ratio > BOUNDARY_TOL && ratio < 1.0 - BOUNDARY_TOL,
        _ => ratio > 0.0 && ratio < 1.0,
    }
}

fn run_replicate(model: &GeoInarModel, methods: &[Method], n: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let series = match simulate(model, n, &mut rng, InitialState::Stationary) {
        Ok(s) => s,
        Err(_) => return methods.iter().map(|&m| (m, None)).collect(),
    };
    let xs = series.values();
    methods
        .iter()
        .map(|&m| {
            let est = match m {
                Method::Cls => cls_estimates(xs).ok(),
                Method::Yw => yw_estimates(xs).ok(),
                Method::Ml => ml_estimates(&series, &MlOptions::default())
                    .ok()
                    .map(|(f, _)| (f.mu(), f.alpha())),
            };
            (m, est.filter(|(a, b)| a.is_finite() && b.is_finite()))
        })
        .collect()
}

fn sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    crate::numeric::sample_variance(xs).sqrt()
}

/// Runs every `(n, replicate)` pair and summarises per `(method, n)`.
///
/// A replicate enters the summaries only if every method produced an estimate
/// inside the open parameter space (ML estimates on the boundary count as
/// outside), so all methods are summarised over the same paths.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioResult> {
    let model = spec.validate()?;
    let jobs: Vec<(usize, usize)> = spec
        .sample_sizes
        .iter()
        .flat_map(|&n| (0..spec.n_replicates).map(move |r| (n, r)))
        .collect();
    let work = |&(n, r): &(usize, usize)| {
        run_replicate(&model, &spec.methods, n, replicate_seed(spec.base_seed, n, r))
    };
    #[cfg(feature = "parallel")]
    let outcomes: Vec<Outcome> = {
        use rayon::prelude::*;
        jobs.par_iter().map(work).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<Outcome> = jobs.iter().map(work).collect();

    let mut estimates = Vec::new();
    let mut rows = Vec::new();
    for &n in &spec.sample_sizes {
        let mut kept: Vec<(usize, &Outcome)> = Vec::new();
        let (mut failures, mut excluded) = (0, 0);
        for (&(jn, r), out) in jobs.iter().zip(&outcomes) {
            if jn != n {
                continue;
            }
            if out.iter().any(|(_, e)| e.is_none()) {
                failures += 1;
            } else if out
                .iter()
                .any(|(m, e)| e.is_some_and(|(mu, a)| !admissible(*m, mu, a)))
            {
                excluded += 1;
            } else {
                kept.push((r, out));
            }
        }
        if kept.is_empty() {
            return Err(crate::Error::DegenerateData(format!(
                "no admissible replicate at n = {n}"
            )));
        }
        for &method in &spec.methods {
            let mut mus = Vec::with_capacity(kept.len());
            let mut alphas = Vec::with_capacity(kept.len());
            for &(r, out) in &kept {
                let (mu, alpha) = out
                    .iter()
                    .find(|(m, _)| *m == method)
                    .and_then(|(_, e)| *e)
                    .expect("kept replicates have every estimate");
                mus.push(mu);
                alphas.push(alpha);
                estimates.push(ReplicateEstimate {
                    method,
                    n,
                    replicate: r,
                    mu,
                    alpha,
                });
            }
            rows.push(SummaryRow {
                method,
                n,
                mean_mu: crate::numeric::mean(&mus),
                rel_rmse_mu: relative_rmse(&mus, spec.mu)?,
                sd_mu: sd(&mus),
                mean_alpha: crate::numeric::mean(&alphas),
                rel_rmse_alpha: relative_rmse(&alphas, spec.alpha)?,
                sd_alpha: sd(&alphas),
                replicates: mus.len(),
                failures,
                excluded,
            });
        }
    }
    Ok(ScenarioResult {
        spec: spec.clone(),
        rows,
        estimates,
    })
}
