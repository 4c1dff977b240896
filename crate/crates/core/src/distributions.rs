//! Geometric, zero-modified geometric (ZMG) and zero-modified negative
//! binomial (ZMNB) count distributions.
//!
//! Every pmf is evaluated in log space; binomial coefficients go through
//! log-gamma so that arguments in the hundreds stay finite.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::numeric::{ln_binomial, ln_sum_exp};

/// Cumulative mass that a truncated support must reach.
pub const DEFAULT_TAIL: f64 = 1e-10;

/// Geometric law on `{0, 1, ...}` with mean `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoParams {
    mu: f64,
}

impl GeoParams {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(invalid(format!("geometric mean must be finite and > 0, got {mu}")));
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Ratio `mu / (1 + mu)` of successive pmf values.
    pub fn ratio(&self) -> f64 {
        self.mu / (1.0 + self.mu)
    }

    pub fn variance(&self) -> f64 {
        self.mu * (1.0 + self.mu)
    }
}

/// Zero-modified geometric law: weight `pi` on an extra atom at zero and
/// `1 - pi` on a geometric with mean `mu_eps`. Negative `pi` deflates zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZmgParams {
    pi: f64,
    mu_eps: f64,
}

impl ZmgParams {
    pub fn new(pi: f64, mu_eps: f64) -> Result<Self> {
        if !(mu_eps.is_finite() && mu_eps > 0.0) {
            return Err(invalid(format!("ZMG mean must be finite and > 0, got {mu_eps}")));
        }
        if !(pi.is_finite() && pi > -1.0 / mu_eps && pi <= 1.0) {
            return Err(invalid(format!(
                "ZMG weight pi must lie in (-1/mu_eps, 1] = ({}, 1], got {pi}",
                -1.0 / mu_eps
            )));
        }
        Ok(Self { pi, mu_eps })
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    pub fn mu_eps(&self) -> f64 {
        self.mu_eps
    }

    /// `P(G = 0)`.
    pub fn zero_mass(&self) -> f64 {
        self.pi + (1.0 - self.pi) / (1.0 + self.mu_eps)
    }

    pub fn mean(&self) -> f64 {
        self.mu_eps * (1.0 - self.pi)
    }

    pub fn variance(&self) -> f64 {
        self.mu_eps * (1.0 - self.pi) * (1.0 + self.mu_eps * (1.0 + self.pi))
    }
}

/// Law of the sum of `x` iid ZMG variates.
///
/// The closed-form pmf needs `0 <= pi < 1`, which is exactly the range
/// produced by Geo-INAR models with `alpha < mu / (1 + mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZmnbParams {
    zmg: ZmgParams,
    x: u64,
}

impl ZmnbParams {
    pub fn new(pi: f64, mu_eps: f64, x: u64) -> Result<Self> {
        let zmg = ZmgParams::new(pi, mu_eps)?;
        Self::from_zmg(zmg, x)
    }

    pub fn from_zmg(zmg: ZmgParams, x: u64) -> Result<Self> {
        if x == 0 {
            return Err(invalid("ZMNB needs x >= 1 summed variates"));
        }
        if !(zmg.pi >= 0.0 && zmg.pi < 1.0) {
            return Err(domain(format!(
                "ZMNB closed form requires 0 <= pi < 1 (alpha < mu/(1+mu)), got pi = {}",
                zmg.pi
            )));
        }
        Ok(Self { zmg, x })
    }

    pub fn zmg(&self) -> ZmgParams {
        self.zmg
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    /// `pi_star = P(G = 0)`.
    pub fn pi_star(&self) -> f64 {
        self.zmg.zero_mass()
    }

    /// `p = pi mu_eps / (1 + pi mu_eps)`.
    pub fn p(&self) -> f64 {
        let a = self.zmg.pi * self.zmg.mu_eps;
        a / (1.0 + a)
    }
}

/// Any of the three supported families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum DistSpec {
    Geo(GeoParams),
    Zmg(ZmgParams),
    Zmnb(ZmnbParams),
}

/// `ln P(X = x)` for `X ~ Geo(mu)`.
#[inline]
pub fn geo_ln_pmf(params: GeoParams, x: u64) -> f64 {
    let mu = params.mu;
    x as f64 * mu.ln() - (x as f64 + 1.0) * mu.ln_1p()
}

pub fn geo_pmf(params: GeoParams, x: u64) -> f64 {
    geo_ln_pmf(params, x).exp()
}

pub fn geo_cdf(params: GeoParams, x: u64) -> f64 {
    1.0 - params.ratio().powf(x as f64 + 1.0)
}

pub fn zmg_ln_pmf(params: ZmgParams, k: u64) -> f64 {
    if k == 0 {
        return params.zero_mass().ln();
    }
    if params.pi == 1.0 {
        return f64::NEG_INFINITY;
    }
    let m = params.mu_eps;
    (1.0 - params.pi).ln() + k as f64 * m.ln() - (k as f64 + 1.0) * m.ln_1p()
}

pub fn zmg_pmf(params: ZmgParams, k: u64) -> f64 {
    zmg_ln_pmf(params, k).exp()
}

/// `ln P(S = k)` for `k = 0..=kmax`, where `S` is a sum of `x` iid ZMG
/// variates, in `O(kmax^2)`.
///
/// `P(S = k) = sum_{i=1}^{k} A_i B_i^k` with
/// `A_i = C(x+i-1, i) pi*^x (1-pi*)^i` and `B_i^k = C(k-1, i-1) p^(k-i) (1-p)^i`.
pub fn zmnb_ln_pmf_row(params: ZmnbParams, kmax: u64) -> Vec<f64> {
    zmnb_ln_row_raw(params.pi_star(), params.p(), params.x, kmax)
}

/// Same as [`zmnb_ln_pmf_row`] but driven directly by `(pi_star, p, x)`.
///
/// `pi_star == 1` is the point mass at zero.
pub(crate) fn zmnb_ln_row_raw(pi_star: f64, p: f64, x: u64, kmax: u64) -> Vec<f64> {
    let len = kmax as usize + 1;
    let mut out = vec![f64::NEG_INFINITY; len];
    let x_ln_pi_star = x as f64 * pi_star.ln();
    out[0] = x_ln_pi_star;
    if kmax == 0 || pi_star >= 1.0 {
        return out;
    }
    let ln_q = (1.0 - pi_star).ln();
    let ln_p = p.ln();
    let ln_1mp = (-p).ln_1p();
    // ln A_i - x ln pi* + i ln(1-p), independent of k.
    let a: Vec<f64> = (0..len as u64)
        .map(|i| {
            if i == 0 {
                f64::NEG_INFINITY
            } else {
                ln_binomial(x + i - 1, i) + i as f64 * (ln_q + ln_1mp)
            }
        })
        .collect();
    let mut terms = Vec::with_capacity(len);
    for k in 1..len as u64 {
        terms.clear();
        for i in 1..=k {
            let pow = if i == k { 0.0 } else { (k - i) as f64 * ln_p };
            terms.push(a[i as usize] + ln_binomial(k - 1, i - 1) + pow);
        }
        out[k as usize] = x_ln_pi_star + ln_sum_exp(&terms);
    }
    out
}

pub fn zmnb_ln_pmf(params: ZmnbParams, k: u64) -> f64 {
    zmnb_ln_pmf_row(params, k)[k as usize]
}

pub fn zmnb_pmf(params: ZmnbParams, k: u64) -> f64 {
    zmnb_ln_pmf(params, k).exp()
}

/// Evaluates `E(s^X)`.
pub fn pgf_eval(dist: DistSpec, s: f64) -> Result<f64> {
    let check = |m: f64| -> Result<()> {
        let radius = (1.0 + m) / m;
        if !(s.abs() < radius) {
            return Err(domain(format!("pgf argument {s} outside radius {radius}")));
        }
        Ok(())
    };
    match dist {
        DistSpec::Geo(g) => {
            check(g.mu)?;
            Ok(1.0 / (1.0 + g.mu * (1.0 - s)))
        }
        DistSpec::Zmg(z) => {
            check(z.mu_eps)?;
            Ok(zmg_pgf_unchecked(z.pi, z.mu_eps, s))
        }
        DistSpec::Zmnb(n) => {
            check(n.zmg.mu_eps)?;
            Ok(zmg_pgf_unchecked(n.zmg.pi, n.zmg.mu_eps, s).powi(n.x as i32))
        }
    }
}

#[inline]
pub(crate) fn zmg_pgf_unchecked(pi: f64, mu_eps: f64, s: f64) -> f64 {
    (1.0 + pi * mu_eps * (1.0 - s)) / (1.0 + mu_eps * (1.0 - s))
}

/// Closed-form `(mean, variance)`.
pub fn moments(dist: DistSpec) -> (f64, f64) {
    match dist {
        DistSpec::Geo(g) => (g.mu, g.variance()),
        DistSpec::Zmg(z) => (z.mean(), z.variance()),
        DistSpec::Zmnb(n) => {
            let x = n.x as f64;
            (x * n.zmg.mean(), x * n.zmg.variance())
        }
    }
}

/// One geometric draw by inverting the CDF.
#[inline]
pub(crate) fn sample_geo<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> u64 {
    // u in (0, 1]
    let u = 1.0 - rng.random::<f64>();
    let ln_ratio = -(1.0 / mu).ln_1p();
    let k = (u.ln() / ln_ratio).floor();
    if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        k as u64
    }
}

/// One ZMG draw: a two-branch inverse CDF on the closed-form pmf, which
/// remains valid for zero-deflated (`pi < 0`) parameters.
#[inline]
pub(crate) fn sample_zmg<R: Rng + ?Sized>(params: ZmgParams, rng: &mut R) -> u64 {
    let p0 = params.zero_mass();
    let u = rng.random::<f64>();
    if u < p0 {
        0
    } else {
        // P(G = k | G >= 1) is geometric shifted by one.
        1 + sample_geo(params.mu_eps, rng)
    }
}

impl DistSpec {
    pub fn ln_pmf(&self, k: u64) -> f64 {
        match *self {
            DistSpec::Geo(g) => geo_ln_pmf(g, k),
            DistSpec::Zmg(z) => zmg_ln_pmf(z, k),
            DistSpec::Zmnb(n) => zmnb_ln_pmf(n, k),
        }
    }

    pub fn pmf(&self, k: u64) -> f64 {
        self.ln_pmf(k).exp()
    }

    /// pmf values on `0..=kmax`.
    pub fn pmf_row(&self, kmax: u64) -> Vec<f64> {
        match *self {
            DistSpec::Zmnb(n) => zmnb_ln_pmf_row(n, kmax).into_iter().map(f64::exp).collect(),
            _ => (0..=kmax).map(|k| self.pmf(k)).collect(),
        }
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            DistSpec::Geo(g) => sample_geo(g.mu, rng),
            DistSpec::Zmg(z) => sample_zmg(z, rng),
            DistSpec::Zmnb(n) => (0..n.x).map(|_| sample_zmg(n.zmg, rng)).sum(),
        }
    }

    /// Smallest `K` with `P(X <= K) >= 1 - tail`.
    pub fn truncation_point(&self, tail: f64) -> u64 {
        match *self {
            DistSpec::Geo(g) => geo_truncation_point(g.mu, tail),
            DistSpec::Zmg(z) => {
                // P(G > K) = (1 - pi) r^(K+1)
                let w = 1.0 - z.pi;
                if w * 1.0 <= tail {
                    return 0;
                }
                let r = z.mu_eps / (1.0 + z.mu_eps);
                let k = ((tail / w).ln() / r.ln()).ceil() - 1.0;
                k.max(0.0) as u64
            }
            DistSpec::Zmnb(_) => {
                let (mean, var) = moments(*self);
                let mut kmax = (mean + 10.0 * var.sqrt()).ceil().max(8.0) as u64;
                loop {
                    let row = self.pmf_row(kmax);
                    let mut acc = 0.0;
                    for (k, p) in row.iter().enumerate() {
                        acc += p;
                        if acc >= 1.0 - tail {
                            return k as u64;
                        }
                    }
                    kmax *= 2;
                }
            }
        }
    }
}

/// Smallest `K` with `Geo(mu)` cumulative mass at least `1 - tail`.
pub fn geo_truncation_point(mu: f64, tail: f64) -> u64 {
    let r = mu / (1.0 + mu);
    let k = (tail.ln() / r.ln()).ceil() - 1.0;
    let mut k = k.max(0.0) as u64;
    // guard against rounding in the logarithms
    while r.powf(k as f64 + 1.0) > tail {
        k += 1;
    }
    while k > 0 && r.powf(k as f64) <= tail {
        k -= 1;
    }
    k
}

/// `n` iid draws.
pub fn sample<R: Rng + ?Sized>(dist: DistSpec, rng: &mut R, n: usize) -> Vec<u64> {
    (0..n).map(|_| dist.sample_one(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zmg(pi: f64, m: f64) -> ZmgParams {
        ZmgParams::new(pi, m).unwrap()
    }

    /// Brute-force x-fold convolution of the ZMG pmf.
    fn convolve_zmg(z: ZmgParams, x: u64, kmax: usize) -> Vec<f64> {
        let base: Vec<f64> = (0..=kmax as u64).map(|k| zmg_pmf(z, k)).collect();
        let mut acc = vec![0.0; kmax + 1];
        acc[0] = 1.0;
        for _ in 0..x {
            let mut next = vec![0.0; kmax + 1];
            for (a, &pa) in acc.iter().enumerate() {
                for (b, &pb) in base.iter().enumerate().take(kmax + 1 - a) {
                    next[a + b] += pa * pb;
                }
            }
            acc = next;
        }
        acc
    }

    #[test]
    fn geo_examples() {
        let g = GeoParams::new(1.0).unwrap();
        assert!((geo_pmf(g, 0) - 0.5).abs() < 1e-15);
        let g = GeoParams::new(1.4239).unwrap();
        assert!((geo_pmf(g, 0) - 0.4126).abs() < 5e-5);
        let g = GeoParams::new(5.0).unwrap();
        assert!((geo_pmf(g, 3) - 125.0 / 1296.0).abs() < 1e-15);
    }

    #[test]
    fn geo_pmf_agrees_with_sampling() {
        let g = GeoParams::new(5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let hits = sample(DistSpec::Geo(g), &mut rng, n)
            .into_iter()
            .filter(|&k| k == 3)
            .count();
        let p = 125.0 / 1296.0;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - p).abs() < 4.0 * se);
    }

    #[test]
    fn zmg_examples() {
        assert!((zmg_pmf(zmg(0.0, 2.0), 1) - 2.0 / 9.0).abs() < 1e-15);
        assert!((zmg_pmf(zmg(0.8, 2.5), 0) - 0.857143).abs() < 1e-6);
        assert!((zmg_pmf(zmg(0.8, 2.5), 1) - 0.040816).abs() < 1e-6);
    }

    #[test]
    fn zmg_rejects_bad_weight() {
        assert!(ZmgParams::new(-0.5, 2.5).is_err());
        assert!(ZmgParams::new(1.2, 2.5).is_err());
        assert!(ZmgParams::new(0.5, 0.0).is_err());
        assert!(ZmgParams::new(-0.3, 2.5).is_ok());
    }

    #[test]
    fn zmnb_examples() {
        let p1 = ZmnbParams::new(0.8, 2.5, 1).unwrap();
        assert!((zmnb_pmf(p1, 2) - zmg_pmf(zmg(0.8, 2.5), 2)).abs() < 1e-15);
        assert!((zmnb_pmf(p1, 2) - 0.2 * 6.25 / 42.875).abs() < 1e-15);
        let p2 = ZmnbParams::new(0.8, 2.5, 2).unwrap();
        assert!((zmnb_pmf(p2, 0) - 0.734694).abs() < 1e-6);
        let oracle = convolve_zmg(zmg(0.8, 2.5), 2, 1);
        assert!((zmnb_pmf(p2, 1) - oracle[1]).abs() < 1e-15);
        assert!((zmnb_pmf(p2, 1) - 0.069971).abs() < 1e-6);
    }

    #[test]
    fn zmnb_rejects_deflated_weight() {
        assert!(matches!(
            ZmnbParams::new(-0.1, 2.5, 2),
            Err(crate::Error::Domain(_))
        ));
        assert!(ZmnbParams::new(0.5, 2.5, 0).is_err());
    }

    #[test]
    fn zmnb_equals_convolution_grid() {
        for &(pi, m) in &[(0.8, 2.5), (0.0, 1.0), (0.3, 0.7), (0.95, 4.0)] {
            for x in 1..=10 {
                let row = ZmnbParams::new(pi, m, x).map(|p| DistSpec::Zmnb(p).pmf_row(50)).unwrap();
                let oracle = convolve_zmg(zmg(pi, m), x, 50);
                for k in 0..=50 {
                    assert!(
                        (row[k] - oracle[k]).abs() < 1e-12,
                        "pi={pi} m={m} x={x} k={k}: {} vs {}",
                        row[k],
                        oracle[k]
                    );
                }
            }
        }
    }

    #[test]
    fn pgf_examples() {
        let g = DistSpec::Geo(GeoParams::new(5.0).unwrap());
        assert!((pgf_eval(g, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((pgf_eval(g, 0.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let z = DistSpec::Zmg(zmg(0.8, 2.5));
        let v = pgf_eval(z, 0.5).unwrap();
        assert!((v - 2.0 / 2.25).abs() < 1e-12);
        let k = z.truncation_point(1e-14);
        let series: f64 = (0..=k).map(|j| 0.5f64.powi(j as i32) * z.pmf(j)).sum();
        assert!((v - series).abs() < 1e-12);
        assert!(pgf_eval(g, 1.3).is_err());
    }

    #[test]
    fn pgf_matches_power_series_and_mean() {
        let dists = [
            DistSpec::Geo(GeoParams::new(3.0).unwrap()),
            DistSpec::Zmg(zmg(0.4, 2.0)),
            DistSpec::Zmg(zmg(-0.2, 2.0)),
            DistSpec::Zmnb(ZmnbParams::new(0.6, 1.5, 4).unwrap()),
        ];
        for d in dists {
            let k = d.truncation_point(1e-15);
            let row = d.pmf_row(k);
            for s in [0.0f64, 0.25, 0.5, 0.9] {
                let series: f64 = row.iter().enumerate().map(|(j, p)| s.powi(j as i32) * p).sum();
                assert!((pgf_eval(d, s).unwrap() - series).abs() < 1e-10, "{d:?} s={s}");
            }
            let h = 1e-6;
            let deriv = (pgf_eval(d, 1.0 + h).unwrap() - pgf_eval(d, 1.0 - h).unwrap()) / (2.0 * h);
            assert!((deriv - moments(d).0).abs() < 1e-4);
        }
    }

    #[test]
    fn pmfs_are_normalised() {
        let dists = [
            DistSpec::Geo(GeoParams::new(0.2).unwrap()),
            DistSpec::Geo(GeoParams::new(12.0).unwrap()),
            DistSpec::Zmg(zmg(0.9, 8.0)),
            DistSpec::Zmg(zmg(-0.1, 5.0)),
            DistSpec::Zmnb(ZmnbParams::new(0.7, 3.0, 6).unwrap()),
        ];
        for d in dists {
            let k = d.truncation_point(DEFAULT_TAIL);
            let row = d.pmf_row(k);
            assert!(row.iter().all(|&p| p >= 0.0));
            assert!(row.iter().sum::<f64>() >= 1.0 - 1e-10, "{d:?}");
        }
    }

    #[test]
    fn moments_examples() {
        let (m, v) = moments(DistSpec::Geo(GeoParams::new(1.4239).unwrap()));
        assert!((m - 1.4239).abs() < 1e-12 && (v - 3.4514).abs() < 1e-4);
        let (m, v) = moments(DistSpec::Zmg(zmg(0.8, 2.5)));
        assert!((m - 0.5).abs() < 1e-12 && (v - 2.75).abs() < 1e-12);
        let (m, v) = moments(DistSpec::Zmnb(ZmnbParams::new(0.8, 2.5, 3).unwrap()));
        assert!((m - 1.5).abs() < 1e-12 && (v - 8.25).abs() < 1e-12);
    }

    #[test]
    fn sampling_moments_and_determinism() {
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs = sample(DistSpec::Geo(GeoParams::new(5.0).unwrap()), &mut rng, n);
        let m = xs.iter().sum::<u64>() as f64 / n as f64;
        assert!((m - 5.0).abs() < 0.02);

        let ys: Vec<f64> = sample(DistSpec::Zmg(zmg(0.8, 2.5)), &mut rng, n)
            .into_iter()
            .map(|v| v as f64)
            .collect();
        assert!((crate::numeric::sample_variance(&ys) - 2.75).abs() < 0.03);

        let a = sample(DistSpec::Zmg(zmg(0.8, 2.5)), &mut ChaCha8Rng::seed_from_u64(9), 1000);
        let b = sample(DistSpec::Zmg(zmg(0.8, 2.5)), &mut ChaCha8Rng::seed_from_u64(9), 1000);
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_pmf_chi_square() {
        // 20 cells (last one pooled), chi-square critical value at 1% with 19 df.
        let cases = [
            DistSpec::Zmg(zmg(0.5, 3.0)),
            DistSpec::Zmg(zmg(-0.2, 2.0)),
            DistSpec::Zmnb(ZmnbParams::new(0.8, 2.5, 3).unwrap()),
        ];
        let n = 1_000_000usize;
        for (idx, d) in cases.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + idx as u64);
            let mut counts = [0usize; 20];
            for v in sample(*d, &mut rng, n) {
                counts[(v as usize).min(19)] += 1;
            }
            let row = d.pmf_row(18);
            let mut probs: Vec<f64> = row.clone();
            probs.push(1.0 - row.iter().sum::<f64>());
            let mut chi2 = 0.0;
            for k in 0..20 {
                let e = probs[k] * n as f64;
                let freq = counts[k] as f64 / n as f64;
                assert!((freq - probs[k]).abs() < 4.0 / (n as f64).sqrt());
                if e > 0.0 {
                    chi2 += (counts[k] as f64 - e).powi(2) / e;
                }
            }
            assert!(chi2 < 36.19, "{d:?}: chi2 = {chi2}");
        }
    }

    #[test]
    fn truncation_point_is_minimal() {
        let g = GeoParams::new(5.0).unwrap();
        let k = geo_truncation_point(5.0, 1e-10);
        assert!(geo_cdf(g, k) >= 1.0 - 1e-10);
        assert!(geo_cdf(g, k - 1) < 1.0 - 1e-10);
    }
}
