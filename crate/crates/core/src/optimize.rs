//! Derivative-free minimisation and finite-difference curvature.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Stop once the spread of simplex values falls below `ftol * (1 + |f_best|)`
    /// and the simplex diameter below `xtol`.
    pub ftol: f64,
    pub xtol: f64,
    pub max_iter: usize,
    /// Edge length of the starting simplex in each coordinate.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            ftol: 1e-12,
            xtol: 1e-8,
            max_iter: 2000,
            initial_step: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Nelder-Mead simplex search with the standard reflection, expansion,
/// contraction and shrink coefficients (1, 2, 1/2, 1/2).
///
/// Non-finite objective values are treated as `+inf`, so callers can return
/// `NaN` outside a feasible region.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: NelderMeadOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = eval(&x);
        simplex.push((x, v));
    }

    for iter in 0..opts.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if best.is_finite()
            && (worst - best).abs() <= opts.ftol * (1.0 + best.abs())
            && diameter <= opts.xtol
        {
            return Ok(Minimum {
                point: simplex[0].0.clone(),
                value: best,
                iterations: iter,
            });
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[dim].1 {
            let xc = along(-0.5);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < simplex[dim].1.min(fr) {
            simplex[dim] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for item in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = x_best
                .iter()
                .zip(&item.0)
                .map(|(b, p)| b + 0.5 * (p - b))
                .collect();
            let v = eval(&x);
            *item = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Err(Error::Optimization {
        iterations: opts.max_iter,
        best_point: simplex[0].0.clone(),
        best_value: simplex[0].1,
    })
}

/// Hessian of `f` at `x` by central differences with step `rel_step * |x_i|`
/// (or `rel_step` at zero), refined by one Richardson extrapolation.
pub fn numeric_hessian<F>(f: F, x: &[f64], rel_step: f64) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let steps: Vec<f64> = x
        .iter()
        .map(|&v| if v == 0.0 { rel_step } else { rel_step * v.abs() })
        .collect();
    let coarse = central_hessian(&f, x, &steps, 1.0);
    let fine = central_hessian(&f, x, &steps, 0.5);
    let n = x.len();
    let extrapolated = |i: usize, j: usize| (4.0 * fine[i][j] - coarse[i][j]) / 3.0;
    // symmetrise
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| 0.5 * (extrapolated(i, j) + extrapolated(j, i)))
                .collect()
        })
        .collect()
}

fn central_hessian<F>(f: &F, x: &[f64], steps: &[f64], scale: f64) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let n = x.len();
    let f0 = f(x);
    let shifted = |moves: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(k, d) in moves {
            y[k] += d;
        }
        f(&y)
    };
    let mut h = vec![vec![0.0; n]; n];
    for i in 0..n {
        let hi = steps[i] * scale;
        h[i][i] = (shifted(&[(i, hi)]) - 2.0 * f0 + shifted(&[(i, -hi)])) / (hi * hi);
        for j in 0..i {
            let hj = steps[j] * scale;
            let v = (shifted(&[(i, hi), (j, hj)]) - shifted(&[(i, hi), (j, -hj)])
                - shifted(&[(i, -hi), (j, hj)])
                + shifted(&[(i, -hi), (j, -hj)]))
                / (4.0 * hi * hj);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    h
}
