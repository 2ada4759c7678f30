//! Derivative-free minimization: Nelder-Mead with adaptive coefficients and
//! a deterministic parallel multistart driver.

use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
    /// ... and the simplex diameter below this.
    pub x_tol: f64,
    pub initial_step: f64,
    /// Number of times to rebuild the simplex around the incumbent.
    pub rebuilds: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { max_evals: 20_000, f_tol: 1e-12, x_tol: 1e-9, initial_step: 0.5, rebuilds: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

fn simplex_around(x0: &[f64], step: f64) -> Vec<Vec<f64>> {
    let mut s = vec![x0.to_vec()];
    for i in 0..x0.len() {
        let mut v = x0.to_vec();
        v[i] += step;
        s.push(v);
    }
    s
}

fn run_once(f: &impl Fn(&[f64]) -> f64, x0: &[f64], opts: &NelderMeadOptions, budget: usize) -> Minimum {
    let n = x0.len();
    if n == 0 {
        return Minimum { x: vec![], value: f(x0), evals: 1, converged: true };
    }
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut pts = simplex_around(x0, opts.initial_step);
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p)).collect();
    let mut evals = n + 1;
    let mut converged = false;

    while evals < budget {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = idx.iter().map(|&i| pts[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();

        let spread = (vals[n] - vals[0]).abs();
        let diam = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= opts.f_tol && diam <= opts.x_tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n).map(|j| pts[..n].iter().map(|p| p[j]).sum::<f64>() / nf).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (pts[n][j] - centroid[j])).collect() };

        let xr = along(-alpha);
        let fr = eval(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(-beta);
            let fe = eval(&xe);
            evals += 1;
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let xc = along(-gamma);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(gamma);
                let fc = eval(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    let p: Vec<f64> = (0..n).map(|j| pts[0][j] + delta * (pts[i][j] - pts[0][j])).collect();
                    vals[i] = eval(&p);
                    pts[i] = p;
                }
                evals += n;
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    Minimum { x: pts[best].clone(), value: vals[best], evals, converged }
}

/// Minimizes `f` from `x0`, rebuilding the simplex around the incumbent
/// `opts.rebuilds` times to escape premature collapse.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let mut best = run_once(&f, x0, opts, opts.max_evals);
    let mut total = best.evals;
    for _ in 0..opts.rebuilds {
        let step = (opts.initial_step * 0.1).max(opts.x_tol * 10.0);
        let polish = NelderMeadOptions { initial_step: step, ..*opts };
        let next = run_once(&f, &best.x, &polish, opts.max_evals);
        total += next.evals;
        if next.value <= best.value {
            best = Minimum { evals: total, ..next };
        } else {
            best.evals = total;
        }
    }
    best
}

/// Runs Nelder-Mead from every start in parallel. Results keep start order;
/// the best is the lowest value with ties broken by start index, so the
/// outcome does not depend on thread scheduling.
pub fn multistart<F>(f: F, starts: &[Vec<f64>], opts: &NelderMeadOptions) -> (Minimum, Vec<Minimum>)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let runs: Vec<Minimum> = starts.par_iter().map(|x0| nelder_mead(&f, x0, opts)).collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .map(|(_, m)| m.clone())
        .expect("multistart needs at least one start");
    (best, runs)
}
