//! Derivative-free minimizers used by the optimizer, estimator and
//! calibrator.

/// Golden-section search for a minimum of `f` on [a, b], stopping when the
/// bracket is narrower than `tol`.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternSearchOptions {
    pub initial_step: f64,
    pub min_step: f64,
    /// Smallest decrease that counts as an improvement.
    pub tolerance: f64,
    pub max_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Compass search inside a box. Coordinates with `free[i] == false` are
/// never moved. Each sweep tries ±step along every free axis and accepts
/// the first improvement; the step halves after a sweep without one.
pub fn pattern_search(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    lower: &[f64],
    upper: &[f64],
    free: &[bool],
    opts: &PatternSearchOptions,
) -> SearchOutcome {
    let mut x: Vec<f64> = start
        .iter()
        .zip(lower.iter().zip(upper))
        .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
        .collect();
    let mut fx = f(&x);
    let mut evals = 1;
    let mut step = opts.initial_step;
    let mut converged = false;
    while evals < opts.max_evaluations {
        let before = fx;
        for i in (0..x.len()).filter(|&i| free[i]) {
            for dir in [1.0, -1.0] {
                let candidate = (x[i] + dir * step).clamp(lower[i], upper[i]);
                if candidate == x[i] {
                    continue;
                }
                let old = x[i];
                x[i] = candidate;
                let ft = f(&x);
                evals += 1;
                if ft < fx - opts.tolerance * 1e-3 {
                    fx = ft;
                    break;
                }
                x[i] = old;
            }
        }
        if before - fx < opts.tolerance {
            if step < opts.min_step {
                converged = true;
                break;
            }
            step *= 0.5;
        }
    }
    SearchOutcome {
        x,
        value: fx,
        evaluations: evals,
        converged,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Initial simplex edge in normalized [0, 1] coordinates.
    pub initial_scale: f64,
    /// Stop when the simplex value spread falls below this.
    pub f_tolerance: f64,
    /// Stop when every vertex lies within this distance of the best one.
    pub x_tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_scale: 0.1,
            f_tolerance: 1e-12,
            x_tolerance: 1e-7,
            max_evaluations: 4000,
        }
    }
}

/// Nelder–Mead in box-normalized coordinates; trial points are projected
/// onto the box. Returns the best point visited.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &NelderMeadOptions,
) -> SearchOutcome {
    let n = start.len();
    let to_x = |u: &[f64]| -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(i, v)| lower[i] + v.clamp(0.0, 1.0) * (upper[i] - lower[i]))
            .collect()
    };
    let u0: Vec<f64> = start
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = upper[i] - lower[i];
            if w > 0.0 {
                ((v - lower[i]) / w).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    let mut evals = 0usize;
    let mut eval = |u: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(&to_x(u));
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(&u0, &mut evals);
    simplex.push((u0.clone(), f0));
    for i in 0..n {
        let mut u = u0.clone();
        u[i] = if u[i] + opts.initial_scale <= 1.0 {
            u[i] + opts.initial_scale
        } else {
            u[i] - opts.initial_scale
        };
        let fu = eval(&u, &mut evals);
        simplex.push((u, fu));
    }
    let mut converged = false;
    while evals < opts.max_evaluations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .map(|(u, _)| {
                u.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() <= opts.f_tolerance && size <= opts.x_tolerance * 1e3
            || size <= opts.x_tolerance
        {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(u, _)| u[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| (c + t * (c - w)).clamp(0.0, 1.0))
                .collect()
        };
        let xr = along(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let u: Vec<f64> = best
                        .iter()
                        .zip(&v.0)
                        .map(|(b, x)| b + 0.5 * (x - b))
                        .collect();
                    let fu = eval(&u, &mut evals);
                    *v = (u, fu);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (u, value) = simplex.swap_remove(0);
    SearchOutcome {
        x: to_x(&u),
        value,
        evaluations: evals,
        converged,
    }
}
