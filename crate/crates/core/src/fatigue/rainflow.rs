//! Rainflow cycle counting and damage-equivalent loads.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub range: f64,
    pub mean: f64,
    /// 0.5 for a half cycle, 1.0 for a full one.
    pub count: f64,
}

/// Turning points of a series, endpoints included. Plateaus collapse to one
/// point; a constant series yields a single point.
pub fn reversals(series: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &x in series {
        match out.len() {
            0 => out.push(x),
            1 => {
                if x != out[0] {
                    out.push(x);
                }
            }
            _ => {
                let n = out.len();
                let (a, b) = (out[n - 2], out[n - 1]);
                if x == b {
                    continue;
                }
                if (b - a) * (x - b) > 0.0 {
                    out[n - 1] = x;
                } else {
                    out.push(x);
                }
            }
        }
    }
    out
}

/// Rainflow count following ASTM E1049-85 §5.4.4, with residual ranges
/// counted as half cycles.
pub fn rainflow(series: &[f64]) -> Vec<Cycle> {
    let points = reversals(series);
    let mut cycles = Vec::new();
    let mut stack: Vec<f64> = Vec::with_capacity(points.len());
    // Index into `stack` of the current starting point.
    let mut start = 0usize;
    for p in points {
        stack.push(p);
        while stack.len() - start >= 3 {
            let n = stack.len();
            let x = (stack[n - 1] - stack[n - 2]).abs();
            let y = (stack[n - 2] - stack[n - 3]).abs();
            if x < y {
                break;
            }
            let (a, b) = (stack[n - 3], stack[n - 2]);
            if n - 3 == start {
                cycles.push(Cycle {
                    range: y,
                    mean: 0.5 * (a + b),
                    count: 0.5,
                });
                start += 1;
            } else {
                cycles.push(Cycle {
                    range: y,
                    mean: 0.5 * (a + b),
                    count: 1.0,
                });
                stack.drain(n - 3..n - 1);
            }
        }
    }
    for w in stack[start..].windows(2) {
        cycles.push(Cycle {
            range: (w[1] - w[0]).abs(),
            mean: 0.5 * (w[0] + w[1]),
            count: 0.5,
        });
    }
    cycles
}

/// DEL = (Σ nᵢ Rᵢ^m / N_eq)^(1/m) with N_eq = f_eq · duration.
pub fn damage_equivalent_load(cycles: &[Cycle], m: f64, duration: f64, f_eq: f64) -> f64 {
    if cycles.is_empty() {
        return 0.0;
    }
    let n_eq = f_eq * duration;
    let sum: f64 = cycles.iter().map(|c| c.count * c.range.powf(m)).sum();
    (sum / n_eq).powf(1.0 / m)
}
