//! Moving-block bootstrap and Welch's t-test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{FarmError, Result};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// One moving-block resample of `series`, truncated to its length.
fn block_resample(series: &[f64], block: usize, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) {
    let n = series.len();
    let starts = n - block + 1;
    out.clear();
    while out.len() < n {
        let s = rng.random_range(0..starts);
        let take = block.min(n - out.len());
        out.extend_from_slice(&series[s..s + take]);
    }
}

fn percentile_interval(mut stats: Vec<f64>, level: f64) -> (f64, f64) {
    stats.sort_by(|a, b| a.total_cmp(b));
    let alpha = (1.0 - level) / 2.0;
    let at = |q: f64| {
        let pos = q * (stats.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        stats[lo] + (pos - lo as f64) * (stats[hi] - stats[lo])
    };
    (at(alpha), at(1.0 - alpha))
}

/// Percentile confidence interval of the mean by moving-block bootstrap.
pub fn block_bootstrap_ci(
    series: &[f64],
    block: usize,
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if block == 0 || series.len() < 2 * block {
        return Err(FarmError::Statistics(format!(
            "series of {} samples is shorter than two blocks of {block}",
            series.len()
        )));
    }
    if !(level > 0.0 && level < 1.0) || resamples == 0 {
        return Err(FarmError::Statistics(
            "invalid level or resample count".into(),
        ));
    }
    if series.iter().all(|v| *v == series[0]) {
        return Ok((series[0], series[0]));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = Vec::with_capacity(series.len());
    let stats = (0..resamples)
        .map(|_| {
            block_resample(series, block, &mut rng, &mut buf);
            mean(&buf)
        })
        .collect();
    Ok(percentile_interval(stats, level))
}

/// Percentile interval of mean(b)/mean(a) − 1, resampling both series
/// independently with moving blocks.
pub fn block_bootstrap_gain_ci(
    a: &[f64],
    b: &[f64],
    block: usize,
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if block == 0 || a.len() < 2 * block || b.len() < 2 * block {
        return Err(FarmError::Statistics(
            "series shorter than two blocks".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ba = Vec::with_capacity(a.len());
    let mut bb = Vec::with_capacity(b.len());
    let stats = (0..resamples)
        .map(|_| {
            block_resample(a, block, &mut rng, &mut ba);
            block_resample(b, block, &mut rng, &mut bb);
            mean(&bb) / mean(&ba) - 1.0
        })
        .collect();
    Ok(percentile_interval(stats, level))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t: f64,
    pub dof: f64,
    /// Two-sided p-value.
    pub p: f64,
}

/// Welch's unequal-variance t-test with Welch–Satterthwaite degrees of
/// freedom.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(FarmError::Statistics(
            "each sample needs at least two values".into(),
        ));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (variance(a) / na, variance(b) / nb);
    let diff = mean(a) - mean(b);
    if va + vb == 0.0 {
        if diff == 0.0 {
            return Ok(WelchResult {
                t: 0.0,
                dof: na + nb - 2.0,
                p: 1.0,
            });
        }
        return Err(FarmError::Statistics(
            "both samples have zero variance".into(),
        ));
    }
    let t = diff / (va + vb).sqrt();
    let dof = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, dof).map_err(|e| FarmError::Statistics(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
    Ok(WelchResult { t, dof, p })
}
