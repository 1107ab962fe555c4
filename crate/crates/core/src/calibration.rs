//! Online ridge-regularized calibration of the wake parameters κ.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimation::upstream_set;
use crate::farm::{ControlState, MeasurementWindow};
use crate::flow::{FarmModel, ThrustMode};
use crate::search::{nelder_mead, NelderMeadOptions};
use crate::wake::WakeParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    /// Ridge weight λ on Σκ².
    pub lambda: f64,
    /// Lower bounds of [k_a, k_b, α, β].
    pub lower: [f64; 4],
    /// Upper bounds of [k_a, k_b, α, β].
    pub upper: [f64; 4],
    /// Nelder–Mead restarts after the first convergence.
    pub restarts: usize,
    pub max_evaluations: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            lower: [0.0, 0.001, 0.5, 0.01],
            upper: [1.0, 0.1, 5.0, 0.5],
            restarts: 2,
            max_evaluations: 1500,
        }
    }
}

impl CalibrationConfig {
    pub fn clamp(&self, kappa: [f64; 4]) -> [f64; 4] {
        let mut out = kappa;
        for i in 0..4 {
            out[i] = out[i].clamp(self.lower[i], self.upper[i]);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub before: WakeParams,
    pub after: WakeParams,
    /// Full ridge objective at the warm start and at the result.
    pub objective_before: f64,
    pub objective_after: f64,
    /// Power residual RMS over available turbines, W.
    pub rms_before: f64,
    pub rms_after: f64,
    /// True when no available turbine is waked, so κ is not observable.
    pub degenerate: bool,
    pub evaluations: usize,
}

/// One set of measurements with the operating point it was taken at.
#[derive(Debug, Clone)]
pub struct CalibrationData<'a> {
    pub model: &'a FarmModel,
    pub window: &'a MeasurementWindow,
    pub availability: &'a [bool],
}

impl CalibrationData<'_> {
    fn control(&self) -> ControlState {
        ControlState {
            yaw: self.window.mean_yaw.clone(),
            pitch_offset: vec![0.0; self.window.len()],
            availability: self.availability.to_vec(),
        }
    }

    /// Squared residuals in MW² and the number of turbines used.
    fn residuals(&self, params: WakeParams) -> Result<(f64, usize)> {
        let mut m = self.model.clone();
        m.params = params;
        let sol = m.solve(&self.control(), &ThrustMode::FromInflow)?;
        let mut sum = 0.0;
        let mut count = 0;
        for i in 0..self.window.len() {
            if self.availability[i] {
                sum += ((self.window.mean_power[i] - sol.power[i]) * 1e-6).powi(2);
                count += 1;
            }
        }
        Ok((sum, count))
    }
}

/// (1/N)Σ(ΔP in MW)² over available turbines of all data sets, plus λΣκ².
pub fn ridge_objective(data: &[CalibrationData], params: WakeParams, lambda: f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0;
    for d in data {
        let (s, c) = d.residuals(params)?;
        sum += s;
        count += c;
    }
    Ok(sum / count.max(1) as f64 + lambda * params.norm_sq())
}

/// Power residual RMS in W.
pub fn residual_rms(data: &[CalibrationData], params: WakeParams) -> Result<f64> {
    ridge_objective(data, params, 0.0).map(|v| v.sqrt() * 1e6)
}

/// Bounded Nelder–Mead on the ridge objective, warm-started at `prev`.
/// Never returns a point worse than the (clamped) warm start.
pub fn calibrate(
    data: &[CalibrationData],
    prev: WakeParams,
    cfg: &CalibrationConfig,
) -> Result<CalibrationRecord> {
    let mut waked = false;
    for d in data {
        let upstream = upstream_set(d.model, d.availability).unwrap_or_default();
        waked |= (0..d.window.len()).any(|i| d.availability[i] && !upstream.contains(&i));
    }
    let objective_before = ridge_objective(data, prev, cfg.lambda)?;
    let rms_before = residual_rms(data, prev)?;
    if !waked {
        return Ok(CalibrationRecord {
            before: prev,
            after: prev,
            objective_before,
            objective_after: objective_before,
            rms_before,
            rms_after: rms_before,
            degenerate: true,
            evaluations: 0,
        });
    }
    let f = |x: &[f64]| {
        ridge_objective(
            data,
            WakeParams::from_array([x[0], x[1], x[2], x[3]]),
            cfg.lambda,
        )
        .unwrap_or(f64::INFINITY)
    };
    let start = cfg.clamp(prev.to_array());
    let mut best_x = start.to_vec();
    let mut best_f = f(&best_x);
    let mut evaluations = 1;
    let opts = NelderMeadOptions {
        max_evaluations: cfg.max_evaluations,
        ..Default::default()
    };
    for round in 0..=cfg.restarts {
        let out = nelder_mead(f, &best_x, &cfg.lower, &cfg.upper, &opts);
        evaluations += out.evaluations;
        let gained = best_f - out.value;
        if out.value < best_f {
            best_f = out.value;
            best_x = out.x;
        }
        if round > 0 && gained < 1e-12 {
            break;
        }
    }
    let mut after = WakeParams::from_array([best_x[0], best_x[1], best_x[2], best_x[3]]);
    if !(best_f <= objective_before) {
        after = prev;
        best_f = objective_before;
    }
    Ok(CalibrationRecord {
        before: prev,
        after,
        objective_before,
        objective_after: best_f,
        rms_before,
        rms_after: residual_rms(data, after)?,
        degenerate: false,
        evaluations,
    })
}
