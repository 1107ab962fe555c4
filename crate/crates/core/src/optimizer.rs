//! Yaw set-point optimization of combined power gain and fatigue gain.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FarmError, Result};
use crate::farm::{ControlState, YAW_LIMIT};
use crate::fatigue::{Channel, FatigueLut};
use crate::flow::{FarmModel, FarmSolution, ThrustMode};
use crate::search::{pattern_search, PatternSearchOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub power: f64,
    pub load: f64,
}

impl ObjectiveWeights {
    pub fn new(power: f64, load: f64) -> Result<Self> {
        let w = Self { power, load };
        w.validate()?;
        Ok(w)
    }

    pub fn power_only() -> Self {
        Self {
            power: 1.0,
            load: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.power < 0.0 || self.load < 0.0 || (self.power + self.load - 1.0).abs() > 1e-9 {
            return Err(FarmError::InvalidParameter(format!(
                "weights ({}, {}) must be non-negative and sum to 1",
                self.power, self.load
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Total starts including the zero start.
    pub starts: usize,
    pub initial_step: f64,
    pub min_step: f64,
    pub tolerance: f64,
    pub max_evaluations: usize,
    pub yaw_limit: f64,
    /// Load channel driving the fatigue term.
    pub channel: Channel,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 5,
            initial_step: 8.0,
            min_step: 0.1,
            tolerance: 1e-6,
            max_evaluations: 20_000,
            yaw_limit: YAW_LIMIT,
            channel: Channel::BladeRootOop,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub yaw: Vec<f64>,
    pub objective: f64,
    pub power_gain: f64,
    pub del_gain: f64,
    pub starts: usize,
    pub converged: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub power_gain: f64,
    pub del_gain: f64,
}

/// LUT coordinates for turbine `k` of a solved farm, at yaw `yaw`.
pub fn lut_point(solution: &FarmSolution, background_speed: f64, k: usize, yaw: f64) -> [f64; 7] {
    let w = solution.inflow_wake[k];
    [
        background_speed,
        solution.states[k].i_rotor,
        yaw,
        0.0,
        w.depth,
        w.width,
        w.center,
    ]
}

/// Per-turbine DEL of `channel` from the table, for the operating point in
/// `solution`. Unavailable turbines carry no load.
pub fn turbine_dels(
    solution: &FarmSolution,
    background_speed: f64,
    control: &ControlState,
    lut: &FatigueLut,
    channel: Channel,
) -> Vec<f64> {
    let c = channel as usize;
    (0..control.len())
        .map(|k| {
            if control.availability[k] {
                lut.interpolate(lut_point(solution, background_speed, k, control.yaw[k]))
                    .del[c]
            } else {
                0.0
            }
        })
        .collect()
}

/// The yaw problem for one model state and availability pattern: thrust is
/// frozen at the greedy operating point and the zero-yaw solution supplies
/// the power and DEL gain denominators.
#[derive(Debug, Clone)]
pub struct YawProblem<'a> {
    pub model: &'a FarmModel,
    pub availability: Vec<bool>,
    pub weights: ObjectiveWeights,
    pub lut: Option<&'a FatigueLut>,
    pub channel: Channel,
    thrust: ThrustMode,
    baseline: FarmSolution,
}

impl<'a> YawProblem<'a> {
    pub fn new(
        model: &'a FarmModel,
        availability: Vec<bool>,
        weights: ObjectiveWeights,
        lut: Option<&'a FatigueLut>,
        channel: Channel,
    ) -> Result<Self> {
        weights.validate()?;
        if availability.len() != model.len() {
            return Err(FarmError::InvalidParameter(
                "availability length differs from turbine count".into(),
            ));
        }
        if weights.load > 0.0 && lut.is_none() {
            return Err(FarmError::InvalidParameter(
                "a load weight needs a fatigue table".into(),
            ));
        }
        let thrust = ThrustMode::Frozen(model.greedy_thrust(&availability)?);
        let control = ControlState {
            yaw: vec![0.0; model.len()],
            pitch_offset: vec![0.0; model.len()],
            availability: availability.clone(),
        };
        let baseline = model.solve(&control, &thrust)?;
        for (k, p) in baseline.power.iter().enumerate() {
            if availability[k] && *p <= 0.0 {
                warn!("turbine {k} produces no power at zero yaw; excluded from the power gain");
            }
        }
        Ok(Self {
            model,
            availability,
            weights,
            lut,
            channel,
            thrust,
            baseline,
        })
    }

    pub fn control(&self, yaw: &[f64]) -> ControlState {
        ControlState {
            yaw: yaw.to_vec(),
            pitch_offset: vec![0.0; yaw.len()],
            availability: self.availability.clone(),
        }
    }

    pub fn solve(&self, yaw: &[f64]) -> Result<FarmSolution> {
        self.model.solve(&self.control(yaw), &self.thrust)
    }

    fn power_gain_of(&self, sol: &FarmSolution) -> f64 {
        sol.power
            .iter()
            .zip(&self.baseline.power)
            .zip(&self.availability)
            .filter(|((_, p0), b)| **b && **p0 > 0.0)
            .map(|((p, p0), _)| p / p0)
            .sum()
    }

    fn del_gain_of(&self, sol: &FarmSolution, yaw: &[f64], lut: &FatigueLut) -> f64 {
        let u_b = self.model.ambient().background_speed;
        let c = self.channel as usize;
        (0..yaw.len())
            .filter(|&k| self.availability[k])
            .map(|k| {
                let num = lut.interpolate(lut_point(sol, u_b, k, yaw[k])).del[c];
                let den = lut.interpolate(lut_point(&self.baseline, u_b, k, 0.0)).del[c];
                if den > 0.0 {
                    num / den
                } else {
                    warn!("turbine {k} has zero reference DEL; ratio set to 1");
                    1.0
                }
            })
            .sum()
    }

    pub fn power_gain(&self, yaw: &[f64]) -> Result<f64> {
        Ok(self.power_gain_of(&self.solve(yaw)?))
    }

    pub fn del_gain(&self, yaw: &[f64]) -> Result<f64> {
        let lut = self
            .lut
            .ok_or_else(|| FarmError::InvalidParameter("no fatigue table loaded".into()))?;
        let sol = self.solve(yaw)?;
        Ok(self.del_gain_of(&sol, yaw, lut))
    }

    pub fn evaluate(&self, yaw: &[f64]) -> Result<Evaluation> {
        let sol = self.solve(yaw)?;
        let power_gain = self.power_gain_of(&sol);
        let del_gain = match self.lut {
            Some(lut) if self.weights.load > 0.0 => self.del_gain_of(&sol, yaw, lut),
            _ => f64::NAN,
        };
        let mut objective = -self.weights.power * power_gain;
        if self.weights.load > 0.0 {
            objective += self.weights.load * del_gain;
        }
        Ok(Evaluation {
            objective,
            power_gain,
            del_gain,
        })
    }

    pub fn objective(&self, yaw: &[f64]) -> Result<f64> {
        Ok(self.evaluate(yaw)?.objective)
    }
}

/// Multi-start compass search over yaw angles in [−limit, limit]. Start 0
/// is γ = 0; the others are uniform draws from a generator seeded by
/// `seed`. Starts run in parallel; the best objective wins, ties going to
/// the lowest start index.
pub fn optimize_yaw(
    problem: &YawProblem,
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizationResult> {
    optimize_yaw_from(problem, cfg, seed, None)
}

/// As [`optimize_yaw`], with an optional warm start placed ahead of the
/// zero start. A later start displaces the incumbent only if it improves
/// the objective by more than `cfg.tolerance`, so near-equivalent optima
/// (mirror-image steering patterns, say) do not flip between calls. The
/// result never scores worse than γ = 0.
pub fn optimize_yaw_from(
    problem: &YawProblem,
    cfg: &OptimizerConfig,
    seed: u64,
    warm: Option<&[f64]>,
) -> Result<OptimizationResult> {
    let n = problem.model.len();
    let free: Vec<bool> = problem.availability.clone();
    let lower = vec![-cfg.yaw_limit; n];
    let upper = vec![cfg.yaw_limit; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(cfg.starts + 1);
    if let Some(w) = warm {
        if w.len() != n {
            return Err(FarmError::InvalidParameter(
                "warm start length differs from turbine count".into(),
            ));
        }
        starts.push(
            w.iter()
                .zip(&free)
                .map(|(y, f)| {
                    if *f {
                        y.clamp(-cfg.yaw_limit, cfg.yaw_limit)
                    } else {
                        0.0
                    }
                })
                .collect(),
        );
    }
    let zero_index = starts.len();
    for s in 0..cfg.starts.max(1) {
        starts.push(
            (0..n)
                .map(|k| {
                    let v = rng.random_range(-cfg.yaw_limit..=cfg.yaw_limit);
                    if s == 0 || !free[k] {
                        0.0
                    } else {
                        v
                    }
                })
                .collect(),
        );
    }
    let opts = PatternSearchOptions {
        initial_step: cfg.initial_step,
        min_step: cfg.min_step,
        tolerance: cfg.tolerance,
        max_evaluations: cfg.max_evaluations,
    };
    let f0 = problem.objective(&starts[zero_index])?;
    let mut outcomes: Vec<_> = starts
        .par_iter()
        .map(|x0| {
            pattern_search(
                |x| problem.objective(x).unwrap_or(f64::INFINITY),
                x0,
                &lower,
                &upper,
                &free,
                &opts,
            )
        })
        .collect();
    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate().skip(1) {
        if o.value < outcomes[best].value - cfg.tolerance {
            best = i;
        }
    }
    if outcomes[best].value > f0 {
        best = zero_index;
    }
    let best = outcomes.swap_remove(best);
    let eval = problem.evaluate(&best.x)?;
    Ok(OptimizationResult {
        yaw: best.x,
        objective: eval.objective,
        power_gain: eval.power_gain,
        del_gain: eval.del_gain,
        starts: starts.len(),
        converged: best.converged,
        evaluations,
    })
}
