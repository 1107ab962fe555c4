//! Quasi-static virtual plant: a truth-parameterized farm model with
//! correlated power noise, rate-limited yaw actuation and scheduled outages.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{FarmError, Result};
use crate::farm::{
    AmbientState, ControlState, FarmLayout, MeasurementWindow, TurbineSpec, YAW_LIMIT,
};
use crate::flow::{FarmModel, FarmSolution, ModelOptions, ThrustMode};
use crate::wake::WakeParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Standard deviation of the multiplicative factor.
    pub std: f64,
    /// s
    pub correlation_time: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            std: 0.03,
            correlation_time: 30.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffInterval {
    pub turbine: usize,
    /// s, inclusive
    pub start: f64,
    /// s, exclusive
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantConfig {
    pub truth_params: WakeParams,
    /// η₀ of the truth power model.
    pub truth_eta: f64,
    /// Exponent applied to the truth deficit amplitude.
    #[serde(default = "one")]
    pub deficit_exponent: f64,
    #[serde(default)]
    pub noise: NoiseConfig,
    /// s
    pub dt: f64,
    /// s
    pub spin_up: f64,
    #[serde(default)]
    pub outages: Vec<OffInterval>,
    /// deg
    pub yaw_deadband: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            truth_params: WakeParams::default(),
            truth_eta: 1.08,
            deficit_exponent: 1.0,
            noise: NoiseConfig::default(),
            dt: 0.5,
            spin_up: 900.0,
            outages: Vec::new(),
            yaw_deadband: 0.5,
        }
    }
}

impl PlantConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.dt > 0.0) || !(self.noise.std >= 0.0) || !(self.spin_up >= 0.0) {
            return Err(FarmError::Config(
                "plant needs dt > 0, noise std >= 0 and spin-up >= 0".into(),
            ));
        }
        if self.noise.std > 0.0 && !(self.noise.correlation_time > 0.0) {
            return Err(FarmError::Config(
                "noise correlation time must be positive".into(),
            ));
        }
        if let Some(o) = self
            .outages
            .iter()
            .find(|o| o.turbine >= n || o.end < o.start)
        {
            return Err(FarmError::Config(format!("invalid outage {o:?}")));
        }
        Ok(())
    }

    /// Scheduled availability at time `t`.
    pub fn available(&self, turbine: usize, t: f64) -> bool {
        !self
            .outages
            .iter()
            .any(|o| o.turbine == turbine && t >= o.start && t < o.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    /// s
    pub clock: f64,
    pub yaw: Vec<f64>,
    pub target: Vec<f64>,
    pub noise: Vec<f64>,
    pub availability: Vec<bool>,
}

/// One plant step as logged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantSample {
    /// End time of the step, s.
    pub time: f64,
    /// W
    pub power: Vec<f64>,
    pub yaw: Vec<f64>,
    pub available: Vec<bool>,
}

/// Move `actual` toward `target` by at most `max_step`, holding inside the
/// deadband.
pub fn yaw_step(actual: f64, target: f64, max_step: f64, deadband: f64) -> f64 {
    let diff = target - actual;
    if diff.abs() <= deadband {
        actual
    } else {
        actual + diff.signum() * diff.abs().min(max_step)
    }
}

#[derive(Debug, Clone)]
pub struct Plant {
    pub config: PlantConfig,
    truth: FarmModel,
    state: PlantState,
    rng: ChaCha8Rng,
    history: Vec<PlantSample>,
    cache: Option<(Vec<f64>, Vec<bool>, FarmSolution)>,
}

impl Plant {
    pub fn new(
        spec: &TurbineSpec,
        layout: &FarmLayout,
        ambient: AmbientState,
        config: PlantConfig,
        seed: u64,
    ) -> Result<Self> {
        let n = layout.len();
        config.validate(n)?;
        let mut truth_spec = spec.clone();
        truth_spec.power_scaling = config.truth_eta;
        let truth = FarmModel::new(
            truth_spec,
            layout.clone(),
            ambient,
            config.truth_params,
            ModelOptions {
                apply_eta: true,
                deficit_exponent: config.deficit_exponent,
            },
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                config.noise.std * z
            })
            .collect();
        let availability = (0..n).map(|i| config.available(i, 0.0)).collect();
        Ok(Self {
            truth,
            state: PlantState {
                clock: 0.0,
                yaw: vec![0.0; n],
                target: vec![0.0; n],
                noise,
                availability,
            },
            config,
            rng,
            history: Vec::new(),
            cache: None,
        })
    }

    pub fn state(&self) -> &PlantState {
        &self.state
    }

    pub fn history(&self) -> &[PlantSample] {
        &self.history
    }

    pub fn truth_model(&self) -> &FarmModel {
        &self.truth
    }

    /// Dispatch new targets, clipped to the optimizer bounds.
    pub fn set_targets(&mut self, yaw: &[f64]) {
        for (t, y) in self.state.target.iter_mut().zip(yaw) {
            *t = y.clamp(-YAW_LIMIT, YAW_LIMIT);
        }
    }

    /// Truth solution at the current yaw and availability.
    pub fn truth_solution(&mut self) -> Result<&FarmSolution> {
        let fresh = matches!(&self.cache, Some((y, a, _)) if *y == self.state.yaw && *a == self.state.availability);
        if !fresh {
            let control = ControlState {
                yaw: self.state.yaw.clone(),
                pitch_offset: vec![0.0; self.state.yaw.len()],
                availability: self.state.availability.clone(),
            };
            let sol = self.truth.solve(&control, &ThrustMode::FromInflow)?;
            self.cache = Some((self.state.yaw.clone(), self.state.availability.clone(), sol));
        }
        Ok(&self.cache.as_ref().expect("cache filled").2)
    }

    /// Advance one step of `config.dt`.
    pub fn step(&mut self) -> Result<&PlantSample> {
        let dt = self.config.dt;
        let max_step = self.truth.spec.yaw_rate_limit * dt;
        let t_end = self.state.clock + dt;
        for i in 0..self.state.yaw.len() {
            self.state.yaw[i] = yaw_step(
                self.state.yaw[i],
                self.state.target[i],
                max_step,
                self.config.yaw_deadband,
            );
            self.state.availability[i] = self.config.available(i, self.state.clock);
        }
        let noise = self.config.noise;
        if noise.std > 0.0 {
            let phi = (-dt / noise.correlation_time).exp();
            let innov = noise.std * (1.0 - phi * phi).sqrt();
            for x in self.state.noise.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                *x = phi * *x + innov * z;
            }
        }
        let truth: Vec<f64> = self.truth_solution()?.power.clone();
        let power = truth
            .iter()
            .zip(&self.state.noise)
            .zip(&self.state.availability)
            .map(|((p, e), b)| if *b { (p * (1.0 + e)).max(0.0) } else { 0.0 })
            .collect();
        self.state.clock = t_end;
        self.history.push(PlantSample {
            time: t_end,
            power,
            yaw: self.state.yaw.clone(),
            available: self.state.availability.clone(),
        });
        Ok(self.history.last().expect("just pushed"))
    }

    /// Step until the clock reaches `t`.
    pub fn run_until(&mut self, t: f64) -> Result<()> {
        while self.state.clock + 0.5 * self.config.dt < t {
            self.step()?;
        }
        Ok(())
    }

    pub fn averaged_window(&self, t_s: f64) -> Result<MeasurementWindow> {
        averaged_window(&self.history, t_s, self.config.dt)
    }
}

/// Trailing-window averages. Mean power is taken over the samples in which
/// the turbine reported; completeness is the fraction of such samples.
pub fn averaged_window(history: &[PlantSample], t_s: f64, dt: f64) -> Result<MeasurementWindow> {
    let steps = (t_s / dt).round() as usize;
    if steps == 0 || history.len() < steps {
        return Err(FarmError::InsufficientHistory {
            needed: t_s,
            available: history.len() as f64 * dt,
        });
    }
    let tail = &history[history.len() - steps..];
    let n = tail[0].power.len();
    let mut mean_power = vec![0.0; n];
    let mut mean_yaw = vec![0.0; n];
    let mut completeness = vec![0.0; n];
    for i in 0..n {
        let mut reported = 0usize;
        for s in tail {
            mean_yaw[i] += s.yaw[i];
            if s.available[i] {
                mean_power[i] += s.power[i];
                reported += 1;
            }
        }
        mean_yaw[i] /= steps as f64;
        if reported > 0 {
            mean_power[i] /= reported as f64;
        }
        completeness[i] = reported as f64 / steps as f64;
    }
    Ok(MeasurementWindow {
        t_s,
        mean_power,
        mean_yaw,
        completeness,
    })
}

/// B_k = 0 iff more than `threshold` of the window is missing.
pub fn availability_flags(window: &MeasurementWindow, threshold: f64) -> Vec<bool> {
    window
        .completeness
        .iter()
        .map(|c| *c >= 1.0 - threshold - 1e-12)
        .collect()
}
