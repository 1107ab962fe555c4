//! Scenario runner: greedy, open-loop and closed-loop control of the plant
//! emulator, plus run comparison statistics.

use std::path::Path;

use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calibration::{calibrate, CalibrationConfig, CalibrationData};
use crate::config::LayoutConfig;
use crate::error::{FarmError, Result};
use crate::estimation::{estimate_background, upstream_set};
use crate::farm::{AmbientState, ControlState, FarmLayout, MeasurementWindow, TurbineSpec};
use crate::fatigue::FatigueLut;
use crate::flow::{FarmModel, ModelOptions, ThrustMode};
use crate::optimizer::{
    optimize_yaw, optimize_yaw_from, turbine_dels, ObjectiveWeights, OptimizerConfig, YawProblem,
};
use crate::plant::{availability_flags, Plant, PlantConfig};
use crate::stats::{block_bootstrap_ci, block_bootstrap_gain_ci, welch_t_test, WelchResult};
use crate::wake::WakeParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default = "TurbineSpec::reference_10mw")]
    pub turbine: TurbineSpec,
    pub layout: LayoutConfig,
    /// Truth ambient state; also the controller's nominal state.
    pub ambient: AmbientState,
    /// Evaluated duration after spin-up, s.
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default)]
    pub plant: PlantConfig,
    /// Controller's initial κ.
    #[serde(default)]
    pub controller_params: WakeParams,
}

fn default_duration() -> f64 {
    3600.0
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Self = toml::from_str(text).map_err(|e| FarmError::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.turbine.validate()?;
        self.ambient.validate()?;
        let layout = self.farm_layout()?;
        self.plant.validate(layout.len())?;
        if !(self.duration > 0.0) {
            return Err(FarmError::Config("duration must be positive".into()));
        }
        Ok(())
    }

    pub fn farm_layout(&self) -> Result<FarmLayout> {
        let layout = self.layout.build(self.turbine.rotor_diameter)?;
        layout.validate(self.turbine.rotor_diameter)?;
        Ok(layout)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Greedy,
    OpenLoop,
    ClosedLoop,
}

impl std::str::FromStr for Mode {
    type Err = FarmError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Mode::Greedy),
            "ol" | "open-loop" => Ok(Mode::OpenLoop),
            "cl" | "closed-loop" => Ok(Mode::ClosedLoop),
            other => Err(FarmError::Config(format!("unknown mode {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    pub mode: Mode,
    /// Sampling time, s.
    pub t_s: f64,
    pub weights: ObjectiveWeights,
    /// Missing-data fraction above which a turbine is flagged unavailable.
    pub availability_threshold: f64,
    pub optimizer: OptimizerConfig,
    pub calibration: CalibrationConfig,
    /// Farm power logging period for the bootstrap series, s.
    pub log_period: f64,
    /// Precomputed open-loop set points; computed at t = 0 if absent.
    pub open_loop_table: Option<Vec<f64>>,
}

impl LoopConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            t_s: 600.0,
            weights: ObjectiveWeights::power_only(),
            availability_threshold: 0.1,
            optimizer: OptimizerConfig::default(),
            calibration: CalibrationConfig::default(),
            log_period: 1.5,
            open_loop_table: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopRecord {
    pub window: usize,
    /// End of the window, s.
    pub time: f64,
    pub measurements: MeasurementWindow,
    pub availability: Vec<bool>,
    /// Window mean of the instantaneous farm power, W.
    pub farm_power: f64,
    pub estimated_speed: Option<f64>,
    pub kappa: WakeParams,
    pub rms_before: Option<f64>,
    pub rms_after: Option<f64>,
    pub dispatched: Vec<f64>,
    pub power_gain: Option<f64>,
    pub del_gain: Option<f64>,
    /// Per-turbine window DEL from the load table, kN·m.
    pub dels: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub mode: Mode,
    pub seed: u64,
    pub t_s: f64,
    pub weights: ObjectiveWeights,
    pub records: Vec<LoopRecord>,
    /// J
    pub energy: f64,
    /// Per-turbine DEL tally (Σ_w DEL^m)^(1/m).
    pub turbine_del: Vec<f64>,
    pub farm_del: f64,
    pub final_kappa: WakeParams,
    /// Farm power every `power_period` seconds after spin-up, W.
    pub power_series: Vec<f64>,
    pub power_period: f64,
    /// (time, yaw per turbine) every 10 s after spin-up.
    pub yaw_series: Vec<(f64, Vec<f64>)>,
    /// SHA-256 of the report serialized with this field empty.
    pub hash: String,
}

impl RunReport {
    pub fn compute_hash(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.hash.clear();
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(&copy)?)))
    }

    pub fn window_means(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.farm_power).collect()
    }

    /// Writes report.json, windows.csv and power.csv into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let tmp = dir.join("report.json.tmp");
        std::fs::write(&tmp, serde_json::to_vec_pretty(self)?)?;
        std::fs::rename(&tmp, dir.join("report.json"))?;

        let mut w = csv::Writer::from_path(dir.join("windows.csv"))?;
        let n = self.records.first().map_or(0, |r| r.measurements.len());
        let mut header = vec![
            "window".to_string(),
            "time_s".into(),
            "farm_power_w".into(),
            "estimated_speed".into(),
            "k_a".into(),
            "k_b".into(),
            "alpha".into(),
            "beta".into(),
        ];
        for i in 0..n {
            header.push(format!("power_{i}"));
        }
        for i in 0..n {
            header.push(format!("yaw_{i}"));
        }
        for i in 0..n {
            header.push(format!("dispatch_{i}"));
        }
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![
                r.window.to_string(),
                r.time.to_string(),
                r.farm_power.to_string(),
                r.estimated_speed.map_or(String::new(), |u| u.to_string()),
                r.kappa.k_a.to_string(),
                r.kappa.k_b.to_string(),
                r.kappa.alpha.to_string(),
                r.kappa.beta.to_string(),
            ];
            row.extend(r.measurements.mean_power.iter().map(|v| v.to_string()));
            row.extend(r.measurements.mean_yaw.iter().map(|v| v.to_string()));
            row.extend(r.dispatched.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("power.csv"))?;
        w.write_record(["time_s", "farm_power_w"])?;
        for (k, p) in self.power_series.iter().enumerate() {
            w.write_record([(k as f64 * self.power_period).to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let text = std::fs::read(dir.join("report.json"))?;
        Ok(serde_json::from_slice(&text)?)
    }
}

/// Set points from one optimization with the controller's initial κ at the
/// nominal ambient state, all turbines available.
pub fn open_loop_table(
    scenario: &Scenario,
    cfg: &LoopConfig,
    lut: Option<&FatigueLut>,
) -> Result<Vec<f64>> {
    let model = controller_model(scenario)?;
    let problem = YawProblem::new(
        &model,
        vec![true; model.len()],
        cfg.weights,
        lut,
        cfg.optimizer.channel,
    )?;
    Ok(optimize_yaw(&problem, &cfg.optimizer, 0)?.yaw)
}

fn controller_model(scenario: &Scenario) -> Result<FarmModel> {
    Ok(FarmModel::new(
        scenario.turbine.clone(),
        scenario.farm_layout()?,
        scenario.ambient,
        scenario.controller_params,
        ModelOptions::default(),
    ))
}

/// Estimate, calibrate and optimize from one window, warm-starting the
/// optimizer at the previous set points. Returns the new set points and
/// fills the record's estimation fields.
fn closed_loop_update(
    model: &mut FarmModel,
    window: &MeasurementWindow,
    availability: &[bool],
    cfg: &LoopConfig,
    lut: Option<&FatigueLut>,
    seed: u64,
    previous: &[f64],
    record: &mut LoopRecord,
) -> Result<Vec<f64>> {
    let upstream = upstream_set(model, availability)?;
    let speed = estimate_background(window, model, &upstream, availability)?;
    record.estimated_speed = Some(speed);
    model.set_background_speed(speed);
    let data = [CalibrationData {
        model,
        window,
        availability,
    }];
    let cal = calibrate(&data, model.params, &cfg.calibration)?;
    record.rms_before = Some(cal.rms_before);
    record.rms_after = Some(cal.rms_after);
    model.params = cal.after;
    record.kappa = cal.after;
    let problem = YawProblem::new(
        model,
        availability.to_vec(),
        cfg.weights,
        lut,
        cfg.optimizer.channel,
    )?;
    let result = optimize_yaw_from(&problem, &cfg.optimizer, seed, Some(previous))?;
    record.power_gain = Some(result.power_gain);
    record.del_gain = Some(result.del_gain).filter(|v| v.is_finite());
    Ok(result.yaw)
}

/// Run one scenario in the given mode. Module errors inside a window are
/// logged and the previous set points are kept.
pub fn run_scenario(
    scenario: &Scenario,
    cfg: &LoopConfig,
    lut: Option<&FatigueLut>,
    seed: u64,
) -> Result<RunReport> {
    scenario.validate()?;
    if !(cfg.t_s > 0.0) {
        return Err(FarmError::Config("sampling time must be positive".into()));
    }
    let windows = (scenario.duration / cfg.t_s).round() as usize;
    if windows == 0 || ((windows as f64) * cfg.t_s - scenario.duration).abs() > 1e-6 {
        return Err(FarmError::Config(format!(
            "sampling time {} does not divide duration {}",
            cfg.t_s, scenario.duration
        )));
    }
    let layout = scenario.farm_layout()?;
    let n = layout.len();
    let mut plant = Plant::new(
        &scenario.turbine,
        &layout,
        scenario.ambient,
        scenario.plant.clone(),
        seed,
    )?;
    let mut model = controller_model(scenario)?;
    let channel = cfg.optimizer.channel;

    let mut targets = match cfg.mode {
        Mode::Greedy => vec![0.0; n],
        Mode::OpenLoop | Mode::ClosedLoop => match &cfg.open_loop_table {
            Some(t) => t.clone(),
            None => open_loop_table(scenario, cfg, lut)?,
        },
    };
    plant.set_targets(&targets);

    let dt = scenario.plant.dt;
    let spin_up = scenario.plant.spin_up;
    plant.run_until(spin_up)?;
    let start_index = plant.history().len();
    let log_every = ((cfg.log_period / dt).round() as usize).max(1);

    let mut records = Vec::with_capacity(windows);
    let mut del_power_sums = vec![0.0; n];
    let wohler = lut.map(|l| l.wohler[channel as usize]);
    for w in 0..windows {
        let t_end = spin_up + (w + 1) as f64 * cfg.t_s;
        let before = plant.history().len();
        plant.run_until(t_end)?;
        let window = plant.averaged_window(cfg.t_s)?;
        let steps = &plant.history()[before..];
        let farm_power = steps
            .iter()
            .map(|s| s.power.iter().sum::<f64>())
            .sum::<f64>()
            / steps.len() as f64;
        let availability = availability_flags(&window, cfg.availability_threshold);

        let dels = match lut {
            Some(lut) => {
                let control = ControlState {
                    yaw: window.mean_yaw.clone(),
                    pitch_offset: vec![0.0; n],
                    availability: availability.clone(),
                };
                let sol = plant
                    .truth_model()
                    .solve(&control, &ThrustMode::FromInflow)?;
                turbine_dels(
                    &sol,
                    scenario.ambient.background_speed,
                    &control,
                    lut,
                    channel,
                )
            }
            None => Vec::new(),
        };
        if let Some(m) = wohler {
            for (acc, d) in del_power_sums.iter_mut().zip(&dels) {
                *acc += d.powf(m);
            }
        }

        let mut record = LoopRecord {
            window: w,
            time: t_end,
            measurements: window.clone(),
            availability: availability.clone(),
            farm_power,
            estimated_speed: None,
            kappa: model.params,
            rms_before: None,
            rms_after: None,
            dispatched: targets.clone(),
            power_gain: None,
            del_gain: None,
            dels,
            error: None,
        };
        if cfg.mode == Mode::ClosedLoop {
            let window_seed = seed.wrapping_mul(1_000_003).wrapping_add(w as u64);
            let mut trial = model.clone();
            match closed_loop_update(
                &mut trial,
                &window,
                &availability,
                cfg,
                lut,
                window_seed,
                &targets,
                &mut record,
            ) {
                Ok(yaw) => {
                    model = trial;
                    targets = yaw;
                    plant.set_targets(&targets);
                    record.dispatched = targets.clone();
                }
                Err(e) => {
                    warn!("window {w}: {e}; keeping previous set points");
                    record.error = Some(e.to_string());
                }
            }
        }
        info!("window {w}: farm power {:.3} MW", farm_power * 1e-6);
        records.push(record);
    }

    let history = &plant.history()[start_index..];
    let power_series: Vec<f64> = history
        .iter()
        .step_by(log_every)
        .map(|s| s.power.iter().sum())
        .collect();
    let yaw_every = ((10.0 / dt).round() as usize).max(1);
    let yaw_series = history
        .iter()
        .step_by(yaw_every)
        .map(|s| (s.time, s.yaw.clone()))
        .collect();
    let energy = records.iter().map(|r| r.farm_power * cfg.t_s).sum();
    let turbine_del: Vec<f64> = match wohler {
        Some(m) => del_power_sums.iter().map(|s| s.powf(1.0 / m)).collect(),
        None => Vec::new(),
    };
    let mut report = RunReport {
        scenario: scenario.name.clone(),
        mode: cfg.mode,
        seed,
        t_s: cfg.t_s,
        weights: cfg.weights,
        records,
        energy,
        farm_del: turbine_del.iter().fold(0.0, |a, b| a + b),
        turbine_del,
        final_kappa: model.params,
        power_series,
        power_period: log_every as f64 * dt,
        yaw_series,
        hash: String::new(),
    };
    report.hash = report.compute_hash()?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSummary {
    /// E_b / E_a − 1.
    pub energy_gain: f64,
    pub energy_gain_ci: (f64, f64),
    /// Farm DEL tally ratio b / a − 1 (NaN without loads).
    pub del_change: f64,
    pub mean_power_ci_a: (f64, f64),
    pub mean_power_ci_b: (f64, f64),
    /// On per-window farm power means.
    pub welch: WelchResult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapOptions {
    pub block: usize,
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            block: 20,
            resamples: 1000,
            level: 0.95,
            seed: 0,
        }
    }
}

/// Compare run `b` against baseline `a`.
pub fn report_gains(a: &RunReport, b: &RunReport, opts: &BootstrapOptions) -> Result<GainSummary> {
    if a.records.len() != b.records.len()
        || a.t_s != b.t_s
        || a.power_series.len() != b.power_series.len()
    {
        return Err(FarmError::Statistics(
            "runs cover different durations".into(),
        ));
    }
    let ci = |s: &[f64]| block_bootstrap_ci(s, opts.block, opts.resamples, opts.level, opts.seed);
    let welch = welch_t_test(&b.window_means(), &a.window_means())?;
    let energy_gain = b.energy / a.energy - 1.0;
    let energy_gain_ci = if a.power_series == b.power_series {
        (0.0, 0.0)
    } else {
        block_bootstrap_gain_ci(
            &a.power_series,
            &b.power_series,
            opts.block,
            opts.resamples,
            opts.level,
            opts.seed,
        )?
    };
    Ok(GainSummary {
        energy_gain,
        energy_gain_ci,
        del_change: if a.farm_del > 0.0 {
            b.farm_del / a.farm_del - 1.0
        } else {
            f64::NAN
        },
        mean_power_ci_a: ci(&a.power_series)?,
        mean_power_ci_b: ci(&b.power_series)?,
        welch,
    })
}
