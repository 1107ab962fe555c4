use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use farmctl::calibration::{calibrate, CalibrationConfig, CalibrationData};
use farmctl::config::{load_turbine, read_measurements_csv, FarmConfig, ModelState};
use farmctl::estimation::{estimate_background, upstream_set};
use farmctl::farm::{AmbientState, ControlState};
use farmctl::fatigue::{BuildOptions, FatigueLut, LutGrid, SeedSchedule, SurrogateConfig, AXIS_NAMES};
use farmctl::flow::{FarmModel, ModelOptions, ThrustMode};
use farmctl::optimizer::{optimize_yaw, ObjectiveWeights, OptimizerConfig, YawProblem};
use farmctl::plant::availability_flags;
use farmctl::runner::{report_gains, run_scenario, BootstrapOptions, LoopConfig, Mode, RunReport, Scenario};
use farmctl::wake::WakeParams;

#[derive(Parser)]
#[command(name = "farmctl", version, about = "Closed-loop wind-farm yaw control toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, query or export the fatigue lookup table.
    #[command(subcommand)]
    Lut(LutCommand),
    /// Optimize yaw set points for one operating point.
    Optimize(OptimizeArgs),
    /// Estimate the background speed and calibrate κ from one window.
    Calibrate(CalibrateArgs),
    /// Run a scenario against the plant emulator.
    Run(RunArgs),
    /// Compare two runs.
    Stats(StatsArgs),
}

#[derive(Subcommand)]
enum LutCommand {
    Build {
        /// TOML file with the axis values; the default grid if absent.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Fixed seed count per node instead of the statistical rule.
        #[arg(long)]
        seeds: Option<usize>,
        /// Surrogate series length, s.
        #[arg(long, default_value_t = 600.0)]
        duration: f64,
        /// Turbine TOML; the reference machine if absent.
        #[arg(long)]
        turbine: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    Query {
        #[arg(long)]
        lut: PathBuf,
        /// U,TI,yaw,pitch,W_d,sigma_D,delta_c
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        at: Vec<f64>,
    },
    DumpCsv {
        #[arg(long)]
        lut: PathBuf,
        /// Standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct OptimizeArgs {
    /// Farm TOML (turbine and layout) or a layout CSV `id,x,y`.
    #[arg(long)]
    layout: PathBuf,
    /// Turbine TOML overriding the one in the farm file.
    #[arg(long)]
    turbine: Option<PathBuf>,
    /// U,direction,TI
    #[arg(long, value_delimiter = ',', required = true)]
    ambient: Vec<f64>,
    /// wP,wL
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.0])]
    weights: Vec<f64>,
    #[arg(long)]
    lut: Option<PathBuf>,
    /// Turbines that are off.
    #[arg(long, value_delimiter = ',')]
    off: Vec<usize>,
    /// k_a,k_b,alpha,beta
    #[arg(long, value_delimiter = ',')]
    params: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write a hub-height speed raster of the optimized flow to this CSV.
    #[arg(long)]
    raster: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// CSV with columns turbine,power_mean_w,yaw_mean_deg,completeness.
    #[arg(long)]
    measurements: PathBuf,
    /// Model state TOML: turbine, layout, ambient and current κ.
    #[arg(long)]
    state: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    /// Missing-data fraction above which a turbine is treated as off.
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
    /// Keep the background speed from the state file instead of estimating it.
    #[arg(long)]
    keep_speed: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// greedy, ol or cl
    #[arg(long)]
    mode: String,
    /// wP,wL
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.0])]
    weights: Vec<f64>,
    #[arg(long)]
    lut: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    /// Sampling time, s.
    #[arg(long, default_value_t = 600.0)]
    t_s: f64,
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    /// Baseline run directory.
    #[arg(long)]
    a: PathBuf,
    /// Compared run directory.
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 20)]
    block: usize,
    #[arg(long, default_value_t = 1000)]
    resamples: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn expect_len(name: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        bail!("--{name} takes {n} comma-separated values, got {}", v.len());
    }
    Ok(())
}

fn weights(v: &[f64]) -> Result<ObjectiveWeights> {
    expect_len("weights", v, 2)?;
    Ok(ObjectiveWeights::new(v[0], v[1])?)
}

fn load_lut(path: Option<&Path>) -> Result<Option<FatigueLut>> {
    path.map(|p| FatigueLut::load(p).with_context(|| format!("reading {}", p.display())))
        .transpose()
}

fn lut_command(cmd: LutCommand) -> Result<()> {
    match cmd {
        LutCommand::Build {
            grid,
            seeds,
            duration,
            turbine,
            out,
        } => {
            let grid = match grid {
                Some(p) => LutGrid::from_toml(&std::fs::read_to_string(&p)?)?,
                None => LutGrid::default(),
            };
            let spec = match turbine {
                Some(p) => load_turbine(&p)?,
                None => farmctl::farm::TurbineSpec::reference_10mw(),
            };
            let mut cfg = SurrogateConfig::for_turbine(&spec);
            cfg.duration = duration;
            let mut opts = BuildOptions::new(spec.wohler_blade, spec.wohler_tower);
            if let Some(n) = seeds {
                opts.seeds = SeedSchedule::Fixed(n);
            }
            info!(
                "building {} nodes ({} distinct, {} surrogate runs)",
                grid.node_count(),
                grid.distinct_node_count(),
                grid.case_count(&opts.seeds)
            );
            let lut = FatigueLut::build(grid, cfg, &opts)?;
            lut.save(&out)?;
            print_json(&serde_json::json!({ "out": out, "sha256": lut.digest() }))
        }
        LutCommand::Query { lut, at } => {
            let lut = FatigueLut::load(&lut)?;
            expect_len("at", &at, 7)?;
            let point: [f64; 7] = at.try_into().expect("length checked");
            let s = lut.interpolate(point);
            let channels: Vec<_> = farmctl::fatigue::Channel::ALL.iter().map(|c| c.name()).collect();
            print_json(&serde_json::json!({
                "axes": AXIS_NAMES,
                "at": point,
                "channels": channels,
                "del": s.del,
                "mean": s.mean,
                "clamped": s.clamped,
            }))
        }
        LutCommand::DumpCsv { lut, out } => {
            let lut = FatigueLut::load(&lut)?;
            match out {
                Some(p) => lut.write_csv(std::fs::File::create(p)?)?,
                None => lut.write_csv(std::io::stdout().lock())?,
            }
            Ok(())
        }
    }
}

fn optimize_command(a: OptimizeArgs) -> Result<()> {
    let mut farm = FarmConfig::load(&a.layout)?;
    if let Some(p) = &a.turbine {
        farm.turbine = load_turbine(p)?;
    }
    let layout = farm.layout()?;
    expect_len("ambient", &a.ambient, 3)?;
    let ambient = AmbientState::new(a.ambient[0], a.ambient[1], a.ambient[2]);
    ambient.validate()?;
    let params = match &a.params {
        Some(p) => {
            expect_len("params", p, 4)?;
            WakeParams::from_array([p[0], p[1], p[2], p[3]])
        }
        None => WakeParams::default(),
    };
    let n = layout.len();
    let mut availability = vec![true; n];
    for &k in &a.off {
        if k >= n {
            bail!("turbine {k} does not exist");
        }
        availability[k] = false;
    }
    let model = FarmModel::new(farm.turbine.clone(), layout, ambient, params, ModelOptions::default());
    let lut = load_lut(a.lut.as_deref())?;
    let cfg = OptimizerConfig::default();
    let problem = YawProblem::new(&model, availability.clone(), weights(&a.weights)?, lut.as_ref(), cfg.channel)?;
    let result = optimize_yaw(&problem, &cfg, a.seed)?;
    if let Some(path) = &a.raster {
        let sol = problem.solve(&result.yaw)?;
        let d = farm.turbine.rotor_diameter;
        let xs = model.layout.positions.iter().map(|p| p[0]);
        let ys = model.layout.positions.iter().map(|p| p[1]);
        let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        let csv = sol.field.raster_csv(
            (x0 - 3.0 * d, x1 + 10.0 * d),
            (y0 - 3.0 * d, y1 + 3.0 * d),
            200,
            120,
            farm.turbine.hub_height,
        );
        std::fs::write(path, csv)?;
    }
    print_json(&serde_json::json!({
        "yaw": result.yaw,
        "p_gain": result.power_gain,
        "del_gain": if result.del_gain.is_finite() { Some(result.del_gain) } else { None },
        "objective": result.objective,
        "starts": result.starts,
        "converged": result.converged,
        "evaluations": result.evaluations,
    }))
}

fn calibrate_command(a: CalibrateArgs) -> Result<()> {
    let state = ModelState::load(&a.state)?;
    let layout = state.layout.build(state.turbine.rotor_diameter)?;
    layout.validate(state.turbine.rotor_diameter)?;
    let window = read_measurements_csv(&a.measurements, 600.0)?;
    if window.len() != layout.len() {
        bail!("{} measurement rows for {} turbines", window.len(), layout.len());
    }
    let availability = availability_flags(&window, a.threshold);
    let mut model = FarmModel::new(state.turbine, layout, state.ambient, state.params, ModelOptions::default());
    let mut estimated = None;
    if !a.keep_speed {
        let upstream = upstream_set(&model, &availability)?;
        let u = estimate_background(&window, &model, &upstream, &availability)?;
        model.set_background_speed(u);
        estimated = Some(u);
    }
    let cfg = CalibrationConfig {
        lambda: a.lambda,
        ..Default::default()
    };
    let data = [CalibrationData {
        model: &model,
        window: &window,
        availability: &availability,
    }];
    let record = calibrate(&data, state.params, &cfg)?;
    let mut after = model.clone();
    after.params = record.after;
    let control = ControlState {
        yaw: window.mean_yaw.clone(),
        pitch_offset: vec![0.0; window.len()],
        availability: availability.clone(),
    };
    let predicted = after.solve(&control, &ThrustMode::FromInflow)?.power;
    print_json(&serde_json::json!({
        "background_speed": estimated,
        "availability": availability,
        "calibration": record,
        "predicted_power_w": predicted,
    }))
}

fn run_command(a: RunArgs) -> Result<()> {
    let scenario = Scenario::load(&a.scenario)?;
    let mode: Mode = a.mode.parse()?;
    let lut = load_lut(a.lut.as_deref())?;
    let mut cfg = LoopConfig::new(mode);
    cfg.weights = weights(&a.weights)?;
    cfg.t_s = a.t_s;
    cfg.calibration.lambda = a.lambda;
    let report = run_scenario(&scenario, &cfg, lut.as_ref(), a.seed)?;
    report.write_dir(&a.out)?;
    print_json(&serde_json::json!({
        "scenario": report.scenario,
        "mode": report.mode,
        "energy_j": report.energy,
        "farm_del": report.farm_del,
        "final_kappa": report.final_kappa,
        "hash": report.hash,
        "out": a.out,
    }))
}

fn stats_command(a: StatsArgs) -> Result<()> {
    let ra = RunReport::load_dir(&a.a)?;
    let rb = RunReport::load_dir(&a.b)?;
    let opts = BootstrapOptions {
        block: a.block,
        resamples: a.resamples,
        level: a.level,
        seed: 0,
    };
    let g = report_gains(&ra, &rb, &opts)?;
    print_json(&serde_json::json!({
        "energy_gain": g.energy_gain,
        "energy_gain_ci": g.energy_gain_ci,
        "del_change": if g.del_change.is_finite() { Some(g.del_change) } else { None },
        "mean_power_ci_a": g.mean_power_ci_a,
        "mean_power_ci_b": g.mean_power_ci_b,
        "welch": g.welch,
        "welch_samples": "per-window farm power means",
    }))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Lut(c) => lut_command(c),
        Command::Optimize(a) => optimize_command(a),
        Command::Calibrate(a) => calibrate_command(a),
        Command::Run(a) => run_command(a),
        Command::Stats(a) => stats_command(a),
    }
}
