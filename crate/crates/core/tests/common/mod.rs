//! Scenario builders and Monte-Carlo harnesses shared by the integration
//! and acceptance tests.
#![allow(dead_code)]

pub mod oracle;

use farmctl::calibration::{calibrate, CalibrationConfig, CalibrationData};
use farmctl::estimation::{estimate_background, upstream_set};
use farmctl::farm::*;
use farmctl::fatigue::Channel;
use farmctl::flow::*;
use farmctl::optimizer::*;
use farmctl::plant::{Plant, PlantConfig};
use farmctl::stats::{block_bootstrap_ci, welch_t_test};
use farmctl::wake::WakeParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const D: f64 = 178.3;

pub fn model(layout: FarmLayout, ambient: AmbientState, params: WakeParams) -> FarmModel {
    FarmModel::new(
        TurbineSpec::reference_10mw(),
        layout,
        ambient,
        params,
        ModelOptions::default(),
    )
}

pub fn window(power: Vec<f64>, yaw: Vec<f64>) -> MeasurementWindow {
    let n = power.len();
    MeasurementWindow {
        t_s: 600.0,
        mean_power: power,
        mean_yaw: yaw,
        completeness: vec![1.0; n],
    }
}

/// Absolute background-speed errors over `draws` noise draws on the
/// 32-turbine plant with the wind along its long side, so that eight
/// turbines are unwaked. `noise` is the multiplicative std; draw 0 is the
/// only one used when `noise` is zero.
pub fn estimation_errors(u_b: f64, noise: f64, draws: usize, seed: u64) -> Vec<f64> {
    let m = model(
        FarmLayout::reference_32(D),
        AmbientState::new(u_b, 0.0, 0.06),
        WakeParams::default(),
    );
    let n = m.len();
    let avail = vec![true; n];
    let truth = m
        .solve(&ControlState::greedy(n), &ThrustMode::FromInflow)
        .unwrap();
    let mut controller = m.clone();
    controller.set_background_speed(0.0);
    let upstream = upstream_set(&controller, &avail).unwrap();
    assert_eq!(upstream.len(), 8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Normal::new(1.0, noise.max(1e-300)).unwrap();
    (0..draws)
        .map(|_| {
            let p = truth
                .power
                .iter()
                .map(|p| if noise > 0.0 { p * dist.sample(&mut rng) } else { *p })
                .collect();
            let w = window(p, vec![0.0; n]);
            (estimate_background(&w, &controller, &upstream, &avail).unwrap() - u_b).abs()
        })
        .collect()
}

pub const TWIN_TRUTH: [f64; 4] = [0.3, 0.01, 2.0, 0.2];

/// Eight aligned turbines at 5 D under the twin truth parameters.
pub fn twin_column(yaw: &[f64], ambient: AmbientState) -> (FarmModel, MeasurementWindow) {
    let mut m = model(
        FarmLayout::grid(1, 8, 5.0 * D, 5.0 * D),
        ambient,
        WakeParams::from_array(TWIN_TRUTH),
    );
    let sol = m
        .solve(&ControlState::with_yaw(yaw.to_vec()), &ThrustMode::FromInflow)
        .unwrap();
    m.params = WakeParams::default();
    (m, window(sol.power, yaw.to_vec()))
}

/// λ = 0 calibration from the default parameters against noise-free powers
/// of one greedy window; per-component relative errors.
pub fn twin_recovery() -> [f64; 4] {
    let (m, w) = twin_column(&[0.0; 8], AmbientState::new(8.0, 270.0, 0.06));
    let avail = vec![true; 8];
    let data = [CalibrationData {
        model: &m,
        window: &w,
        availability: &avail,
    }];
    let cfg = CalibrationConfig {
        lambda: 0.0,
        ..Default::default()
    };
    let r = calibrate(&data, WakeParams::default(), &cfg).unwrap();
    let got = r.after.to_array();
    std::array::from_fn(|k| ((got[k] - TWIN_TRUTH[k]) / TWIN_TRUTH[k]).abs())
}

/// λ = 2 calibration of the default parameters against one 600 s window
/// of the emulated column (truth `truth`, 3 % correlated power noise);
/// residual RMS before and after, W.
pub fn noisy_calibration(truth: [f64; 4], seed: u64) -> (f64, f64) {
    let layout = FarmLayout::grid(1, 8, 5.0 * D, 5.0 * D);
    let ambient = AmbientState::new(8.0, 270.0, 0.06);
    let config = PlantConfig {
        truth_params: WakeParams::from_array(truth),
        ..Default::default()
    };
    let spec = TurbineSpec::reference_10mw();
    let mut plant = Plant::new(&spec, &layout, ambient, config, seed).unwrap();
    plant.run_until(600.0).unwrap();
    let w = plant.averaged_window(600.0).unwrap();
    let m = model(layout, ambient, WakeParams::default());
    let avail = vec![true; 8];
    let data = [CalibrationData {
        model: &m,
        window: &w,
        availability: &avail,
    }];
    let r = calibrate(&data, WakeParams::default(), &CalibrationConfig::default()).unwrap();
    (r.rms_before, r.rms_after)
}

/// Optimized yaw of an aligned pair at 5 D and the best point of the
/// 61 × 61 one-degree grid.
pub fn pair_vs_grid() -> (Vec<f64>, [f64; 2], f64, f64) {
    let m = model(
        FarmLayout::new(vec![[0.0, 0.0], [5.0 * D, 0.0]]),
        AmbientState::new(8.0, 270.0, 0.06),
        WakeParams::default(),
    );
    let problem = YawProblem::new(
        &m,
        vec![true; 2],
        ObjectiveWeights::power_only(),
        None,
        Channel::BladeRootOop,
    )
    .unwrap();
    let opt = optimize_yaw(&problem, &OptimizerConfig::default(), 0).unwrap();
    let mut best = ([0.0, 0.0], f64::INFINITY);
    for a in -30..=30 {
        for b in -30..=30 {
            let y = [a as f64, b as f64];
            let v = problem.objective(&y).unwrap();
            if v < best.1 {
                best = (y, v);
            }
        }
    }
    (opt.yaw, best.0, opt.objective, best.1)
}

pub fn single_turbine_yaw() -> f64 {
    let m = model(
        FarmLayout::new(vec![[0.0, 0.0]]),
        AmbientState::new(9.0, 200.0, 0.08),
        WakeParams::default(),
    );
    let problem = YawProblem::new(
        &m,
        vec![true],
        ObjectiveWeights::power_only(),
        None,
        Channel::BladeRootOop,
    )
    .unwrap();
    optimize_yaw(&problem, &OptimizerConfig::default(), 3).unwrap().yaw[0]
}

/// Random farm: 2–8 turbines scattered on a loose grid, random ambient and
/// outages.
pub fn random_farm(rng: &mut ChaCha8Rng) -> (FarmModel, Vec<bool>) {
    let n = rng.random_range(2..=8);
    let mut positions: Vec<[f64; 2]> = Vec::new();
    while positions.len() < n {
        let p = [
            rng.random_range(0.0..25.0 * D),
            rng.random_range(0.0..10.0 * D),
        ];
        if positions.iter().all(|q| distance(*q, p) > 2.0 * D) {
            positions.push(p);
        }
    }
    let amb = AmbientState::new(
        rng.random_range(5.0..11.0),
        rng.random_range(0.0..360.0),
        rng.random_range(0.04..0.12),
    );
    let mut avail: Vec<bool> = (0..n).map(|_| rng.random_bool(0.85)).collect();
    avail[0] = true;
    (model(FarmLayout::new(positions), amb, WakeParams::default()), avail)
}

/// Zero-start no-regression over `farms` random farms; returns the number
/// of farms violating the bound, pinning or no-regression property.
pub fn zero_start_violations(farms: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for k in 0..farms {
        let (m, avail) = random_farm(&mut rng);
        let problem = YawProblem::new(
            &m,
            avail.clone(),
            ObjectiveWeights::power_only(),
            None,
            Channel::BladeRootOop,
        )
        .unwrap();
        let f0 = problem.objective(&vec![0.0; m.len()]).unwrap();
        let r = optimize_yaw(&problem, &OptimizerConfig::default(), k as u64).unwrap();
        let pinned = r.yaw.iter().zip(&avail).all(|(y, b)| *b || *y == 0.0);
        let bounded = r.yaw.iter().all(|y| y.abs() <= YAW_LIMIT);
        if !(r.objective <= f0 && pinned && bounded) {
            bad += 1;
        }
    }
    bad
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, mean: f64, sd: f64) -> Vec<f64> {
    let d = Normal::new(mean, sd).unwrap();
    (0..n).map(|_| d.sample(rng)).collect()
}

/// Ratio of the block-1 bootstrap half-width to 1.96σ/√n for each of
/// `trials` i.i.d. Gaussian series of length `n`.
pub fn bootstrap_width_ratios(trials: usize, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let analytic = 1.96 * 2.0 / (n as f64).sqrt();
    (0..trials)
        .map(|t| {
            let x = gaussian(&mut rng, n, 5.0, 2.0);
            let (lo, hi) = block_bootstrap_ci(&x, 1, 1000, 0.95, t as u64).unwrap();
            0.5 * (hi - lo) / analytic
        })
        .collect()
}

/// Fraction of AR(1) series (φ = 0.8) whose block-20 interval is wider
/// than the block-1 interval.
pub fn ar1_wider_fraction(trials: usize, n: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let wider = (0..trials)
        .filter(|&t| {
            let e = gaussian(&mut rng, n, 0.0, 1.0);
            let mut x = Vec::with_capacity(n);
            let mut v = 0.0;
            for z in e {
                v = 0.8 * v + z;
                x.push(v);
            }
            let w1 = block_bootstrap_ci(&x, 1, 1000, 0.95, t as u64).unwrap();
            let w20 = block_bootstrap_ci(&x, 20, 1000, 0.95, t as u64).unwrap();
            w20.1 - w20.0 > w1.1 - w1.0
        })
        .count();
    wider as f64 / trials as f64
}

/// Trials out of `trials` with p < 0.01 for N(0,1) vs N(1,1), n = 50.
pub fn welch_power(trials: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    (0..trials)
        .filter(|_| {
            let a = gaussian(&mut rng, 50, 0.0, 1.0);
            let b = gaussian(&mut rng, 50, 1.0, 1.0);
            welch_t_test(&a, &b).unwrap().p < 0.01
        })
        .count()
}

/// Rejection rate at α = 0.05 for equal means with σ = 1 vs 3 and
/// unequal sample sizes.
pub fn welch_size(trials: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let rejected = (0..trials)
        .filter(|_| {
            let a = gaussian(&mut rng, 20, 2.0, 1.0);
            let b = gaussian(&mut rng, 45, 2.0, 3.0);
            welch_t_test(&a, &b).unwrap().p < 0.05
        })
        .count();
    rejected as f64 / trials as f64
}

/// Truth parameters of the deep-array scenario: faster wake recovery than
/// the controller's default κ.
pub const DEEP_TRUTH: [f64; 4] = [0.6, 0.02, 2.32, 0.154];
/// Truth parameters with slower recovery, where steering pays off.
pub const SLOW_TRUTH: [f64; 4] = [0.2, 0.004, 2.32, 0.154];

/// 4 × 4 aligned farm at 5 D, U = 8 m/s from the west, TI 6 %.
pub fn grid_scenario(name: &str, truth: [f64; 4]) -> farmctl::runner::Scenario {
    farmctl::runner::Scenario {
        name: name.into(),
        turbine: TurbineSpec::reference_10mw(),
        layout: farmctl::config::LayoutConfig::Grid {
            rows: 4,
            cols: 4,
            spacing_x: 5.0,
            spacing_y: 5.0,
        },
        ambient: AmbientState::new(8.0, 270.0, 0.06),
        duration: 3600.0,
        plant: PlantConfig {
            truth_params: WakeParams::from_array(truth),
            ..Default::default()
        },
        controller_params: WakeParams::default(),
    }
}

/// The deep-array scenario with the third column (x index 2) switched off
/// for the whole run.
pub fn shutdown_scenario(truth: [f64; 4]) -> farmctl::runner::Scenario {
    let mut s = grid_scenario("shutdown", truth);
    s.plant.outages = (0..4)
        .map(|row| farmctl::plant::OffInterval {
            turbine: row * 4 + 2,
            start: 0.0,
            end: 1e9,
        })
        .collect();
    s
}

pub fn loop_config(mode: farmctl::runner::Mode) -> farmctl::runner::LoopConfig {
    farmctl::runner::LoopConfig::new(mode)
}
