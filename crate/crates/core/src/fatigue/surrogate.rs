//! Surrogate aeroelastic load generator.
//!
//! Three blades with three radial stations each sweep through a Gaussian
//! inflow wake plus synthetic turbulence. Sectional forces follow a
//! linear-lift closure: out-of-plane force ∝ v_t·u_ax, in-plane ∝ u_ax².
//! The turbulence and meander realizations depend on the seed only, so
//! neighbouring load cases share random numbers and the resulting DEL
//! surface is smooth.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{FarmError, Result};
use crate::farm::{cosd, sind, Curve, TurbineSpec};
use crate::flow::InflowWake;

/// Load channels, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    BladeRootOop,
    BladeRootIp,
    TowerFa,
    TowerSs,
}

impl Channel {
    pub const ALL: [Channel; 4] = [
        Channel::BladeRootOop,
        Channel::BladeRootIp,
        Channel::TowerFa,
        Channel::TowerSs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::BladeRootOop => "blade-root-oop",
            Channel::BladeRootIp => "blade-root-ip",
            Channel::TowerFa => "tower-fa",
            Channel::TowerSs => "tower-ss",
        }
    }

    pub fn is_blade(self) -> bool {
        matches!(self, Channel::BladeRootOop | Channel::BladeRootIp)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadSeries {
    pub channel: Channel,
    /// kN·m
    pub samples: Vec<f64>,
    /// Hz
    pub sample_rate: f64,
}

impl LoadSeries {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len().max(1) as f64
    }
}

/// One point of the load table's input space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadCase {
    /// m/s
    pub wind_speed: f64,
    /// fraction
    pub ti: f64,
    /// deg
    pub yaw: f64,
    /// deg
    pub pitch: f64,
    pub wake: InflowWake,
}

/// Admissible range of each input, matching the default table axes.
pub const INPUT_BOUNDS: [(f64, f64); 7] = [
    (4.0, 25.0),
    (0.03, 0.20),
    (-30.0, 30.0),
    (-6.0, 6.0),
    (0.0, 0.5),
    (0.65, 1.73),
    (-1.5, 1.5),
];

impl LoadCase {
    pub fn from_array(a: [f64; 7]) -> Self {
        Self {
            wind_speed: a[0],
            ti: a[1],
            yaw: a[2],
            pitch: a[3],
            wake: InflowWake {
                depth: a[4],
                width: a[5],
                center: a[6],
            },
        }
    }

    pub fn to_array(self) -> [f64; 7] {
        [
            self.wind_speed,
            self.ti,
            self.yaw,
            self.pitch,
            self.wake.depth,
            self.wake.width,
            self.wake.center,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (i, (v, (lo, hi))) in self.to_array().iter().zip(INPUT_BOUNDS).enumerate() {
            if !(*v >= lo - 1e-9 && *v <= hi + 1e-9) {
                return Err(FarmError::Lut(format!(
                    "load-case input {i} = {v} outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// Mean inflow of a symmetric Gaussian wake:
/// U∞(1 − W_d·exp(−2(y−δ)²/(D²σ_D²))·exp(−2(z−z_h)²/(D²σ_D²))), δ = δ_c·D.
pub fn inflow_wake_field(
    u_inf: f64,
    wake: InflowWake,
    d: f64,
    hub_height: f64,
) -> impl Fn(f64, f64) -> f64 {
    let s2 = d * d * wake.width * wake.width;
    let delta = wake.center * d;
    move |y: f64, z: f64| {
        let dy = y - delta;
        let dz = z - hub_height;
        u_inf * (1.0 - wake.depth * (-2.0 * dy * dy / s2).exp() * (-2.0 * dz * dz / s2).exp())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateConfig {
    pub rotor_diameter: f64,
    pub hub_height: f64,
    /// Hz
    pub sample_rate: f64,
    /// s
    pub duration: f64,
    pub rated_speed: f64,
    pub ct_curve: Curve,
    /// Rotor speed limits, rad/s.
    pub min_rotor_speed: f64,
    pub max_rotor_speed: f64,
    /// Design tip-speed ratio below rated.
    pub tip_speed_ratio: f64,
    /// Integral time of the rotor-wide turbulence component, s.
    pub common_time: f64,
    /// Integral time of the blade-local component, s.
    pub local_time: f64,
    /// Share of turbulence variance carried by the blade-local component.
    pub local_share: f64,
    /// Lateral wake-meander standard deviation, rotor diameters.
    pub meander_std: f64,
    /// s
    pub meander_time: f64,
    /// Mean axial induction used by the skewed-wake inflow correction.
    pub induction: f64,
}

impl SurrogateConfig {
    pub fn for_turbine(spec: &TurbineSpec) -> Self {
        Self {
            rotor_diameter: spec.rotor_diameter,
            hub_height: spec.hub_height,
            sample_rate: 4.0,
            duration: 600.0,
            rated_speed: 11.4,
            ct_curve: spec.ct_curve.clone(),
            min_rotor_speed: 0.628,
            max_rotor_speed: 1.005,
            tip_speed_ratio: 7.5,
            common_time: 8.0,
            local_time: 1.5,
            local_share: 0.35,
            meander_std: 0.12,
            meander_time: 25.0,
            induction: 1.0 / 3.0,
        }
    }

    pub fn rotor_speed(&self, wind_speed: f64) -> f64 {
        let r = self.rotor_diameter / 2.0;
        (self.tip_speed_ratio * wind_speed / r).clamp(self.min_rotor_speed, self.max_rotor_speed)
    }

    /// Above rated, aerodynamic loads follow the thrust coefficient down.
    fn load_factor(&self, wind_speed: f64) -> f64 {
        if wind_speed <= self.rated_speed {
            1.0
        } else {
            self.ct_curve.eval(wind_speed) / self.ct_curve.eval(self.rated_speed)
        }
    }
}

/// Unit-variance AR(1) sequence with integral time `tau` at step `dt`.
fn ou_series(rng: &mut ChaCha8Rng, n: usize, dt: f64, tau: f64) -> Vec<f64> {
    let phi = (-dt / tau).exp();
    let innov = (1.0 - phi * phi).sqrt();
    let mut x: f64 = StandardNormal.sample(rng);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(x);
        let e: f64 = StandardNormal.sample(rng);
        x = phi * x + innov * e;
    }
    out
}

/// Rescale to exactly zero mean and unit variance so the realised
/// turbulence intensity equals the requested one.
fn standardize(v: &mut [f64]) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let s = var.sqrt().max(1e-300);
    for x in v.iter_mut() {
        *x = (*x - mean) / s;
    }
}

const AIR_DENSITY: f64 = 1.225;
const LIFT_SLOPE: f64 = 2.0 * std::f64::consts::PI;
const STATIONS: [f64; 3] = [0.3, 0.6, 0.9];
const CHORDS: [f64; 3] = [5.0, 4.0, 2.5];
const TORQUE_SHARE: f64 = 0.5;
const BLADE_MASS: f64 = 41_000.0;
const BLADE_CG: f64 = 0.35;
const PITCH_SENSITIVITY: f64 = 0.06;

/// Generate the four load channels for one case and seed.
pub fn surrogate_load_case(
    case: &LoadCase,
    seed: u64,
    cfg: &SurrogateConfig,
) -> Result<[LoadSeries; 4]> {
    case.validate()?;
    let n = (cfg.duration * cfg.sample_rate).round() as usize;
    let dt = 1.0 / cfg.sample_rate;
    let d = cfg.rotor_diameter;
    let r_tip = d / 2.0;
    let dr = r_tip / STATIONS.len() as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut common = ou_series(&mut rng, n, dt, cfg.common_time);
    standardize(&mut common);
    let local: Vec<Vec<f64>> = (0..3)
        .map(|_| {
            let mut v = ou_series(&mut rng, n, dt, cfg.local_time);
            standardize(&mut v);
            v
        })
        .collect();
    let meander = ou_series(&mut rng, n, dt, cfg.meander_time);
    let phase0: f64 = rand::Rng::random::<f64>(&mut rng) * std::f64::consts::TAU;

    let u_inf = case.wind_speed;
    let sigma_u = case.ti * u_inf;
    let a_c = (1.0 - cfg.local_share).sqrt();
    let a_l = cfg.local_share.sqrt();
    let omega = cfg.rotor_speed(u_inf);
    let (cg, sg) = (cosd(case.yaw), sind(case.yaw));
    let scale = (1.0 - PITCH_SENSITIVITY * case.pitch) * cfg.load_factor(u_inf);
    let q = 0.5 * AIR_DENSITY * LIFT_SLOPE * scale;
    let gravity = BLADE_MASS * 9.81 * BLADE_CG * r_tip;
    // Skewed-wake induction: lateral 1P gradient across a yawed rotor.
    let chi = (0.6 * cfg.induction + 1.0) * case.yaw.to_radians();
    let skew = cfg.induction * 15.0 * std::f64::consts::PI / 32.0 * (0.5 * chi).tan();

    let mut oop = Vec::with_capacity(n);
    let mut ip = Vec::with_capacity(n);
    let mut fa = Vec::with_capacity(n);
    let mut ss = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * dt;
        let wake = InflowWake {
            center: case.wake.center + cfg.meander_std * meander[k],
            ..case.wake
        };
        let field = inflow_wake_field(u_inf, wake, d, cfg.hub_height);
        let mut thrust = 0.0;
        let mut side = 0.0;
        let mut blade0 = (0.0, 0.0);
        for (b, lb) in local.iter().enumerate() {
            let psi = phase0 + omega * t + std::f64::consts::TAU * b as f64 / 3.0;
            let (sp, cp) = psi.sin_cos();
            let gust = sigma_u * (a_c * common[k] + a_l * lb[k]);
            let mut m_oop = 0.0;
            let mut m_ip = 0.0;
            for (s, c) in STATIONS.iter().zip(CHORDS) {
                let r = s * r_tip;
                let u = field(r * sp, cfg.hub_height + r * cp) + gust;
                let u_ax = u * cg * (1.0 - skew * s * sp);
                let v_t = omega * r + u * sg * cp;
                let f_n = q * c * v_t * u_ax;
                let f_t = q * TORQUE_SHARE * c * u_ax * u_ax;
                m_oop += f_n * dr * r;
                m_ip += f_t * dr * r;
                thrust += f_n * dr;
                side += f_t * dr * cp;
            }
            m_ip += gravity * sp;
            if b == 0 {
                blade0 = (m_oop, m_ip);
            }
        }
        oop.push(blade0.0 / 1e3);
        ip.push(blade0.1 / 1e3);
        fa.push(thrust * cfg.hub_height / 1e3);
        ss.push(side * cfg.hub_height / 1e3);
    }
    let mk = |channel, samples| LoadSeries {
        channel,
        samples,
        sample_rate: cfg.sample_rate,
    };
    Ok([
        mk(Channel::BladeRootOop, oop),
        mk(Channel::BladeRootIp, ip),
        mk(Channel::TowerFa, fa),
        mk(Channel::TowerSs, ss),
    ])
}
