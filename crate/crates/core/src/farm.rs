//! Turbine and farm domain types shared by every other module.
//!
//! Frame convention: `x` points east, `y` north. Wind direction is the
//! meteorological direction the wind blows *from*, so 270° is a westerly
//! wind travelling along `+x`.

use serde::{Deserialize, Serialize};

use crate::error::{FarmError, Result};

/// Cosine of an angle in degrees, exact at multiples of 90°.
pub fn cosd(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    match r {
        r if r == 0.0 => 1.0,
        r if r == 90.0 || r == 270.0 => 0.0,
        r if r == 180.0 => -1.0,
        _ => r.to_radians().cos(),
    }
}

/// Sine of an angle in degrees, exact at multiples of 90°.
pub fn sind(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    match r {
        r if r == 0.0 || r == 180.0 => 0.0,
        r if r == 90.0 => 1.0,
        r if r == 270.0 => -1.0,
        _ => r.to_radians().sin(),
    }
}

/// Direction the wind travels *towards*, in degrees counter-clockwise from `+x`.
pub fn flow_heading(wind_direction: f64) -> f64 {
    (270.0 - wind_direction).rem_euclid(360.0)
}

/// Unit vector along which the wind travels.
pub fn flow_unit(wind_direction: f64) -> [f64; 2] {
    let h = flow_heading(wind_direction);
    [cosd(h), sind(h)]
}

/// Tabulated coefficient curve, linearly interpolated and clamped at the ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub speeds: Vec<f64>,
    pub values: Vec<f64>,
}

impl Curve {
    pub fn new(speeds: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let curve = Self { speeds, values };
        curve.validate()?;
        Ok(curve)
    }

    fn validate(&self) -> Result<()> {
        if self.speeds.is_empty() || self.speeds.len() != self.values.len() {
            return Err(FarmError::InvalidTurbine(
                "curve needs matching, non-empty speed and value columns".into(),
            ));
        }
        if self.speeds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FarmError::InvalidTurbine(
                "curve speeds must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    pub fn eval(&self, speed: f64) -> f64 {
        let s = &self.speeds;
        let v = &self.values;
        if speed <= s[0] {
            return v[0];
        }
        if speed >= s[s.len() - 1] {
            return v[v.len() - 1];
        }
        let hi = s.partition_point(|&x| x <= speed);
        let lo = hi - 1;
        let t = (speed - s[lo]) / (s[hi] - s[lo]);
        v[lo] + t * (v[hi] - v[lo])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurbineSpec {
    pub rotor_diameter: f64,
    pub hub_height: f64,
    pub cut_in: f64,
    pub cut_out: f64,
    pub ct_curve: Curve,
    pub cp_curve: Curve,
    /// deg/s
    pub yaw_rate_limit: f64,
    #[serde(default = "default_wohler_blade")]
    pub wohler_blade: f64,
    #[serde(default = "default_wohler_tower")]
    pub wohler_tower: f64,
    /// η₀ in the yaw power correction η(γ) = η₀ / cos γ.
    #[serde(default = "default_power_scaling")]
    pub power_scaling: f64,
    /// Cap on the unyawed aerodynamic power, W. Keeps the curve flat above
    /// rated between C_P nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rated_power: Option<f64>,
}

fn default_wohler_blade() -> f64 {
    10.0
}
fn default_wohler_tower() -> f64 {
    4.0
}
fn default_power_scaling() -> f64 {
    1.08
}

/// Rated speed of the bundled 10 MW-class reference machine.
const REFERENCE_RATED_SPEED: f64 = 11.4;
const REFERENCE_CP_MAX: f64 = 0.44;

impl TurbineSpec {
    /// 10 MW-class reference machine: 178.3 m rotor, 119 m hub.
    ///
    /// Region 2 runs at a flat C_P of 0.44 up to 11.4 m/s; above that the
    /// C_P nodes hold the rated power (at ρ = 1.225 kg/m³) constant.
    pub fn reference_10mw() -> Self {
        let d: f64 = 178.3;
        let half_rho_a = 0.5 * 1.225 * std::f64::consts::PI * (d / 2.0).powi(2);
        let rated_power = half_rho_a * REFERENCE_CP_MAX * REFERENCE_RATED_SPEED.powi(3);
        let region2 = [
            (4.0, 0.40),
            (5.0, 0.43),
            (6.0, 0.44),
            (7.0, 0.44),
            (8.0, 0.44),
        ];
        let mut cp_speeds: Vec<f64> = region2.iter().map(|p| p.0).collect();
        let mut cp_values: Vec<f64> = region2.iter().map(|p| p.1).collect();
        for u in [9.0, 10.0, 11.0] {
            cp_speeds.push(u);
            cp_values.push(REFERENCE_CP_MAX);
        }
        for u in [
            11.4, 11.7, 12.0, 12.5, 13.0, 14.0, 15.0, 17.0, 19.0, 21.0, 23.0, 25.0,
        ] {
            cp_speeds.push(u);
            cp_values.push(rated_power / (half_rho_a * u * u * u));
        }
        let ct = [
            (4.0, 0.82),
            (5.0, 0.81),
            (6.0, 0.80),
            (11.0, 0.80),
            (11.4, 0.78),
            (12.0, 0.65),
            (13.0, 0.52),
            (14.0, 0.43),
            (15.0, 0.36),
            (17.0, 0.26),
            (19.0, 0.20),
            (21.0, 0.155),
            (23.0, 0.125),
            (25.0, 0.10),
        ];
        Self {
            rotor_diameter: d,
            hub_height: 119.0,
            cut_in: 4.0,
            cut_out: 25.0,
            ct_curve: Curve {
                speeds: ct.iter().map(|p| p.0).collect(),
                values: ct.iter().map(|p| p.1).collect(),
            },
            cp_curve: Curve {
                speeds: cp_speeds,
                values: cp_values,
            },
            yaw_rate_limit: 10.0,
            wohler_blade: default_wohler_blade(),
            wohler_tower: default_wohler_tower(),
            power_scaling: default_power_scaling(),
            rated_power: Some(rated_power),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(FarmError::InvalidTurbine(m.to_string()));
        if !(self.rotor_diameter > 0.0) {
            return bad("rotor diameter must be positive");
        }
        if !(self.hub_height > self.rotor_diameter / 2.0) {
            return bad("hub height must exceed the rotor radius");
        }
        if !(self.cut_in < self.cut_out) {
            return bad("cut-in must be below cut-out");
        }
        if !(self.yaw_rate_limit > 0.0) {
            return bad("yaw rate limit must be positive");
        }
        self.ct_curve.validate()?;
        self.cp_curve.validate()?;
        if self
            .ct_curve
            .values
            .iter()
            .any(|&c| !(0.0..1.0).contains(&c))
        {
            return bad("C_T must lie in [0, 1)");
        }
        if self
            .cp_curve
            .values
            .iter()
            .any(|&c| !(c > 0.0 && c < 16.0 / 27.0))
        {
            return bad("C_P must lie in (0, 16/27)");
        }
        if self.rated_power.is_some_and(|p| !(p > 0.0)) {
            return bad("rated power must be positive");
        }
        Ok(())
    }

    pub fn rotor_area(&self) -> f64 {
        std::f64::consts::PI * (self.rotor_diameter / 2.0).powi(2)
    }

    pub fn ct(&self, speed: f64) -> f64 {
        self.ct_curve.eval(speed)
    }

    pub fn cp(&self, speed: f64) -> f64 {
        self.cp_curve.eval(speed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarmLayout {
    pub positions: Vec<[f64; 2]>,
    /// Accumulated counter-clockwise rotation applied to the layout, degrees.
    #[serde(default)]
    pub farm_rotation: f64,
}

impl FarmLayout {
    pub fn new(positions: Vec<[f64; 2]>) -> Self {
        Self {
            positions,
            farm_rotation: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Rectangular grid with `rows` rows along `y` and `cols` columns along
    /// `x`, numbered left to right then bottom to top.
    pub fn grid(rows: usize, cols: usize, dx: f64, dy: f64) -> Self {
        let mut positions = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                positions.push([c as f64 * dx, r as f64 * dy]);
            }
        }
        Self::new(positions)
    }

    /// 32-turbine reference plant: four rows of eight turbines at 5 D
    /// spacing, numbered from the bottom-left corner.
    pub fn reference_32(rotor_diameter: f64) -> Self {
        Self::grid(4, 8, 5.0 * rotor_diameter, 5.0 * rotor_diameter)
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.positions.len().max(1) as f64;
        let (sx, sy) = self
            .positions
            .iter()
            .fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
        [sx / n, sy / n]
    }

    pub fn validate(&self, rotor_diameter: f64) -> Result<()> {
        if self.positions.is_empty() {
            return Err(FarmError::InvalidLayout("no turbines".into()));
        }
        for i in 0..self.positions.len() {
            for j in (i + 1)..self.positions.len() {
                let d = distance(self.positions[i], self.positions[j]);
                if d < rotor_diameter * (1.0 - 1e-9) {
                    return Err(FarmError::InvalidLayout(format!(
                        "turbines {i} and {j} are {d:.1} m apart, closer than one rotor diameter"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Rotate every position counter-clockwise by `delta` degrees about `center`.
pub fn rotate_about(layout: &FarmLayout, delta: f64, center: [f64; 2]) -> FarmLayout {
    let (c, s) = (cosd(delta), sind(delta));
    let positions = layout
        .positions
        .iter()
        .map(|p| {
            let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
            [center[0] + c * dx - s * dy, center[1] + s * dx + c * dy]
        })
        .collect();
    FarmLayout {
        positions,
        farm_rotation: layout.farm_rotation + delta,
    }
}

/// Rotate the layout counter-clockwise by `delta` degrees about its centroid.
pub fn rotate_layout(layout: &FarmLayout, delta: f64) -> FarmLayout {
    rotate_about(layout, delta, layout.centroid())
}

/// Turbine indices sorted upstream-first for the given wind direction.
///
/// Streamwise coordinates are rounded to the micrometre so that turbines in
/// the same cross-wind row tie exactly and fall back to index order.
pub fn downstream_order(layout: &FarmLayout, wind_direction: f64) -> Vec<usize> {
    let e = flow_unit(wind_direction);
    let mut keyed: Vec<(i64, usize)> = layout
        .positions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let s = p[0] * e[0] + p[1] * e[1];
            ((s * 1e6).round() as i64, i)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientState {
    /// U_b, m/s
    pub background_speed: f64,
    /// Meteorological wind direction, degrees.
    pub wind_direction: f64,
    /// Ambient turbulence intensity as a fraction.
    pub ambient_ti: f64,
    #[serde(default = "default_density")]
    pub air_density: f64,
}

fn default_density() -> f64 {
    1.225
}

impl AmbientState {
    pub fn new(background_speed: f64, wind_direction: f64, ambient_ti: f64) -> Self {
        Self {
            background_speed,
            wind_direction: wind_direction.rem_euclid(360.0),
            ambient_ti,
            air_density: default_density(),
        }
    }

    pub fn with_speed(self, background_speed: f64) -> Self {
        Self {
            background_speed,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(FarmError::InvalidAmbient(m.to_string()));
        if !(self.background_speed >= 0.0) {
            return bad("background speed must be non-negative");
        }
        if !(0.0..360.0).contains(&self.wind_direction) {
            return bad("wind direction must lie in [0, 360)");
        }
        if !(self.ambient_ti > 0.0 && self.ambient_ti < 1.0) {
            return bad("turbulence intensity must lie in (0, 1)");
        }
        if !(self.air_density > 0.0) {
            return bad("air density must be positive");
        }
        Ok(())
    }
}

/// Optimizer bound on yaw set points, degrees.
pub const YAW_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlState {
    /// Yaw misalignment per turbine, degrees.
    pub yaw: Vec<f64>,
    /// Pitch offset per turbine, degrees. Only carried for load lookups.
    pub pitch_offset: Vec<f64>,
    pub availability: Vec<bool>,
}

impl ControlState {
    pub fn greedy(n: usize) -> Self {
        Self {
            yaw: vec![0.0; n],
            pitch_offset: vec![0.0; n],
            availability: vec![true; n],
        }
    }

    pub fn with_yaw(yaw: Vec<f64>) -> Self {
        let n = yaw.len();
        Self {
            yaw,
            pitch_offset: vec![0.0; n],
            availability: vec![true; n],
        }
    }

    pub fn len(&self) -> usize {
        self.yaw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.yaw.is_empty()
    }
}

/// Time-averaged SCADA-style measurements over one sampling window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementWindow {
    /// Window length, s.
    pub t_s: f64,
    /// W
    pub mean_power: Vec<f64>,
    /// deg
    pub mean_yaw: Vec<f64>,
    /// Fraction of samples with the turbine reporting, in [0, 1].
    pub completeness: Vec<f64>,
}

impl MeasurementWindow {
    pub fn len(&self) -> usize {
        self.mean_power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean_power.is_empty()
    }
}
