//! Farm flow field by recursive wake merging, rotor-averaged inflow and power.
//!
//! Turbines are visited upstream-first. Each turbine's wake removes part of
//! the velocity component along its rotor normal and leaves the in-plane
//! component untouched, so yawed rotors also turn the carrying flow.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{FarmError, Result};
use crate::farm::{
    cosd, downstream_order, flow_heading, sind, AmbientState, ControlState, FarmLayout, TurbineSpec,
};
use crate::wake::{
    crespo_added, deficit_amplitude, deflection, near_wake_length, wake_expansion, wake_widths,
    LocalWakeState, WakeParams,
};

/// Quadrature over the rotor disc: offsets (lateral, vertical) from the hub
/// in metres, with weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct RotorSample {
    pub offsets: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl RotorSample {
    /// 16 points on two equal-area rings (r = R/2 and R·√3/2), eight per
    /// ring, the outer ring rotated by 22.5°. Uniform weights.
    pub fn equal_area_16(rotor_diameter: f64) -> Self {
        let r = rotor_diameter / 2.0;
        let mut offsets = Vec::with_capacity(16);
        for (radius, phase) in [(r * 0.25f64.sqrt(), 0.0), (r * 0.75f64.sqrt(), 22.5)] {
            for k in 0..8 {
                let a = phase + 45.0 * k as f64;
                offsets.push([radius * cosd(a), radius * sind(a)]);
            }
        }
        Self {
            weights: vec![1.0 / 16.0; 16],
            offsets,
        }
    }

    /// Dense Cartesian sampling of the disc, for reference averages.
    pub fn dense(rotor_diameter: f64, per_axis: usize) -> Self {
        let r = rotor_diameter / 2.0;
        let h = 2.0 * r / per_axis as f64;
        let mut offsets = Vec::new();
        for i in 0..per_axis {
            for j in 0..per_axis {
                let a = -r + (i as f64 + 0.5) * h;
                let b = -r + (j as f64 + 0.5) * h;
                if a * a + b * b <= r * r {
                    offsets.push([a, b]);
                }
            }
        }
        let n = offsets.len();
        Self {
            offsets,
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Sample points in farm coordinates for a rotor at `hub` facing the
    /// ambient wind direction.
    pub fn points(&self, hub: [f64; 2], hub_height: f64, wind_direction: f64) -> Vec<[f64; 3]> {
        let h = flow_heading(wind_direction);
        let lateral = [sind(h), -cosd(h)];
        self.offsets
            .iter()
            .map(|o| {
                [
                    hub[0] + o[0] * lateral[0],
                    hub[1] + o[0] * lateral[1],
                    hub_height + o[1],
                ]
            })
            .collect()
    }
}

/// Weighted mean of `speed` over the sample points.
pub fn rotor_average(
    sample: &RotorSample,
    points: &[[f64; 3]],
    speed: impl Fn([f64; 3]) -> f64,
) -> f64 {
    sample
        .weights
        .iter()
        .zip(points)
        .map(|(w, p)| w * speed(*p))
        .sum()
}

/// Orientation of a turbine's rotor normal, degrees: atan2(V, U) + γ.
pub fn turbine_orientation(u: f64, v: f64, yaw: f64) -> Result<f64> {
    if u == 0.0 && v == 0.0 {
        return Err(FarmError::ZeroVelocity);
    }
    Ok(v.atan2(u).to_degrees() + yaw)
}

/// Electrical power of one turbine, W.
///
/// Cosine-cubed yaw loss; with `apply_eta` the result is further scaled by
/// η(γ) = η₀ / cos γ. The unyawed power is capped at the rated power when
/// the spec has one. Zero outside [cut_in, cut_out].
pub fn turbine_power(
    speed: f64,
    yaw: f64,
    spec: &TurbineSpec,
    density: f64,
    apply_eta: bool,
) -> f64 {
    if speed < spec.cut_in || speed > spec.cut_out {
        return 0.0;
    }
    let c = cosd(yaw);
    let mut p = 0.5 * density * spec.rotor_area() * spec.cp(speed) * speed.powi(3);
    if let Some(rated) = spec.rated_power {
        p = p.min(rated);
    }
    p *= c.powi(3);
    if apply_eta {
        p *= spec.power_scaling / c;
    }
    p
}

/// One turbine's wake as placed in the recursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurbineWake {
    pub hub: [f64; 2],
    pub hub_height: f64,
    pub rotor_diameter: f64,
    /// Heading of the local inflow at the hub, degrees.
    pub flow_heading: f64,
    pub state: LocalWakeState,
    /// Amplitude exponent; 1 is the plain Gaussian model.
    pub deficit_exponent: f64,
}

/// Wake quantities at one point in a turbine's wake frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WakeSample {
    /// Downstream distance, m.
    pub x: f64,
    /// Lateral offset to the right of the inflow, m.
    pub y: f64,
    pub sigma_y: f64,
    pub sigma_z: f64,
    pub delta: f64,
    pub amplitude: f64,
    pub deficit: f64,
    pub clamped: bool,
}

impl TurbineWake {
    /// Wake-frame coordinates (X downstream, Y to the right of the inflow).
    pub fn frame(&self, p: [f64; 3]) -> (f64, f64, f64) {
        let (c, s) = (cosd(self.flow_heading), sind(self.flow_heading));
        let dx = p[0] - self.hub[0];
        let dy = p[1] - self.hub[1];
        (dx * c + dy * s, dx * s - dy * c, p[2])
    }

    pub fn sample(&self, p: [f64; 3]) -> Option<WakeSample> {
        let (x, y, z) = self.frame(p);
        let st = &self.state;
        if x <= 0.0 || st.ct <= 0.0 {
            return None;
        }
        let d = self.rotor_diameter;
        let (sigma_y, sigma_z) = wake_widths(x, st.yaw, st.k_w, st.x0, d);
        let delta = deflection(x, st.yaw, st.ct, st.k_w, st.x0, sigma_y, sigma_z, d);
        let (amp, clamped) = deficit_amplitude(st.ct, st.yaw, sigma_y, sigma_z, d);
        let amplitude = if self.deficit_exponent == 1.0 {
            amp
        } else {
            amp.powf(self.deficit_exponent)
        };
        let gz = (z - self.hub_height) / sigma_z;
        let gy = (y - delta) / sigma_y;
        Some(WakeSample {
            x,
            y,
            sigma_y,
            sigma_z,
            delta,
            amplitude,
            deficit: amplitude * (-0.5 * (gz * gz + gy * gy)).exp(),
            clamped,
        })
    }

    /// One step of the merging recursion at point `p`.
    pub fn apply(&self, u: [f64; 2], p: [f64; 3]) -> ([f64; 2], bool) {
        let Some(s) = self.sample(p) else {
            return (u, false);
        };
        let theta = self.flow_heading + self.state.yaw;
        let n = [cosd(theta), sind(theta)];
        let t = [-n[1], n[0]];
        let un = (u[0] * n[0] + u[1] * n[1]) * (1.0 - s.deficit);
        let ut = u[0] * t[0] + u[1] * t[1];
        ([un * n[0] + ut * t[0], un * n[1] + ut * t[1]], s.clamped)
    }
}

/// Planar velocity field U(x) built from the background flow and the
/// placed wakes, in recursion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowField {
    pub background: [f64; 2],
    pub wakes: Vec<TurbineWake>,
}

impl FlowField {
    pub fn velocity(&self, p: [f64; 3]) -> [f64; 2] {
        self.velocity_upto(p, self.wakes.len())
    }

    /// Recursion state after the first `n` wakes.
    pub fn velocity_upto(&self, p: [f64; 3], n: usize) -> [f64; 2] {
        self.wakes[..n]
            .iter()
            .fold(self.background, |u, w| w.apply(u, p).0)
    }

    pub fn speed(&self, p: [f64; 3]) -> f64 {
        let u = self.velocity(p);
        u[0].hypot(u[1])
    }

    /// CSV grid of speed magnitude at height `z`, columns `x,y,speed`.
    pub fn raster_csv(&self, x: (f64, f64), y: (f64, f64), nx: usize, ny: usize, z: f64) -> String {
        let mut out = String::from("x,y,speed\n");
        for j in 0..ny {
            for i in 0..nx {
                let px = x.0 + (x.1 - x.0) * i as f64 / (nx.max(2) - 1) as f64;
                let py = y.0 + (y.1 - y.0) * j as f64 / (ny.max(2) - 1) as f64;
                let _ = writeln!(out, "{px:.3},{py:.3},{:.6}", self.speed([px, py, z]));
            }
        }
        out
    }
}

/// How each turbine's thrust coefficient is chosen during a solve.
#[derive(Debug, Clone, PartialEq)]
pub enum ThrustMode {
    /// C_T looked up at the rotor-averaged inflow of the current iterate.
    FromInflow,
    /// Fixed per-turbine values, indexed like the layout.
    Frozen(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    pub apply_eta: bool,
    pub deficit_exponent: f64,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            apply_eta: true,
            deficit_exponent: 1.0,
        }
    }
}

/// Single impinging wake as seen by a downstream rotor (load-table inputs).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InflowWake {
    /// Peak deficit of the dominant upstream wake.
    pub depth: f64,
    /// (σ_y + σ_z) / D.
    pub width: f64,
    /// Wake centre relative to the rotor, in diameters.
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarmSolution {
    pub order: Vec<usize>,
    pub states: Vec<LocalWakeState>,
    /// Rotor-averaged inflow from the upstream-only field, m/s.
    pub upstream_inflow: Vec<f64>,
    /// Rotor-averaged inflow of the full field, m/s.
    pub inflow: Vec<f64>,
    pub power: Vec<f64>,
    pub orientation: Vec<f64>,
    pub inflow_wake: Vec<InflowWake>,
    pub field: FlowField,
    /// Number of deficit evaluations that had to clamp the amplitude.
    pub clamped: usize,
}

impl FarmSolution {
    pub fn farm_power(&self) -> f64 {
        self.power.iter().sum()
    }
}

/// Analytical farm model bound to one layout and wind direction.
#[derive(Debug, Clone)]
pub struct FarmModel {
    pub spec: TurbineSpec,
    pub layout: FarmLayout,
    ambient: AmbientState,
    pub params: WakeParams,
    pub options: ModelOptions,
    sample: RotorSample,
    order: Vec<usize>,
    /// Per turbine: quadrature points followed by the hub point.
    points: Vec<Vec<[f64; 3]>>,
}

impl FarmModel {
    pub fn new(
        spec: TurbineSpec,
        layout: FarmLayout,
        ambient: AmbientState,
        params: WakeParams,
        options: ModelOptions,
    ) -> Self {
        let sample = RotorSample::equal_area_16(spec.rotor_diameter);
        let mut model = Self {
            spec,
            layout,
            ambient,
            params,
            options,
            sample,
            order: Vec::new(),
            points: Vec::new(),
        };
        model.rebuild_geometry();
        model
    }

    fn rebuild_geometry(&mut self) {
        let dir = self.ambient.wind_direction;
        self.order = downstream_order(&self.layout, dir);
        self.points = self
            .layout
            .positions
            .iter()
            .map(|&hub| {
                let mut pts = self.sample.points(hub, self.spec.hub_height, dir);
                pts.push([hub[0], hub[1], self.spec.hub_height]);
                pts
            })
            .collect();
    }

    pub fn ambient(&self) -> AmbientState {
        self.ambient
    }

    pub fn set_ambient(&mut self, ambient: AmbientState) {
        let redo = ambient.wind_direction != self.ambient.wind_direction;
        self.ambient = ambient;
        if redo {
            self.rebuild_geometry();
        }
    }

    pub fn set_background_speed(&mut self, speed: f64) {
        self.ambient.background_speed = speed;
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn rotor_points(&self, turbine: usize) -> &[[f64; 3]] {
        let pts = &self.points[turbine];
        &pts[..pts.len() - 1]
    }

    pub fn sample(&self) -> &RotorSample {
        &self.sample
    }

    pub fn len(&self) -> usize {
        self.layout.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layout.is_empty()
    }

    pub fn solve(&self, control: &ControlState, thrust: &ThrustMode) -> Result<FarmSolution> {
        let n = self.layout.len();
        let d = self.spec.rotor_diameter;
        let amb = self.ambient;
        let h = flow_heading(amb.wind_direction);
        let background = [
            amb.background_speed * cosd(h),
            amb.background_speed * sind(h),
        ];
        let mut vel: Vec<Vec<[f64; 2]>> = self
            .points
            .iter()
            .map(|p| vec![background; p.len()])
            .collect();
        let nq = self.sample.len();
        let mut states = vec![
            LocalWakeState {
                k_w: 0.0,
                x0: 0.0,
                ct: 0.0,
                yaw: 0.0,
                i_rotor: amb.ambient_ti,
            };
            n
        ];
        let mut upstream_inflow = vec![0.0; n];
        let mut orientation = vec![0.0; n];
        let mut inflow_wake = vec![InflowWake::default(); n];
        let mut wakes: Vec<TurbineWake> = Vec::with_capacity(n);
        let mut clamped = 0usize;

        for &i in &self.order {
            let hub_pt = self.points[i][nq];
            let u_hub = vel[i][nq];
            let speed_up: f64 = self
                .sample
                .weights
                .iter()
                .zip(&vel[i][..nq])
                .map(|(w, u)| w * u[0].hypot(u[1]))
                .sum();
            upstream_inflow[i] = speed_up;
            let yaw = control.yaw[i];
            let available = control.availability[i];
            let heading = if u_hub[0] == 0.0 && u_hub[1] == 0.0 {
                h
            } else {
                u_hub[1].atan2(u_hub[0]).to_degrees()
            };
            orientation[i] = heading + yaw;

            let ct = if !available {
                0.0
            } else {
                match thrust {
                    ThrustMode::FromInflow => self.spec.ct(speed_up),
                    ThrustMode::Frozen(v) => v[i],
                }
            };

            // Added turbulence and the dominant impinging wake.
            let mut added: f64 = 0.0;
            let mut dominant = (0.0, InflowWake::default());
            for w in &wakes {
                if let Some(s) = w.sample(hub_pt) {
                    let gy = (s.y - s.delta) / s.sigma_y;
                    let overlap = (-0.5 * gy * gy).exp();
                    added = added.max(overlap * crespo_added(w.state.ct, amb.ambient_ti, s.x, d));
                    if s.deficit > dominant.0 {
                        dominant = (
                            s.deficit,
                            InflowWake {
                                depth: s.amplitude,
                                width: (s.sigma_y + s.sigma_z) / d,
                                center: (s.delta - s.y) / d,
                            },
                        );
                    }
                }
            }
            inflow_wake[i] = dominant.1;
            let i_rotor = amb.ambient_ti.hypot(added);
            let k_w = wake_expansion(i_rotor, &self.params)?;
            let x0 = near_wake_length(ct, yaw, i_rotor, self.params.alpha, self.params.beta, d)?;
            states[i] = LocalWakeState {
                k_w,
                x0,
                ct,
                yaw,
                i_rotor,
            };
            let wake = TurbineWake {
                hub: self.layout.positions[i],
                hub_height: self.spec.hub_height,
                rotor_diameter: d,
                flow_heading: heading,
                state: states[i],
                deficit_exponent: self.options.deficit_exponent,
            };
            if ct > 0.0 {
                for (j, (pts, vs)) in self.points.iter().zip(vel.iter_mut()).enumerate() {
                    // A rotor never sits in its own wake, even when the local
                    // flow is turned relative to the disc orientation.
                    if j == i {
                        continue;
                    }
                    for (p, u) in pts.iter().zip(vs.iter_mut()) {
                        let (next, flag) = wake.apply(*u, *p);
                        *u = next;
                        clamped += flag as usize;
                    }
                }
            }
            wakes.push(wake);
        }

        let inflow: Vec<f64> = vel
            .iter()
            .map(|vs| {
                self.sample
                    .weights
                    .iter()
                    .zip(&vs[..nq])
                    .map(|(w, u)| w * u[0].hypot(u[1]))
                    .sum()
            })
            .collect();
        let power = (0..n)
            .map(|i| {
                if control.availability[i] {
                    turbine_power(
                        inflow[i],
                        control.yaw[i],
                        &self.spec,
                        amb.air_density,
                        self.options.apply_eta,
                    )
                } else {
                    0.0
                }
            })
            .collect();

        Ok(FarmSolution {
            order: self.order.clone(),
            states,
            upstream_inflow,
            inflow,
            power,
            orientation,
            inflow_wake,
            field: FlowField { background, wakes },
            clamped,
        })
    }

    /// Thrust coefficients at the greedy operating point, for freezing.
    pub fn greedy_thrust(&self, availability: &[bool]) -> Result<Vec<f64>> {
        let control = ControlState {
            yaw: vec![0.0; self.len()],
            pitch_offset: vec![0.0; self.len()],
            availability: availability.to_vec(),
        };
        let sol = self.solve(&control, &ThrustMode::FromInflow)?;
        Ok(sol.states.iter().map(|s| s.ct).collect())
    }
}
