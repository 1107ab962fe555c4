//! Single-turbine yawed Gaussian wake.
//!
//! All lengths are in metres; angles in degrees at the public surface.

use serde::{Deserialize, Serialize};

use crate::error::{FarmError, Result};
use crate::farm::cosd;

/// Calibration vector κ = [k_a, k_b, α, β].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WakeParams {
    pub k_a: f64,
    pub k_b: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for WakeParams {
    /// Linear TI fit for the expansion rate and the classic near-wake
    /// constants α = 2.32, β = 0.154.
    fn default() -> Self {
        Self {
            k_a: 0.38,
            k_b: 0.004,
            alpha: 2.32,
            beta: 0.154,
        }
    }
}

impl WakeParams {
    pub fn to_array(self) -> [f64; 4] {
        [self.k_a, self.k_b, self.alpha, self.beta]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            k_a: a[0],
            k_b: a[1],
            alpha: a[2],
            beta: a[3],
        }
    }

    pub fn norm_sq(self) -> f64 {
        self.to_array().iter().map(|v| v * v).sum()
    }
}

/// Per-turbine wake state at the current operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalWakeState {
    pub k_w: f64,
    /// m
    pub x0: f64,
    pub ct: f64,
    /// deg
    pub yaw: f64,
    pub i_rotor: f64,
}

/// k_w = k_a · I_rotor + k_b.
pub fn wake_expansion(i_rotor: f64, params: &WakeParams) -> Result<f64> {
    let k_w = params.k_a * i_rotor + params.k_b;
    if k_w > 0.0 && k_w.is_finite() {
        Ok(k_w)
    } else {
        Err(FarmError::NonPositiveExpansion(k_w))
    }
}

/// Onset of the far wake, metres downstream of the rotor.
pub fn near_wake_length(
    ct: f64,
    yaw: f64,
    i_rotor: f64,
    alpha: f64,
    beta: f64,
    d: f64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&ct) {
        return Err(FarmError::InvalidParameter(format!(
            "thrust coefficient {ct} outside [0, 1)"
        )));
    }
    let root = (1.0 - ct).sqrt();
    let radicand = 2.0 * (4.0 * alpha * i_rotor + 2.0 * beta * (1.0 - root));
    if !(radicand > 0.0) {
        return Err(FarmError::InvalidParameter(format!(
            "near-wake radicand {radicand} is not positive"
        )));
    }
    Ok(d * cosd(yaw) * (1.0 + root) / radicand.sqrt())
}

/// ln(1 + e^t) without overflow.
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 30.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Lateral and vertical wake widths (σ_y, σ_z) at `x` metres downstream.
pub fn wake_widths(x: f64, yaw: f64, k_w: f64, x0: f64, d: f64) -> (f64, f64) {
    let growth = k_w * softplus((x - x0) / d);
    (d * (0.35 * cosd(yaw) + growth), d * (0.35 + growth))
}

/// Initial wake skew angle θ_c0 in radians.
fn skew_angle(yaw: f64, ct: f64) -> f64 {
    let c = cosd(yaw);
    0.3 * yaw.to_radians() / c * (1.0 - (1.0 - ct * c).sqrt())
}

/// Lateral deflection of the wake centre at `x` metres downstream.
///
/// Linear inside the near wake, logarithmic growth beyond `x0`, continuous
/// at `x0`. The sign follows the yaw angle.
#[allow(clippy::too_many_arguments)]
pub fn deflection(
    x: f64,
    yaw: f64,
    ct: f64,
    k_w: f64,
    x0: f64,
    sigma_y: f64,
    sigma_z: f64,
    d: f64,
) -> f64 {
    let c = cosd(yaw);
    if x <= 0.0 || ct <= 0.0 || yaw == 0.0 || c <= 1e-12 {
        return 0.0;
    }
    let theta = skew_angle(yaw, ct);
    if x <= x0 {
        return x * theta.tan();
    }
    let sqrt_ct = ct.sqrt();
    let log_term = |sy: f64, sz: f64| {
        let s = (8.0 * sy * sz / (d * d * c)).sqrt();
        ((1.6 * s - sqrt_ct) / (1.6 * s + sqrt_ct)).ln()
    };
    let (sy0, sz0) = wake_widths(x0, yaw, k_w, x0, d);
    let amplitude = theta / 14.7 * (c / ct).sqrt() / k_w * (2.9 + 1.3 * (1.0 - ct).sqrt() - ct);
    x0 * theta.tan() + amplitude * d * (log_term(sigma_y, sigma_z) - log_term(sy0, sz0))
}

/// Centreline amplitude of the deficit, and whether the radicand had to be
/// clamped because the local widths are too small for the thrust.
pub fn deficit_amplitude(ct: f64, yaw: f64, sigma_y: f64, sigma_z: f64, d: f64) -> (f64, bool) {
    let ratio = ct * cosd(yaw) / (8.0 * sigma_y * sigma_z / (d * d));
    if ratio > 1.0 {
        (1.0, true)
    } else {
        (1.0 - (1.0 - ratio).sqrt(), false)
    }
}

/// Fractional velocity deficit at (y, z) in the wake frame.
///
/// Returns the deficit and the clamp flag from [`deficit_amplitude`].
#[allow(clippy::too_many_arguments)]
pub fn deficit(
    y: f64,
    z: f64,
    yaw: f64,
    ct: f64,
    sigma_y: f64,
    sigma_z: f64,
    delta: f64,
    hub_height: f64,
    d: f64,
) -> (f64, bool) {
    let (amp, clamped) = deficit_amplitude(ct, yaw, sigma_y, sigma_z, d);
    let gz = (z - hub_height) / sigma_z;
    let gy = (y - delta) / sigma_y;
    (amp * (-0.5 * (gz * gz + gy * gy)).exp(), clamped)
}

/// Crespo-Hernández added turbulence `x` metres behind a rotor.
pub fn crespo_added(ct: f64, ambient_ti: f64, x: f64, d: f64) -> f64 {
    if ct <= 0.0 || x <= 0.0 {
        return 0.0;
    }
    let a = (1.0 - (1.0 - ct).sqrt()) / 2.0;
    0.73 * a.powf(0.8325) * ambient_ti.powf(0.0325) * (x / d).powf(-0.32)
}

/// Rotor turbulence intensity from ambient plus one added contribution.
pub fn added_turbulence(ct: f64, ambient_ti: f64, x: f64, d: f64) -> f64 {
    let added = crespo_added(ct, ambient_ti, x, d);
    ambient_ti.hypot(added)
}
