//! Background wind-speed estimation from the powers of unwaked turbines.

use crate::error::{FarmError, Result};
use crate::farm::{ControlState, MeasurementWindow};
use crate::flow::{FarmModel, ThrustMode};
use crate::search::golden_section;

/// Rotor-averaged deficit below which a turbine counts as unwaked.
pub const UPSTREAM_THRESHOLD: f64 = 1e-3;

/// Available turbines whose modeled rotor-averaged deficit is below
/// [`UPSTREAM_THRESHOLD`] with every turbine at zero yaw.
pub fn upstream_set(model: &FarmModel, availability: &[bool]) -> Result<Vec<usize>> {
    let n = model.len();
    let control = ControlState {
        yaw: vec![0.0; n],
        pitch_offset: vec![0.0; n],
        availability: availability.to_vec(),
    };
    let mut probe = model.clone();
    // Deficits are relative, so any speed inside the operating range will do.
    let ambient = model.ambient();
    let reference = if ambient.background_speed > 0.0 {
        ambient.background_speed
    } else {
        0.5 * (model.spec.cut_in + model.spec.cut_out)
    };
    probe.set_background_speed(reference);
    let sol = probe.solve(&control, &ThrustMode::FromInflow)?;
    let set: Vec<usize> = (0..n)
        .filter(|&i| availability[i] && 1.0 - sol.inflow[i] / reference < UPSTREAM_THRESHOLD)
        .collect();
    if set.is_empty() {
        return Err(FarmError::Estimation("no unwaked turbine available".into()));
    }
    Ok(set)
}

/// Background speed minimizing the mean squared mismatch between measured
/// and modeled powers of the turbines in `upstream`, searched on
/// [cut_in, cut_out] by golden section to 1e-3 m/s.
pub fn estimate_background(
    window: &MeasurementWindow,
    model: &FarmModel,
    upstream: &[usize],
    availability: &[bool],
) -> Result<f64> {
    if upstream.is_empty() {
        return Err(FarmError::Estimation("empty upstream set".into()));
    }
    if upstream.iter().all(|&i| window.mean_power[i] <= 0.0) {
        return Err(FarmError::Estimation(
            "all upstream turbines report zero power".into(),
        ));
    }
    let n = model.len();
    let control = ControlState {
        yaw: window.mean_yaw.clone(),
        pitch_offset: vec![0.0; n],
        availability: availability.to_vec(),
    };
    let mut probe = model.clone();
    let mismatch = |u: f64, probe: &mut FarmModel| -> f64 {
        probe.set_background_speed(u);
        match probe.solve(&control, &ThrustMode::FromInflow) {
            Ok(sol) => {
                upstream
                    .iter()
                    .map(|&i| ((window.mean_power[i] - sol.power[i]) * 1e-6).powi(2))
                    .sum::<f64>()
                    / upstream.len() as f64
            }
            Err(_) => f64::INFINITY,
        }
    };
    let spec = &model.spec;
    Ok(golden_section(
        |u| mismatch(u, &mut probe),
        spec.cut_in,
        spec.cut_out,
        1e-3,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farm::{AmbientState, FarmLayout, TurbineSpec};
    use crate::flow::ModelOptions;
    use crate::wake::WakeParams;

    fn model(positions: Vec<[f64; 2]>) -> FarmModel {
        FarmModel::new(
            TurbineSpec::reference_10mw(),
            FarmLayout::new(positions),
            AmbientState::new(9.4, 270.0, 0.06),
            WakeParams::default(),
            ModelOptions::default(),
        )
    }

    #[test]
    fn single_and_pair() {
        assert_eq!(
            upstream_set(&model(vec![[0.0, 0.0]]), &[true]).unwrap(),
            vec![0]
        );
        let m = model(vec![[900.0, 0.0], [0.0, 0.0]]);
        assert_eq!(upstream_set(&m, &[true, true]).unwrap(), vec![1]);
        assert!(upstream_set(&m, &[true, false]).is_ok());
        assert!(upstream_set(&m, &[false, false]).is_err());
    }

    #[test]
    fn zero_powers_rejected() {
        let m = model(vec![[0.0, 0.0]]);
        let w = MeasurementWindow {
            t_s: 600.0,
            mean_power: vec![0.0],
            mean_yaw: vec![0.0],
            completeness: vec![1.0],
        };
        assert!(estimate_background(&w, &m, &[0], &[true]).is_err());
    }
}
