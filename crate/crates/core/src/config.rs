//! File formats: TOML farm and state files, layout and measurement CSVs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FarmError, Result};
use crate::farm::{AmbientState, FarmLayout, MeasurementWindow, TurbineSpec};
use crate::wake::WakeParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayoutConfig {
    /// Rectangular grid; spacings in rotor diameters.
    Grid {
        rows: usize,
        cols: usize,
        spacing_x: f64,
        spacing_y: f64,
    },
    /// 32-turbine reference plant.
    Reference32,
    /// Explicit positions, m.
    Positions { positions: Vec<[f64; 2]> },
    /// CSV file with columns `id,x,y`.
    Csv { path: PathBuf },
}

impl LayoutConfig {
    pub fn build(&self, rotor_diameter: f64) -> Result<FarmLayout> {
        Ok(match self {
            LayoutConfig::Grid {
                rows,
                cols,
                spacing_x,
                spacing_y,
            } => FarmLayout::grid(
                *rows,
                *cols,
                spacing_x * rotor_diameter,
                spacing_y * rotor_diameter,
            ),
            LayoutConfig::Reference32 => FarmLayout::reference_32(rotor_diameter),
            LayoutConfig::Positions { positions } => FarmLayout::new(positions.clone()),
            LayoutConfig::Csv { path } => read_layout_csv(path)?,
        })
    }
}

#[derive(Debug, Deserialize)]
struct LayoutRow {
    id: usize,
    x: f64,
    y: f64,
}

/// Layout from a CSV with columns `id,x,y`; ids must be 0..n in any order.
pub fn read_layout_csv(path: &Path) -> Result<FarmLayout> {
    let mut rows: Vec<LayoutRow> = csv::Reader::from_path(path)?
        .deserialize()
        .collect::<std::result::Result<_, _>>()?;
    rows.sort_by_key(|r| r.id);
    if rows.iter().enumerate().any(|(i, r)| r.id != i) {
        return Err(FarmError::InvalidLayout(
            "layout ids must be 0..n without gaps".into(),
        ));
    }
    Ok(FarmLayout::new(rows.iter().map(|r| [r.x, r.y]).collect()))
}

fn reference_turbine() -> TurbineSpec {
    TurbineSpec::reference_10mw()
}

/// Turbine and layout, from one TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarmConfig {
    #[serde(default = "reference_turbine")]
    pub turbine: TurbineSpec,
    pub layout: LayoutConfig,
}

impl FarmConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| FarmError::Config(e.to_string()))
    }

    /// A `.csv` path is read as a bare layout for the reference turbine.
    pub fn load(path: &Path) -> Result<Self> {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            return Ok(Self {
                turbine: reference_turbine(),
                layout: LayoutConfig::Positions {
                    positions: read_layout_csv(path)?.positions,
                },
            });
        }
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn layout(&self) -> Result<FarmLayout> {
        let layout = self.layout.build(self.turbine.rotor_diameter)?;
        layout.validate(self.turbine.rotor_diameter)?;
        Ok(layout)
    }
}

pub fn load_turbine(path: &Path) -> Result<TurbineSpec> {
    let spec: TurbineSpec =
        toml::from_str(&std::fs::read_to_string(path)?).map_err(|e| FarmError::Config(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

/// Controller model state: farm, ambient estimate and current κ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    #[serde(default = "reference_turbine")]
    pub turbine: TurbineSpec,
    pub layout: LayoutConfig,
    pub ambient: AmbientState,
    #[serde(default)]
    pub params: WakeParams,
}

impl ModelState {
    pub fn load(path: &Path) -> Result<Self> {
        toml::from_str(&std::fs::read_to_string(path)?).map_err(|e| FarmError::Config(e.to_string()))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MeasurementRow {
    turbine: usize,
    power_mean_w: f64,
    yaw_mean_deg: f64,
    completeness: f64,
}

/// One averaged window from a CSV with columns
/// `turbine,power_mean_w,yaw_mean_deg,completeness`.
pub fn read_measurements_csv(path: &Path, t_s: f64) -> Result<MeasurementWindow> {
    let mut rows: Vec<MeasurementRow> = csv::Reader::from_path(path)?
        .deserialize()
        .collect::<std::result::Result<_, _>>()?;
    rows.sort_by_key(|r| r.turbine);
    if rows.iter().enumerate().any(|(i, r)| r.turbine != i) {
        return Err(FarmError::Config(
            "measurement rows must cover turbines 0..n once each".into(),
        ));
    }
    if rows.iter().any(|r| !(0.0..=1.0).contains(&r.completeness)) {
        return Err(FarmError::Config("completeness must lie in [0, 1]".into()));
    }
    Ok(MeasurementWindow {
        t_s,
        mean_power: rows.iter().map(|r| r.power_mean_w).collect(),
        mean_yaw: rows.iter().map(|r| r.yaw_mean_deg).collect(),
        completeness: rows.iter().map(|r| r.completeness).collect(),
    })
}

pub fn write_measurements_csv(path: &Path, window: &MeasurementWindow) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for i in 0..window.len() {
        w.serialize(MeasurementRow {
            turbine: i,
            power_mean_w: window.mean_power[i],
            yaw_mean_deg: window.mean_yaw[i],
            completeness: window.completeness[i],
        })?;
    }
    w.flush()?;
    Ok(())
}
