//! Fatigue loads: rainflow counting, DELs, a surrogate load generator and
//! the seven-dimensional DEL lookup table built from it.

pub mod lut;
pub mod rainflow;
pub mod surrogate;

pub use lut::{seed_count, BuildOptions, FatigueLut, LutGrid, LutSample, SeedSchedule, AXIS_NAMES};
pub use rainflow::{damage_equivalent_load, rainflow, reversals, Cycle};
pub use surrogate::{
    inflow_wake_field, surrogate_load_case, Channel, LoadCase, LoadSeries, SurrogateConfig,
};
