//! Quasi-static closed-loop wind-farm control: analytical yawed-wake farm
//! model, online calibration and inflow estimation, a fatigue load lookup
//! table, yaw set-point optimization and a virtual plant to run it against.

pub mod calibration;
pub mod config;
pub mod error;
pub mod estimation;
pub mod farm;
pub mod fatigue;
pub mod flow;
pub mod optimizer;
pub mod plant;
pub mod runner;
pub mod search;
pub mod stats;
pub mod wake;

pub use error::{FarmError, Result};
