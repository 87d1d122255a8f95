//! Scenario configuration, orchestration and output.

mod calibrate;
mod config;
mod criteria;
mod run;
mod setup;
mod t0;

pub use calibrate::{calibrate_potential, Calibration};
pub use config::*;
pub use criteria::*;
pub use run::*;
pub use setup::*;
pub use t0::*;
