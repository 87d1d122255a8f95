//! Scaling profile, potentials and the nonlinearity.

pub mod nonlinearity;
pub mod potential;
pub mod profile;

pub use nonlinearity::{nl_f, nl_f0, nl_value, NonlinearitySpec};
pub use potential::{scaled_potential, scaled_potential_dt, PotentialNorms, PotentialSpec, Table};
pub use profile::{bracket, check_g_conditions, GConditionsReport, GValues, ProfileForm, ScalingProfile};
