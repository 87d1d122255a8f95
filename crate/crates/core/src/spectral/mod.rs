//! Eigenstates, solitons, the continuous-spectrum projection and the resolvent.

pub mod bound;
pub mod hamiltonian;
pub mod pcg;
pub mod resolvent;
pub mod soliton;

pub use bound::{count_bound_states, fix_phase, solve_bound_state, solve_ground_state, BoundState, EigenOptions};
pub use hamiltonian::{free_energy_form, kinetic_form, kinetic_values, Hamiltonian};
pub use resolvent::{apply_resolvent, project_continuous, resolvent_dilation_probe, ResolventProbe};
pub use soliton::{solve_soliton, soliton_residual, SolitonTarget};
