//! Scattering diagnostics: cutoffs, channel amplitudes, the weakly localized
//! decomposition, bubble overlaps, the propagation ledger and the weak-limit probe.

mod amplitude;
mod cutoff;
mod localization;
mod probe;
mod propagation;
mod windows;

pub use amplitude::{
    bubble_coefficient, channel_amplitude, decompose, decompose_part, dilated_bound_state, gauged_amplitude, local_mass,
    second_bubble_overlap,
};
pub use cutoff::{cutoff_apply, cutoff_complement, CutoffSpec, DEFAULT_CUTOFF_WIDTH};
pub use localization::{
    free_channel_part, free_channel_projection, weak_localization_norm, weak_localization_norm_with, weakly_localized_part,
    Decomposition,
};
pub use probe::{probe_dictionary, ProbeReport, TestField, WeakLimitProbe};
pub use propagation::{propagation_ledger, propagation_row, PropagationLedger, PropagationRow};
pub use windows::{alpha_upper, beta_upper, check_alpha, check_beta, epsilon_lower_two_bubble};
