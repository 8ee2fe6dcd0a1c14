//! History states over chains and posets, the reduction of generalized
//! history states to standard form, amplitude checks and truncations.

pub mod amplitudes;
pub mod generalized;
mod poset;
mod state;
mod truncation;

pub use amplitudes::{
    check_amplitudes_case1, check_amplitudes_case2, profiles, AmplitudeCheckParams,
    AmplitudeProfile, Case1Report, Case2Candidate, Case2Report, ScaleCheck,
};
pub use generalized::{
    kitaev_unary, random_instance, reduce_to_standard, standard_register, GeneralizedHistoryState,
    RandomInstance, Reduction, SiteAlphabet,
};
pub use poset::{PosetJson, TimePoset};
pub use state::{
    chain_history_state, computational_states, standard_history_state, uniform_amplitudes,
    ClockLabeling, HistoryState, JunkRule, JunkUnitary,
};
pub use truncation::{late_labels, truncated_states, xi_split, SplitEnergies, Truncation, XiSplit};
