//! Diagnostics built on top of circuits, history states and spectra.

pub mod bounds;
pub mod design;
pub mod overlap;

pub use bounds::{
    bhh_design_length, design_order, lemma_failure_bounds, low_tail_bound, net_sizes, BoundParams,
    BoundValue, DeltaChoice, DesignOrderVariant, LemmaBounds, NetSizes,
};
pub use design::{
    frame_potential, haar_frame_potential, DesignEnsembleSpec, EnsembleKind, FramePotential,
};
pub use overlap::{
    difference_max, fh_decay_profile, local_cross_overlap_max, FhPoint, OverlapValue,
    DEFAULT_THETA_GRID,
};
pub mod experiment;

pub use experiment::{
    design_experiment, fh_experiment, fit_power_law, gap_experiment, haar_overlap_experiment,
    split_experiment, CircuitFamily, DesignConfig, FhConfig, GapConfig, HaarOverlapConfig,
    ProfileKind, SplitConfig,
};
