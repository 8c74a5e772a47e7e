//! Simulation and analytics for storage, retrieval, and manipulation of weak
//! resonant x-ray pulses in a thin nuclear target, where pulsed magnetic
//! hyperfine splitting writes the photon into a long-lived ground-state
//! coherence and reads it back out as one or more echoes.
//!
//! The crate is organized in five layers:
//!
//! * [`model`] — constants, level structure, pulse envelopes, target/grid.
//! * [`solver`] — direct RK4 integration of the propagation equations
//!   (reduced two-coherence and full four-level variants), echo windows,
//!   and per-window reports.
//! * [`analytic`] — closed-form leading-order solutions: transmitted field,
//!   echo prefactors for arbitrary pulse trains, retrieval efficiency.
//! * [`polarization`] — the vector model with per-pulse field axes and two
//!   photon polarization channels.
//! * [`experiments`] — ready-made scenarios (storage/retrieval, efficiency
//!   map, temporal shaping, beam splitting, interference, polarization
//!   switch) and a golden-section thickness optimizer.

// Validation guards use `!(x > 0.0)` instead of `x <= 0.0` so NaN is rejected
// too; indexed loops are kept where they mirror the (m_e, m_g) matrix notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytic;
pub mod experiments;
pub mod model;
pub mod polarization;
pub mod solver;

pub use analytic::{absorption_parameter, EchoPrediction, FirstPassSolution};
pub use experiments::{
    optimize_thickness, preset, preset_names, scenario_beam_splitter, scenario_efficiency_map,
    scenario_interference, scenario_polarization, scenario_storage_retrieval,
    scenario_temporal_shaping, EfficiencyMap, ModelKind, OptimizeOpts, Scenario, ThicknessOptimum,
};
pub use model::{
    amplitude_for_area, clebsch_gordan, field_for_splitting, splitting_from_field, Channel,
    GaussianEnvelope, Grid, InputPulse, IsotopeParams, MagneticPulse, ModelError, PulseTrain,
    TargetParams,
};
pub use polarization::{channel_projections, little_d, run_vector, SublevelState};
pub use solver::{
    echo_segments, run_full, run_reduced, EchoReport, FieldState, SolveOpts, SolverError,
    TimeSeries, TimeWindow,
};
