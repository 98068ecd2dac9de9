//! Nonlinearities, Duhamel solution maps for NLS and NLW, Picard
//! iteration, and empirical checks of the nonlinear estimates and
//! contraction budgets.

mod contraction;
mod data;
mod duhamel;
mod nonlinearity;

pub use contraction::{
    ball_norm, contraction_experiment, data_norm, default_triples, find_contraction_time, gaps_geometric,
    nonlinear_estimate_check, picard_solve, select_for, working_regularity, BisectionOutcome, BisectionStep,
    ContractionReport, ExperimentOptions, SolverConfig,
};
pub use data::{rough_data_builder, rough_tensor_field, wave_packets, NormPair, PacketSpec, RoughDiagnostics, RoughProfile};
pub use duhamel::{duhamel_map_s, duhamel_map_w, CauchyData, MeanProjection};
pub use nonlinearity::{chain_rule_check, lipschitz_check, structural_check, Nonlinearity, NonlinearityForm};
