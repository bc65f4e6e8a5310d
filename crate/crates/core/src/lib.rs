//! Estimation of a finite-population mean from a binary auxiliary attribute.
//!
//! The crate covers the ratio-type and exponential estimator classes, their
//! almost-unbiased weighted combinations under single- and two-phase SRSWOR,
//! closed-form first-order bias/MSE, the constraint solver for the weights, and
//! a seeded Monte Carlo oracle over explicit synthetic populations.

pub mod data;
pub mod error;
pub mod estimators;
pub mod families;
pub mod moments;
pub mod montecarlo;
pub mod population;
pub mod tables;
pub mod weights;

pub use data::{builtin, builtin_set, BuiltinPopulation, PopulationSet};
pub use error::{Degeneracy, Error, Result};
pub use estimators::{
    evaluate, evaluate_two_phase, DesignConstants, EstimatorKind, EstimatorSpec, SampleQuantities,
    ShapeConstants, Sign,
};
pub use families::{reconcile, Appendix, FamilyMember, ReconcileReport};
pub use moments::{Formulation, MomentReport};
pub use montecarlo::{
    build_population, run, Design, EmpiricalMoments, ResidualShape, SimulationPlan,
    SimulationReport, SyntheticPopulation,
};
pub use population::{
    derive_constants, read_microdata_csv, summarize_microdata, DerivedConstants, MicrodataSummary,
    PopulationSummary, Record, SummaryMode,
};
pub use tables::{builtin_table, RowFlag, TableId, TableReport};
pub use weights::{optimum_spec, solve_weights, Phase, WeightSolution, WeightSystem, WeightVector};
