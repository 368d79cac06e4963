//! Random d-uniform hypergraph models and phase-transition experiments.
//!
//! The crate has three layers:
//!
//! * **Models**: the Poisson cloning sampler ([`sampler::sample_poc`]), the
//!   classical binomial sampler ([`sampler::sample_binomial`]), and random
//!   k-SAT ([`sat::sample_ksat`]), all driven by reproducible seeded streams
//!   ([`rng::SeedSpec`]).
//! * **Algorithms**: k-core peeling ([`cores::peel_kcore`]), the cut-off line
//!   algorithm on clone configurations ([`cores::cutoff_line_kcore`]), and
//!   pure-literal elimination ([`sat::pure_literal_eliminate`]).
//! * **Predictions & experiments**: closed-form threshold and core-size
//!   numerics ([`numerics`]), and the seeded Monte Carlo sweep harness
//!   ([`sweep`]) that checks the predictions at finite sizes.

pub mod cores;
pub mod error;
pub mod hypergraph;
pub mod numerics;
pub mod rng;
pub mod sampler;
pub mod sat;
pub mod stats;
pub mod sweep;

pub use cores::{cutoff_line_kcore, peel_kcore, verify_coupling, CoreResult, CutoffTrace};
pub use error::{Error, Result};
pub use hypergraph::{DegreeSequence, MultiHypergraph};
pub use numerics::{giant_fraction, kcore_fixpoint, kcore_threshold, poisson_tail};
pub use rng::SeedSpec;
pub use sampler::{
    lambda_to_p, sample_binomial, sample_clone_counts, sample_poc, CloneConfiguration,
    GroupingResult, PocSample,
};
pub use sat::{pure_literal_eliminate, sample_ksat, CnfFormula, EliminationTrace, Lit};
pub use sweep::{estimate_crossing, run_sweep, SweepConfig, SweepModel, SweepRecord};
