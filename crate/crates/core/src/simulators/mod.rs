//! Data with known ground truth: lattice Hamiltonians sampled by Metropolis,
//! linear trait models, and exact enumeration of small systems.

mod exact;
mod lattice;
mod metropolis;
mod trait_model;

pub use exact::{enumerate_distribution, exact_interaction, ExactDistribution, ExactKind, MAX_EXACT_VARS};
pub use lattice::Lattice;
pub use metropolis::{
    ising_metropolis, metropolis, plaquette_metropolis, Couplings, HamiltonianConfig, ModelKind, SamplerConfig,
    SimulationOutput, ISING_TC,
};
pub use trait_model::{simulate_trait, Stratum, TraitConfig};
