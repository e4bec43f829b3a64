//! Potts and Ising spins, the FK random-cluster model and their Edwards-Sokal
//! coupling; uniform spanning trees; planar duality; exact enumeration.
//!
//! Colors are `0..q`. Edge and site indices follow the underlying [`Graph`].
//!
//! [`Graph`]: crate::lattice::Graph

mod dual;
mod exact;
mod fk;
mod potts;
mod ust;

pub use dual::{dual_p, self_dual_p, SquareDual};
pub use exact::{
    correlation_identity_check, decode_spins, es_spin_marginal, exact_partition, fk_exact, potts_exact, spanning_trees,
    sw_kernel_apply, CorrelationCheck, ExactDistribution, Model, DEFAULT_MAX_STATES,
};
pub use fk::{fk_cluster_count, fk_weight, fk_weight_wired, sample_bonds_given_spins, sample_fk, BondConfig};
pub use potts::{
    beta_to_p, boltzmann_weight, hamiltonian, heat_bath_sweep, p_to_beta, sample_potts_sw, two_point_function,
    BoundaryCondition, SpinConfig, SwChain,
};
pub use ust::sample_ust_wilson;
