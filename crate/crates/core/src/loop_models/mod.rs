//! Self-avoiding walks and polygons by exact enumeration, and the O(N) loop
//! model on the honeycomb lattice.

mod on_model;
mod saw;

pub use on_model::{
    exact_on_partition, nienhuis_theta_c, on_transition_matrix, on_weight, sample_on_model, LoopConfig, OnChain,
    OnExact,
};
pub(crate) use saw::neighbors as saw_neighbors;
pub use saw::{enumerate_sap, enumerate_saw, estimate_connective_constant, sap_mass, ConnectiveEstimate, SawCountTable};
