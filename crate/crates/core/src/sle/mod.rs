//! Conformal maps, the restriction functional, chordal Loewner chains and
//! SLE diagnostics.

mod cardy;
mod diagnostics;
mod loewner;
mod maps;
mod restriction;

pub use cardy::{cardy_g, cardy_kappa_root};
pub use diagnostics::{
    absorption_by, hitting_probability_mc, martingale_diagnostic, trace_dimension, AbsorptionReport, HittingReport, MartingaleReport, PairOutcome,
};
pub(crate) use loewner::forward_step;
pub use loewner::{compute_trace, loewner_map, sample_driving, DrivingFunction, LoewnerTrace};
pub use maps::{half_plane_slit, mobius_disc, radial_slit_map, ConformalMap};
pub use restriction::{
    estimate_a_functional, sample_restriction, BrownianHullSource, LoopSource, PercolationHullSource, RestrictionSample,
};
