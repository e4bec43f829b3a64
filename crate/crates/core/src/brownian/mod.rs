//! Random-walk loops, Brownian bridges and loops, hulls, and Poissonian
//! loop soups under an explicit duration cutoff.

mod bridge;
mod hull;
mod rw_loops;
mod soup;

pub use bridge::{rescale_loop, sample_brownian_bridge, PlanarPath};
pub(crate) use hull::HullRaster;
pub use hull::{diffusive_resolution, hull_of_points, outer_boundary, path_hull, Hull};
pub use rw_loops::{count_rw_loop_classes_by_period, enumerate_rw_loops, rw_loop_mass, RwLoopClass, MAX_RW_LOOP_LENGTH};
pub use soup::{estimate_domain_mass, sample_loop_soup, LoopSoup, TimeCutoff};
