//! T-billiard orbits, their lift to `ℝ²ⁿ`, closed orbits of least action
//! and the volume quantities compared against it.

mod orbit;
mod search;

pub use orbit::{
    finsler_length, iterate_t_billiard, lift_kt_orbit, KTOrbit, KTSegment, Orbit, OrbitStatus,
};
pub use search::{
    capacity_estimate, closed_orbit_search, mahler_product, viterbo_ratio, CapacityReport,
    ClosedOrbit, SearchPlan,
};
