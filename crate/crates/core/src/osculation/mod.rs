//! Osculating conics, affine curvature and sextactic points of planar
//! curves; osculating quadrics along planar sections of hypersurfaces.

mod conic;
mod curve;
mod pair;
mod quadric;
mod section;

pub use conic::{coefficient_count, conic_from_jet, conic_height, conic_series, ConicQuadric};
pub use curve::{
    affine_curvature, fifth_order_gap, is_sextactic, jet_match_residual, osculating_conic,
    CurveJet, LocalGraph,
};
pub use pair::{level_root, GraphPair, SectionGraph};
pub use quadric::{
    local_graph_germ, normal_field_gap, osculating_quadric_along_curve, psi_gap,
    OsculatingQuadric, PlanarSectionFrame,
};
pub use section::{planar_section_conic_residual, SectionPlane};
