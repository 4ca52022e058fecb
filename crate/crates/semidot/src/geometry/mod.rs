//! Convex geometry: polygon clipping and Laguerre diagrams.

mod diagram;
mod polygon;

pub use diagram::{
    build_diagram, cell_mass, cell_masses, facet_integral, level_set_integral, mass_jacobian, CellGeom, Facet,
    FacetGeom, LaguerreDiagram, PotentialKind, PotentialVector,
};
pub(crate) use diagram::{integration_regions, split_layer_regions, Region};
pub use polygon::ConvexPolygon;

/// Absolute tolerance for vertex coincidence and degenerate-area checks.
pub const GEOM_TOL: f64 = 1e-12;
