//! Exact lattice-polytope engine: intersection numbers, `Ŝ`, Riemann–Roch
//! coefficient tables and brute-force lattice counts.

mod coefficients;
mod intersection;
mod oracle;
mod polytope;
mod tuple;

pub use coefficients::{coefficient_table, untwisted_table, CoefficientTable, Coefficients};
pub use intersection::{intersection_number, intersection_of, s_hat};
pub use oracle::{dim_weight_oracle, BundleSel, LatticeCount};
pub use polytope::{lattice_points_of_region, Facet, LatticePolytope, Point, PolytopeJson};
pub use tuple::{Model, Normalization, PolarizedTuple, TorusAction};

/// Lattice volume (`lattice_volume`).
pub fn lattice_volume(p: &LatticePolytope) -> crate::rational::Q {
    p.volume()
}

pub fn boundary_lattice_volume(p: &LatticePolytope) -> crate::rational::Q {
    p.boundary_volume()
}
