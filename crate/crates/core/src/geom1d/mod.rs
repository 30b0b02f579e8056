//! Rotation-invariant Kähler geometry on ℂP¹ (and products of ℂP¹).

mod chebyshev;
mod metric;
mod potential;
mod product;
mod quadrature;

pub use chebyshev::{basis, ChebSeries};
pub use metric::{
    anticanonical_mean, coupled_csck_residual, coupled_ke_residual, grid_csv, hamiltonian_at,
    integrated_scalar_residual, key_identity_residual, ricci_potential, twisted_density, twisted_ke_residual,
    CscKResidual, MetricJson, MetricTuple, RicciPotential, Twist, TwistJson, TwistRef,
};
#[allow(unused_imports)]
pub(crate) use metric::action_f64;
pub use potential::{Jet, SymmetricPotential, POSITIVITY_SAMPLES};
pub use product::{cp1_integrals, ProductMetric};
pub use quadrature::{gauss_legendre, Grid, Node, QuadratureSpec};
