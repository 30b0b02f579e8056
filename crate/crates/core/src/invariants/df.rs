//! Donaldson–Futaki assemblies: Riemann–Roch coefficient route and the
//! intersection-theoretic route for product configurations.

use num::Zero;

use crate::error::{Error, Result};
use crate::geom1d::{action_f64, Grid, MetricTuple};
use crate::rational::{q, Q};
use crate::toriclat::{CoefficientTable, PolarizedTuple, TorusAction};

use super::futaki::normalized_moment_sum;

/// `(a_1 b_0 - a_0 b_1)/a_0²` for `L_0`.
pub fn futaki_classical(table: &CoefficientTable) -> Q {
    let c = &table.bundles[0];
    (&c.a1 * &c.b0 - &c.a0 * &c.b1) / (&c.a0 * &c.a0)
}

/// `Fut - Σ b_{i,0}/a_{i,0} + (a_{t,1} b_{t,0} - a_{t,0} b_{t,1})/a_{t,0}²`.
pub fn df_coefficient_route(table: &CoefficientTable) -> Result<Q> {
    let t = table
        .twisted
        .as_ref()
        .ok_or_else(|| Error::Invalid("coefficient table has no twisted entries".into()))?;
    let mut v = futaki_classical(table);
    for c in &table.bundles {
        v -= &c.b0 / &c.a0;
    }
    v += (&t.a1 * &t.b0 - &t.a0 * &t.b1) / (&t.a0 * &t.a0);
    Ok(v)
}

fn require_fano_curve(mt: &MetricTuple) -> Result<()> {
    if !mt.is_fano() {
        return Err(Error::Scope("intersection route is implemented for Fano tuples only".into()));
    }
    Ok(())
}

/// Product configuration: `-½Σ𝓛_i²/L_i + (K + 𝓛)·𝓛/(-K)`, both terms
/// evaluated from Hamiltonian integrals of the given metrics.
pub fn df_intersection_fano(mt: &MetricTuple, action: &TorusAction, grid: &Grid) -> Result<f64> {
    require_fano_curve(mt)?;
    if action.is_trivial() {
        return Ok(0.0);
    }
    let term1 = normalized_moment_sum(mt, action, grid)?;
    let (l, c) = action_f64(action, mt)?;
    let cs: f64 = c.iter().sum();
    let u = mt.sum_potential()?;
    // (K + 𝓛)·𝓛 = ∫θ S ω/(2π) - 2∫θ ω/(2π), and (-K) = 2
    let curv = grid.quad(|n| {
        let j = u.jet(*n);
        (l * j.du() + cs) * j.ricci_over_s()
    })?;
    let mass = grid.quad(|n| {
        let j = u.jet(*n);
        (l * j.du() + cs) * j.g
    })?;
    Ok(term1 + (curv - 2.0 * mass) / 2.0)
}

/// Exact version of [`df_intersection_fano`] from the polytope coefficients.
pub fn df_intersection_exact(tuple: &PolarizedTuple, table: &CoefficientTable) -> Result<Q> {
    if tuple.n() != 1 || !tuple.is_fano() {
        return Err(Error::Scope("exact intersection route needs a Fano curve".into()));
    }
    let mut term1 = Q::zero();
    for c in &table.bundles {
        term1 -= &c.b0 / &c.a0;
    }
    let t = &table.total;
    Ok(term1 + (q(2) * &t.b0 - q(2) * &t.b1) / &t.a0)
}
