//! Quadrature routes for Futaki-type invariants on ℂP¹.

use crate::error::{Error, Result};
use crate::geom1d::{action_f64, anticanonical_mean, Grid, MetricTuple, TwistRef};
use crate::toriclat::TorusAction;

/// `∫θ_i g_i dσ`, `∫θ_i g_0 dσ` and `∫θ_0 (S_0 - Ŝ - tr_{ω_0}ω) g_0 dσ`.
struct Moments {
    own: Vec<f64>,
    against0: Vec<f64>,
    scalar: f64,
}

fn moments(mt: &MetricTuple, action: &TorusAction, grid: &Grid) -> Result<Moments> {
    let (l, c) = action_f64(action, mt)?;
    let m = mt.len();
    let s_hat = mt.s_hat()?;
    let mut own = vec![Vec::with_capacity(grid.len()); m];
    let mut against0 = vec![Vec::with_capacity(grid.len()); m];
    let mut scalar = Vec::with_capacity(grid.len());
    for &node in &grid.nodes {
        let jets = mt.jets(node);
        let g0 = jets[0].g;
        let total: f64 = MetricTuple::total_g(&jets);
        for (i, j) in jets.iter().enumerate() {
            let theta = l * j.du() + c[i];
            own[i].push(theta * j.g);
            against0[i].push(theta * g0);
        }
        let theta0 = l * jets[0].du() + c[0];
        scalar.push(theta0 * (jets[0].ricci_over_s() - s_hat * g0 - total));
    }
    Ok(Moments {
        own: own.iter().map(|v| grid.integrate_dsigma(v)).collect::<Result<_>>()?,
        against0: against0.iter().map(|v| grid.integrate_dsigma(v)).collect::<Result<_>>()?,
        scalar: grid.integrate_dsigma(&scalar)?,
    })
}

/// Coupled Futaki invariant from its defining integral.
pub fn futaki_coupled(mt: &MetricTuple, action: &TorusAction, grid: &Grid) -> Result<f64> {
    if action.is_trivial() {
        return Ok(0.0);
    }
    let d = mt.degrees();
    let mo = moments(mt, action, grid)?;
    let mut v = mo.scalar / d[0];
    for i in 1..mt.len() {
        v += mo.own[i] / d[i] - mo.against0[i] / d[0];
    }
    Ok(v)
}

/// `Σ (1/V_i)∫θ_i ω_i`.
pub(crate) fn normalized_moment_sum(mt: &MetricTuple, action: &TorusAction, grid: &Grid) -> Result<f64> {
    let (l, c) = action_f64(action, mt)?;
    let mut total = 0.0;
    for (i, u) in mt.potentials().iter().enumerate() {
        let v = grid.quad(|n| {
            let j = u.jet(*n);
            (l * j.du() + c[i]) * j.g
        })?;
        total += v / u.degree();
    }
    Ok(total)
}

/// Fano form: `Σ (1/V_i)∫θ_i ω_i - ∫θ e^{-φ}/∫e^{-φ}`.
pub fn futaki_fano(mt: &MetricTuple, action: &TorusAction, grid: &Grid) -> Result<f64> {
    if !mt.is_fano() {
        return Err(Error::Scope("Fano form of the Futaki invariant needs total degree 2".into()));
    }
    if action.is_trivial() {
        return Ok(0.0);
    }
    Ok(normalized_moment_sum(mt, action, grid)? - anticanonical_mean(mt, action, grid)?)
}

/// Result of the twisted Futaki invariant.
#[derive(Clone, Debug, serde::Serialize)]
pub struct TwistedFutaki {
    pub t: f64,
    #[serde(with = "crate::rational::serde_fixed")]
    pub value: f64,
    #[serde(with = "crate::rational::serde_fixed")]
    pub coupled: f64,
    /// `Σ (1/V_i)∫θ_i (β_i - ω_i)`.
    #[serde(with = "crate::rational::serde_fixed")]
    pub correction: f64,
    /// Whether `i_w β_i = 0` for every reference, the hypothesis under which
    /// the value is independent of the metrics.
    pub w_preserves_twist: bool,
}

pub fn futaki_twisted(mt: &MetricTuple, action: &TorusAction, grid: &Grid) -> Result<TwistedFutaki> {
    let twist = mt.twist().ok_or_else(|| Error::Invalid("metric tuple carries no twist data".into()))?;
    let t = twist.t;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Invalid(format!("twist parameter {t} outside [0, 1]")));
    }
    let coupled = futaki_coupled(mt, action, grid)?;
    let (l, c) = action_f64(action, mt)?;
    let mut correction = 0.0;
    for (i, (u, r)) in mt.potentials().iter().zip(&twist.refs).enumerate() {
        let d = u.degree();
        let beta = match r {
            TwistRef::Smooth(psi) => grid.quad(|n| (l * u.jet(*n).du() + c[i]) * psi.jet(*n).g)?,
            // θ takes the value c at 0 and ℓd + c at ∞
            TwistRef::PoleCurrent { mass_at_zero: a } => a * c[i] + (d - a) * (l * d + c[i]),
        };
        let omega = grid.quad(|n| {
            let j = u.jet(*n);
            (l * j.du() + c[i]) * j.g
        })?;
        correction += (beta - omega) / d;
    }
    if action.is_trivial() {
        correction = 0.0;
    }
    let preserved = action.is_trivial()
        || twist.refs.iter().all(|r| matches!(r, TwistRef::PoleCurrent { .. }));
    Ok(TwistedFutaki { t, value: coupled - (1.0 - t) * correction, coupled, correction, w_preserves_twist: preserved })
}
