//! Comparison of computed kernels with the exact lattice oracle and the
//! Riemann–Roch polynomials.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom1d::{MetricTuple, QuadratureSpec};
use crate::rational::{fmt_q, q, serde_fixed, Q};
use crate::toriclat::{coefficient_table, dim_weight_oracle, BundleSel, TorusAction};

use super::{bergman_sample, sample_nodes};

/// Least-squares slope of `log y` against `log k`.
pub fn fit_exponent(ks: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ks.iter().zip(ys).filter(|(_, y)| **y > 0.0).map(|(k, y)| (k.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionRow {
    pub k: u32,
    pub dimension: u64,
    pub computed_norms: usize,
    pub weight: String,
    pub dimension_prediction: String,
    pub dimension_residual: String,
    pub weight_prediction: String,
    pub weight_residual: String,
    #[serde(with = "serde_fixed")]
    pub trace_dimension: f64,
    #[serde(with = "serde_fixed")]
    pub trace_weight: f64,
    #[serde(with = "serde_fixed")]
    pub rho_residual: f64,
    #[serde(with = "serde_fixed")]
    pub rho_deviation: f64,
    #[serde(with = "serde_fixed")]
    pub equivariant_leading: f64,
    #[serde(with = "serde_fixed")]
    pub equivariant_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub rows: Vec<ExpansionRow>,
    #[serde(with = "serde_fixed")]
    pub rho_residual_exponent: f64,
    #[serde(with = "serde_fixed")]
    pub rho_deviation_exponent: f64,
    #[serde(with = "serde_fixed")]
    pub equivariant_residual_exponent: f64,
    /// `max_k k·sup|(2π)ρ^{S¹} + θ_0|`.
    #[serde(with = "serde_fixed")]
    pub leading_constant: f64,
    pub max_abs_weight_residual: String,
}

pub fn expansion_report(
    mt: &MetricTuple,
    action: &TorusAction,
    ks: &[u32],
    spec: QuadratureSpec,
    samples: usize,
) -> Result<ExpansionReport> {
    if ks.len() < 3 {
        return Err(Error::Invalid("expansion report needs at least three values of k".into()));
    }
    let table = coefficient_table(mt.tuple(), action)?;
    let tw = table.twisted.as_ref().expect("full table carries twisted entries");
    let nodes = sample_nodes(samples);
    let mut rows = Vec::new();
    let mut max_w = Q::from_integer(0.into());
    for &k in ks {
        let oracle = dim_weight_oracle(mt.tuple(), action, BundleSel::Twisted, k as i64)?;
        let kq = q(k as i64);
        let dim_pred = &tw.a0 * &kq + &tw.a1;
        let w_pred = &tw.b0 * &kq * &kq + &tw.b1 * &kq;
        let dim_res = Q::from_integer((oracle.dimension as i64).into()) - &dim_pred;
        let w_res = oracle.total_weight() - &w_pred;
        if crate::rational::abs(&w_res) > max_w {
            max_w = crate::rational::abs(&w_res);
        }
        let s = bergman_sample(mt, action, k, &nodes, spec)?;
        rows.push(ExpansionRow {
            k,
            dimension: oracle.dimension,
            computed_norms: s.norms.len(),
            weight: fmt_q(&oracle.total_weight()),
            dimension_prediction: fmt_q(&dim_pred),
            dimension_residual: fmt_q(&dim_res),
            weight_prediction: fmt_q(&w_pred),
            weight_residual: fmt_q(&w_res),
            trace_dimension: s.trace_dimension,
            trace_weight: s.trace_weight,
            rho_residual: s.rho_residual(),
            rho_deviation: s.rho_deviation(),
            equivariant_leading: s.equivariant_leading(),
            equivariant_residual: s.equivariant_residual(),
        });
    }
    let kf: Vec<f64> = rows.iter().map(|r| r.k as f64).collect();
    let col = |f: fn(&ExpansionRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let leading_constant = rows.iter().map(|r| r.k as f64 * r.equivariant_leading).fold(0.0, f64::max);
    Ok(ExpansionReport {
        rho_residual_exponent: fit_exponent(&kf, &col(|r| r.rho_residual)),
        rho_deviation_exponent: fit_exponent(&kf, &col(|r| r.rho_deviation)),
        equivariant_residual_exponent: fit_exponent(&kf, &col(|r| r.equivariant_residual)),
        leading_constant,
        max_abs_weight_residual: fmt_q(&max_w),
        rows,
    })
}
