use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom1d::{Grid, MetricJson, MetricTuple, QuadratureSpec};
use crate::rational::{fmt_q, serde_fixed, serde_fixed_opt, to_f64};
use crate::toriclat::{coefficient_table, s_hat, untwisted_table, Normalization, TorusAction};

use super::df::{df_coefficient_route, df_intersection_exact, df_intersection_fano, futaki_classical};
use super::futaki::{futaki_coupled, futaki_fano, futaki_twisted, TwistedFutaki};

#[derive(Clone, Debug, Serialize)]
pub struct RouteDelta {
    pub lhs: String,
    pub rhs: String,
    #[serde(with = "serde_fixed")]
    pub delta: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub degrees: Vec<String>,
    pub action_l: Vec<String>,
    pub action_shifts: Vec<String>,
    pub normalization: Normalization,
    pub metric_hash: String,
    pub quadrature: QuadratureSpec,
    pub s_hat: String,
    #[serde(with = "serde_fixed")]
    pub fut_coupled_integral: f64,
    #[serde(with = "serde_fixed_opt")]
    pub fut_coupled_fano: Option<f64>,
    pub fut_classical: String,
    pub df_coefficient_route: Option<String>,
    #[serde(with = "serde_fixed_opt")]
    pub df_intersection_route: Option<f64>,
    pub df_intersection_exact: Option<String>,
    pub fut_twisted: Option<TwistedFutaki>,
    #[serde(with = "serde_fixed")]
    pub tolerance: f64,
    pub route_deltas: Vec<RouteDelta>,
    /// Comparisons not made, with the reason.
    pub skipped: Vec<String>,
    pub routes_agree: bool,
}

/// FNV-1a over the canonical JSON of the metric tuple.
fn metric_hash(mt: &MetricTuple) -> Result<String> {
    let json = serde_json::to_string(&MetricJson::from_metric(mt)?).map_err(|e| Error::Invalid(e.to_string()))?;
    let mut h: u64 = 0xcbf29ce484222325;
    for b in json.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    Ok(format!("{h:016x}"))
}

pub fn invariant_report(mt: &MetricTuple, action: &TorusAction, grid: &Grid, tol: f64) -> Result<InvariantReport> {
    let tuple = mt.tuple();
    action.check(tuple)?;
    let table = untwisted_table(tuple, action)?;
    let full = coefficient_table(tuple, action);
    let fut_coupled = futaki_coupled(mt, action, grid)?;
    let fano = mt.is_fano();
    let fut_fano = if fano { Some(futaki_fano(mt, action, grid)?) } else { None };
    let df_int = if fano { Some(df_intersection_fano(mt, action, grid)?) } else { None };
    let df_exact = if fano { Some(df_intersection_exact(tuple, &table)?) } else { None };
    let df_coeff = match &full {
        Ok(t) => Some(df_coefficient_route(t)?),
        Err(Error::TwistInfeasible(_)) => None,
        Err(e) => return Err(Error::Invalid(e.to_string())),
    };
    let twisted = match mt.twist() {
        Some(_) => Some(futaki_twisted(mt, action, grid)?),
        None => None,
    };

    let mut deltas = Vec::new();
    let mut skipped = Vec::new();
    let mut push = |lhs: &str, rhs: &str, a: f64, b: f64| {
        let delta = (a - b).abs();
        deltas.push(RouteDelta { lhs: lhs.into(), rhs: rhs.into(), delta, ok: delta <= tol });
    };
    if let Some(f) = fut_fano {
        push("fut_coupled_integral", "fut_coupled_fano", fut_coupled, f);
    }
    if let (Some(f), Some(d)) = (fut_fano, df_int) {
        push("fut_coupled_fano", "df_intersection_route", f, d);
    }
    if let (Some(d), Some(e)) = (df_int, &df_exact) {
        push("df_intersection_route", "df_intersection_exact", d, to_f64(e));
    }
    match (&df_coeff, action.normalization) {
        (Some(c), Normalization::ZeroMean) => push("df_coefficient_route", "fut_coupled_integral", to_f64(c), fut_coupled),
        (Some(_), n) => skipped.push(format!(
            "df_coefficient_route vs fut_coupled_integral: computed under {n:?} normalization, comparison requires zero-mean"
        )),
        (None, _) => skipped.push("df_coefficient_route: difference bundle is not representable".into()),
    }
    if !fano {
        skipped.push("Fano routes: tuple is not anticanonical".into());
    }
    let routes_agree = deltas.iter().all(|d| d.ok);
    Ok(InvariantReport {
        degrees: tuple.degrees()?.iter().map(fmt_q).collect(),
        action_l: action.l.iter().map(fmt_q).collect(),
        action_shifts: action.shifts.iter().map(fmt_q).collect(),
        normalization: action.normalization,
        metric_hash: metric_hash(mt)?,
        quadrature: grid.spec,
        s_hat: fmt_q(&s_hat(tuple)?),
        fut_coupled_integral: fut_coupled,
        fut_coupled_fano: fut_fano,
        fut_classical: fmt_q(&futaki_classical(&table)),
        df_coefficient_route: df_coeff.as_ref().map(fmt_q),
        df_intersection_route: df_int,
        df_intersection_exact: df_exact.as_ref().map(fmt_q),
        fut_twisted: twisted,
        tolerance: tol,
        route_deltas: deltas,
        skipped,
        routes_agree,
    })
}
