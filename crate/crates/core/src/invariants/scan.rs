//! Metric-independence scans along `φ_i + s·η_i`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom1d::{Grid, MetricTuple};
use crate::toriclat::TorusAction;

use super::df::df_intersection_fano;
use super::futaki::{futaki_coupled, futaki_fano, futaki_twisted};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvariantKind {
    Coupled,
    Fano,
    DfIntersection,
    Twisted,
}

pub fn evaluate(kind: InvariantKind, mt: &MetricTuple, action: &TorusAction, grid: &Grid) -> Result<f64> {
    match kind {
        InvariantKind::Coupled => futaki_coupled(mt, action, grid),
        InvariantKind::Fano => futaki_fano(mt, action, grid),
        InvariantKind::DfIntersection => df_intersection_fano(mt, action, grid),
        InvariantKind::Twisted => Ok(futaki_twisted(mt, action, grid)?.value),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub kind: InvariantKind,
    /// `(s, f(s))`.
    pub values: Vec<(f64, f64)>,
    pub max_deviation: f64,
}

/// Evaluates `kind` along `u_i + s·η_i` and reports `max_s |f(s) - f(s_0)|`.
///
/// The Hamiltonians follow the metrics automatically since `θ_i = ℓu_i' + c_i`.
pub fn invariance_scan(
    base: &MetricTuple,
    action: &TorusAction,
    directions: &[Vec<f64>],
    s_values: &[f64],
    kind: InvariantKind,
    grid: &Grid,
) -> Result<ScanResult> {
    let values = s_values
        .par_iter()
        .map(|&s| {
            let mt = base.perturbed(directions, s)?;
            Ok((s, evaluate(kind, &mt, action, grid)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let f0 = values.first().map(|v| v.1).unwrap_or(0.0);
    let max_deviation = values.iter().fold(0.0f64, |a, v| a.max((v.1 - f0).abs()));
    Ok(ScanResult { kind, values, max_deviation })
}
