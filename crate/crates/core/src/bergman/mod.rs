//! Twisted Bergman kernels of `L_0^k ⊗ L^{-1}` on ℂP¹ for invariant metrics.
//!
//! Sections are the monomials `z^j`, `0 <= j <= N = k·d_0 - d`, which are
//! orthogonal for rotation-invariant metrics. In `σ`-coordinates
//!
//! ```text
//! |z^j|² e^{-k u_0 + u} = σ^j (1-σ)^{N-j} e^{-k p_0(σ) + P(σ)}
//! ```
//!
//! and all norms are one-dimensional integrals.

mod expansion;

pub use expansion::{expansion_report, fit_exponent, ExpansionReport, ExpansionRow};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom1d::{action_f64, Grid, MetricTuple, Node, QuadratureSpec};
use crate::rational::{serde_fixed, serde_fixed_vec, to_f64};
use crate::toriclat::TorusAction;

use std::f64::consts::PI;

/// Truncation used for the norm integrals at level `k`.
pub fn cutoff_for(k: u32, base: f64) -> f64 {
    base.max(10.0 + 2.0 * (k as f64).sqrt())
}

/// Section count `k·d_0 - d`, plus one.
pub fn section_count(mt: &MetricTuple, k: u32) -> Result<usize> {
    let degs = mt.tuple().degrees()?;
    let n = crate::rational::q(k as i64) * &degs[0] - degs.iter().fold(crate::rational::q(0), |a, b| a + b);
    if !n.is_integer() {
        return Err(Error::Invalid("section spaces need integral degrees".into()));
    }
    let n = to_f64(&n).round() as i64;
    if n < 0 {
        return Err(Error::TwistInfeasible(format!("H^0(L_0^{k} ⊗ L^-1) = 0: k·d_0 - d = {n}")));
    }
    Ok(n as usize + 1)
}

/// Precomputed pieces of `log |z^j|²` at a node.
#[derive(Clone, Copy)]
struct LogParts {
    ln_s: f64,
    ln_co: f64,
    rest: f64,
}

impl LogParts {
    fn new(mt: &MetricTuple, k: u32, node: Node) -> Self {
        let p0 = mt.potential(0).jet(node).p;
        Self { ln_s: node.sigma.ln(), ln_co: node.co.ln(), rest: -(k as f64) * p0 + mt.total_p(node) }
    }

    fn log_section(&self, j: usize, top: usize) -> f64 {
        let a = if j == 0 { 0.0 } else { j as f64 * self.ln_s };
        let b = if j == top { 0.0 } else { (top - j) as f64 * self.ln_co };
        a + b + self.rest
    }
}

fn log_norms(mt: &MetricTuple, k: u32, grid: &Grid) -> Result<Vec<f64>> {
    let count = section_count(mt, k)?;
    let top = count - 1;
    let parts: Vec<LogParts> = grid.nodes.iter().map(|n| LogParts::new(mt, k, *n)).collect();
    let g0: Vec<f64> = grid.nodes.iter().map(|n| mt.potential(0).jet(*n).g).collect();
    let scale = (2.0 * PI * k as f64).ln();
    (0..count)
        .into_par_iter()
        .map(|j| {
            let logs: Vec<f64> = parts.iter().map(|p| p.log_section(j, top)).collect();
            let mx = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let vals: Vec<f64> = logs.iter().zip(&g0).map(|(l, g)| (l - mx).exp() * g).collect();
            let v = grid.integrate_dsigma(&vals)?;
            if !(v > 0.0) {
                return Err(Error::Quadrature(format!("section norm {j} is not positive")));
            }
            Ok(scale + mx + v.ln())
        })
        .collect()
}

fn norm_grid(spec: QuadratureSpec, k: u32) -> Result<Grid> {
    Grid::new(QuadratureSpec { cutoff: cutoff_for(k, spec.cutoff), ..spec })
}

/// `N_j = 2π∫|z^j|² e^{-k u_0 + u} k u_0'' dt`.
pub fn section_norms(mt: &MetricTuple, k: u32, spec: QuadratureSpec) -> Result<Vec<f64>> {
    Ok(log_norms(mt, k, &norm_grid(spec, k)?)?.into_iter().map(f64::exp).collect())
}

/// `C*`-weights of the monomial sections: `λ_j = -(ℓj + k c_0 - Σc_i)`.
pub fn eigenweights(mt: &MetricTuple, action: &TorusAction, k: u32) -> Result<Vec<f64>> {
    let count = section_count(mt, k)?;
    let (l, c) = action_f64(action, mt)?;
    let shift = k as f64 * c[0] - c.iter().sum::<f64>();
    Ok((0..count).map(|j| -(l * j as f64 + shift)).collect())
}

/// Default sample points: `σ = (i + ½)/m`.
pub fn sample_nodes(m: usize) -> Vec<Node> {
    (0..m).map(|i| Node::from_sigma((i as f64 + 0.5) / m as f64)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct BergmanSample {
    pub k: u32,
    #[serde(with = "serde_fixed_vec")]
    pub t: Vec<f64>,
    /// `(2π)ρ_k`.
    #[serde(with = "serde_fixed_vec")]
    pub rho: Vec<f64>,
    /// `(2π)ρ_k^{S¹}`.
    #[serde(with = "serde_fixed_vec")]
    pub rho_equivariant: Vec<f64>,
    /// `1 + (S_0/2 - tr_{ω_0}ω)/k`.
    #[serde(with = "serde_fixed_vec")]
    pub rho_prediction: Vec<f64>,
    /// `-θ_0 - [θ_0(S_0/2 - tr_{ω_0}ω) - θ]/k`.
    #[serde(with = "serde_fixed_vec")]
    pub equivariant_prediction: Vec<f64>,
    #[serde(with = "serde_fixed_vec")]
    pub theta0: Vec<f64>,
    #[serde(with = "serde_fixed_vec")]
    pub norms: Vec<f64>,
    #[serde(with = "serde_fixed_vec")]
    pub weights: Vec<f64>,
    /// `∫ρ_k (kω_0)`, which should equal the section count.
    #[serde(with = "serde_fixed")]
    pub trace_dimension: f64,
    /// `k∫ρ_k^{S¹}(kω_0) = Σλ_j`.
    #[serde(with = "serde_fixed")]
    pub trace_weight: f64,
}

impl BergmanSample {
    fn sup(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    pub fn rho_residual(&self) -> f64 {
        Self::sup(&self.rho, &self.rho_prediction)
    }

    pub fn rho_deviation(&self) -> f64 {
        self.rho.iter().fold(0.0, |m, x| m.max((x - 1.0).abs()))
    }

    pub fn rho_spread(&self) -> f64 {
        let mx = self.rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mn = self.rho.iter().cloned().fold(f64::INFINITY, f64::min);
        mx - mn
    }

    /// `sup |(2π)ρ^{S¹} + θ_0|`.
    pub fn equivariant_leading(&self) -> f64 {
        let neg: Vec<f64> = self.theta0.iter().map(|x| -x).collect();
        Self::sup(&self.rho_equivariant, &neg)
    }

    pub fn equivariant_residual(&self) -> f64 {
        Self::sup(&self.rho_equivariant, &self.equivariant_prediction)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,rho,rho_prediction,rho_residual,rho_eq,rho_eq_prediction,rho_eq_residual\n");
        for i in 0..self.t.len() {
            out.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                self.t[i],
                self.rho[i],
                self.rho_prediction[i],
                self.rho[i] - self.rho_prediction[i],
                self.rho_equivariant[i],
                self.equivariant_prediction[i],
                self.rho_equivariant[i] - self.equivariant_prediction[i]
            ));
        }
        out
    }
}

/// Evaluates `ρ_k`, `ρ_k^{S¹}` and their first-order predictions at `nodes`.
pub fn bergman_sample(
    mt: &MetricTuple,
    action: &TorusAction,
    k: u32,
    nodes: &[Node],
    spec: QuadratureSpec,
) -> Result<BergmanSample> {
    let grid = norm_grid(spec, k)?;
    let log_n = log_norms(mt, k, &grid)?;
    let weights = eigenweights(mt, action, k)?;
    let top = log_n.len() - 1;
    let kf = k as f64;
    let (l, c) = action_f64(action, mt)?;
    let cs: f64 = c.iter().sum();

    let density = |node: Node| -> (f64, f64) {
        let parts = LogParts::new(mt, k, node);
        let mut rho = 0.0;
        let mut eq = 0.0;
        for (j, ln) in log_n.iter().enumerate() {
            let v = (parts.log_section(j, top) - ln).exp();
            rho += v;
            eq += weights[j] * v;
        }
        (2.0 * PI * rho, 2.0 * PI * eq / kf)
    };

    let mut out = BergmanSample {
        k,
        t: Vec::new(),
        rho: Vec::new(),
        rho_equivariant: Vec::new(),
        rho_prediction: Vec::new(),
        equivariant_prediction: Vec::new(),
        theta0: Vec::new(),
        norms: log_n.iter().map(|x| x.exp()).collect(),
        weights: weights.clone(),
        trace_dimension: 0.0,
        trace_weight: 0.0,
    };
    for &node in nodes {
        let jets = mt.jets(node);
        let (rho, eq) = density(node);
        let s_half = jets[0].scalar_curvature() / 2.0;
        let tr = MetricTuple::total_g(&jets) / jets[0].g;
        let theta0 = l * jets[0].du() + c[0];
        let theta: f64 = jets.iter().map(|j| l * j.du()).sum::<f64>() + cs;
        out.t.push(node.t());
        out.rho.push(rho);
        out.rho_equivariant.push(eq);
        out.rho_prediction.push(1.0 + (s_half - tr) / kf);
        out.equivariant_prediction.push(-theta0 - (theta0 * (s_half - tr) - theta) / kf);
        out.theta0.push(theta0);
    }
    // trace identities over the norm grid: (2π)ρ · k g_0 dσ
    let mut dim = Vec::with_capacity(grid.len());
    let mut wt = Vec::with_capacity(grid.len());
    for &node in &grid.nodes {
        let (rho, eq) = density(node);
        let g0 = mt.potential(0).jet(node).g;
        dim.push(rho * kf * g0);
        wt.push(eq * kf * kf * g0);
    }
    out.trace_dimension = grid.integrate_dsigma(&dim)?;
    out.trace_weight = grid.integrate_dsigma(&wt)?;
    Ok(out)
}

/// `(2π)ρ_k` at `nodes`.
pub fn rho_k(mt: &MetricTuple, k: u32, nodes: &[Node], spec: QuadratureSpec) -> Result<Vec<f64>> {
    let triv = TorusAction::trivial(mt.tuple());
    Ok(bergman_sample(mt, &triv, k, nodes, spec)?.rho)
}

/// `(2π)ρ_k^{S¹}` at `nodes`.
pub fn rho_k_equivariant(
    mt: &MetricTuple,
    action: &TorusAction,
    k: u32,
    nodes: &[Node],
    spec: QuadratureSpec,
) -> Result<Vec<f64>> {
    Ok(bergman_sample(mt, action, k, nodes, spec)?.rho_equivariant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::toriclat::PolarizedTuple;

    fn round12() -> MetricTuple {
        MetricTuple::round(PolarizedTuple::cp1_int(&[1, 1]).unwrap()).unwrap()
    }

    #[test]
    fn norms_count_symmetry_positivity() {
        let mt = round12();
        let n = section_norms(&mt, 10, QuadratureSpec::default()).unwrap();
        assert_eq!(n.len(), 9);
        assert!(n.iter().all(|&x| x > 0.0));
        for j in 0..9 {
            assert!((n[j] / n[8 - j] - 1.0).abs() < 1e-10);
        }
        // round: N_j = 2πk·B(j+1, N-j+1)
        let beta = |a: f64, b: f64| {
            let (la, lb, lab) = (ln_gamma(a), ln_gamma(b), ln_gamma(a + b));
            (la + lb - lab).exp()
        };
        for (j, v) in n.iter().enumerate() {
            let expect = 2.0 * PI * 10.0 * beta(j as f64 + 1.0, 8.0 - j as f64 + 1.0);
            assert!((v / expect - 1.0).abs() < 1e-10);
        }
    }

    fn ln_gamma(x: f64) -> f64 {
        // integer arguments only
        (1..x.round() as i64).map(|i| (i as f64).ln()).sum()
    }

    #[test]
    fn empty_section_space() {
        let mt = round12();
        assert!(matches!(section_norms(&mt, 1, QuadratureSpec::default()), Err(Error::TwistInfeasible(_))));
    }

    #[test]
    fn round_density_constant() {
        let mt = round12();
        let a = TorusAction::new(vec![q(1)], vec![q(0), q(0)]).unwrap();
        let nodes = sample_nodes(101);
        for k in [5u32, 10, 20] {
            let s = bergman_sample(&mt, &a, k, &nodes, QuadratureSpec::default()).unwrap();
            let expect = (k as f64 - 1.0) / k as f64;
            assert!(s.rho.iter().all(|r| (r - expect).abs() < 1e-8));
            assert!(s.rho_residual() < 1e-8);
            assert!(s.rho_spread() < 1e-9);
            assert!((s.trace_dimension - (k - 1) as f64).abs() < 1e-8);
            let w: f64 = s.weights.iter().sum();
            assert!((s.trace_weight - w).abs() < 1e-6 * w.abs());
            // closed form -(k-1)(k-2)σ/k²
            let kf = k as f64;
            for (t, e) in s.t.iter().zip(&s.rho_equivariant) {
                let sigma = 1.0 / (1.0 + (-t).exp());
                assert!((e + (kf - 1.0) * (kf - 2.0) * sigma / (kf * kf)).abs() < 1e-9);
            }
        }
    }
}
