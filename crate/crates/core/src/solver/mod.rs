//! Levenberg–Marquardt collocation solver for the coupled cscK and coupled
//! KE systems on ℂP¹.
//!
//! Unknowns are Chebyshev coefficients `T_1..T_J` of every potential. `T_0`
//! (additive constant) is never an unknown; the translation `t ↦ t + a` is
//! removed either by restricting to even potentials or by pinning the `T_1`
//! coefficient of `u_0`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom1d::{coupled_csck_residual, coupled_ke_residual, MetricTuple, Node, SymmetricPotential};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeMode {
    /// Only even `T_j`, i.e. potentials symmetric under `σ ↦ 1-σ`.
    EvenSymmetry,
    /// `T_1` of `u_0` held at zero.
    Pinning,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub nodes: usize,
    /// Basis size `J + 1`.
    pub basis: usize,
    pub max_iter: usize,
    pub tol: f64,
    /// Initial Marquardt parameter, relative to the largest squared singular value.
    pub damping: f64,
    pub damping_factor: f64,
    pub max_damping: f64,
    pub fd_step: f64,
    /// Step halvings tried along each damped direction.
    pub backtracks: usize,
    /// A step may not shrink `min u_i''/(d_i σ(1-σ))` below this fraction of its current value.
    pub boundary_fraction: f64,
    pub gauge: GaugeMode,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            nodes: 64,
            basis: 13,
            max_iter: 30,
            tol: 1e-10,
            damping: 1e-8,
            damping_factor: 10.0,
            max_damping: 1e8,
            fd_step: 1e-6,
            backtracks: 6,
            boundary_fraction: 0.25,
            gauge: GaugeMode::Pinning,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Invalid("solver tolerance must be positive".into()));
        }
        if self.basis < 3 {
            return Err(Error::Invalid("basis needs at least T_0..T_2".into()));
        }
        if self.nodes < 4 * self.basis {
            return Err(Error::Invalid(format!("need at least {} collocation nodes, got {}", 4 * self.basis, self.nodes)));
        }
        if !(self.damping_factor > 1.0) || !(self.fd_step > 0.0) {
            return Err(Error::Invalid("damping factor must exceed 1 and the FD step be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Equation {
    #[serde(rename = "coupled-csck")]
    CoupledCscK,
    #[serde(rename = "coupled-ke")]
    CoupledKE,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub residual: f64,
    pub residual_l2: f64,
    pub damping: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub metric: MetricTuple,
    pub trace: Vec<TraceRow>,
    pub iterations: usize,
    pub residual: f64,
}

impl SolveOutcome {
    pub fn trace_csv(&self) -> String {
        trace_csv(&self.trace)
    }
}

pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut s = String::from("iteration,residual,residual_l2,damping,accepted\n");
    for r in trace {
        s.push_str(&format!(
            "{},{:.6e},{:.6e},{:.3e},{}\n",
            r.iteration, r.residual, r.residual_l2, r.damping, r.accepted
        ));
    }
    s
}

/// Chebyshev–Gauss points mapped to `σ ∈ (0, 1)`.
pub fn collocation_nodes(m: usize) -> Vec<Node> {
    (0..m)
        .map(|k| {
            let x = (std::f64::consts::PI * (k as f64 + 0.5) / m as f64).cos();
            // σ = (1 - x)/2 and 1 - σ = (1 + x)/2, each without cancellation
            let half = (std::f64::consts::PI * (k as f64 + 0.5) / (2.0 * m as f64)).sin();
            let sigma = half * half;
            Node { sigma, co: if x > 0.0 { 1.0 - sigma } else { (1.0 + x) / 2.0 } }
        })
        .collect()
}

/// `(bundle, index)` pairs of the free coefficients.
fn unknowns(m: usize, cfg: &SolveConfig) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..m {
        for j in 1..cfg.basis {
            let keep = match cfg.gauge {
                GaugeMode::EvenSymmetry => j % 2 == 0,
                GaugeMode::Pinning => !(i == 0 && j == 1),
            };
            if keep {
                v.push((i, j));
            }
        }
    }
    v
}

struct Problem<'a> {
    template: &'a MetricTuple,
    base: Vec<Vec<f64>>,
    vars: Vec<(usize, usize)>,
    nodes: Vec<Node>,
    equation: Equation,
}

impl Problem<'_> {
    fn metric(&self, x: &[f64]) -> Result<MetricTuple> {
        let mut coeffs = self.base.clone();
        for (&(i, j), v) in self.vars.iter().zip(x) {
            coeffs[i][j] = *v;
        }
        let pots = coeffs
            .into_iter()
            .zip(self.template.potentials())
            .map(|(c, u)| SymmetricPotential::new(u.degree(), c))
            .collect::<Result<Vec<_>>>()?;
        self.template.with_potentials(pots)
    }

    fn residual_of(&self, mt: &MetricTuple) -> Result<DVector<f64>> {
        let v: Vec<f64> = match self.equation {
            Equation::CoupledCscK => {
                // ratio rows divided by σ(1-σ): same zeros, no degeneration at the poles
                let r = coupled_csck_residual(mt, &self.nodes)?;
                let ratio = r.ratio.into_iter().flat_map(|row| row.into_iter().zip(&self.nodes).map(|(v, n)| v / n.s()));
                ratio.chain(r.scalar).collect()
            }
            Equation::CoupledKE => coupled_ke_residual(mt, &self.nodes)?.into_iter().flatten().collect(),
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Solver("non-finite residual".into()));
        }
        Ok(DVector::from_vec(v))
    }

    fn margin(&self, x: &[f64]) -> Result<f64> {
        Ok(self.metric(x)?.potentials().iter().map(|u| u.positivity_margin()).fold(f64::INFINITY, f64::min))
    }

    fn residual(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.residual_of(&self.metric(x)?)
    }

    fn jacobian(&self, x: &[f64], rows: usize, h: f64) -> Result<DMatrix<f64>> {
        let cols = (0..x.len())
            .into_par_iter()
            .map(|c| {
                let step = h * x[c].abs().max(1.0);
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[c] += step;
                xm[c] -= step;
                // one-sided near the boundary of the Kähler cone
                match (self.residual(&xp), self.residual(&xm)) {
                    (Ok(rp), Ok(rm)) => Ok((rp - rm) / (2.0 * step)),
                    (Ok(rp), Err(Error::Positivity(_))) => Ok((rp - self.residual(x)?) / step),
                    (Err(Error::Positivity(_)), Ok(rm)) => Ok((self.residual(x)? - rm) / step),
                    (Err(e), _) | (_, Err(e)) => Err(e),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut j = DMatrix::zeros(rows, x.len());
        for (c, col) in cols.into_iter().enumerate() {
            j.set_column(c, &col);
        }
        Ok(j)
    }
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn solve(initial: &MetricTuple, cfg: &SolveConfig, equation: Equation) -> Result<SolveOutcome> {
    cfg.validate()?;
    let m = initial.len();
    let mut base = Vec::with_capacity(m);
    for (i, u) in initial.potentials().iter().enumerate() {
        if u.coeffs().len() > cfg.basis {
            return Err(Error::Invalid(format!("potential {i} has more than {} coefficients", cfg.basis)));
        }
        let mut c = u.padded(cfg.basis);
        match cfg.gauge {
            GaugeMode::EvenSymmetry => {
                if c.iter().skip(1).step_by(2).any(|v| *v != 0.0) {
                    return Err(Error::Invalid("even-symmetry gauge needs an even initial tuple".into()));
                }
            }
            GaugeMode::Pinning => {
                if i == 0 {
                    c[1] = 0.0;
                }
            }
        }
        base.push(c);
    }
    let vars = unknowns(m, cfg);
    let problem = Problem { template: initial, base: base.clone(), vars: vars.clone(), nodes: collocation_nodes(cfg.nodes), equation };
    let mut x: Vec<f64> = vars.iter().map(|&(i, j)| base[i][j]).collect();
    let mut r = problem.residual(&x)?;
    let mut trace = vec![TraceRow { iteration: 0, residual: max_abs(&r), residual_l2: r.norm(), damping: 0.0, accepted: true }];
    let mut lambda = cfg.damping;
    let mut iterations = 0;
    while max_abs(&r) >= cfg.tol {
        if iterations >= cfg.max_iter {
            return Err(Error::Solver(format!(
                "no convergence in {} iterations (residual {:.3e})",
                cfg.max_iter,
                max_abs(&r)
            )));
        }
        iterations += 1;
        let jac = problem.jacobian(&x, r.len(), cfg.fd_step)?;
        // column scaling, then SVD of the scaled Jacobian
        let scales: Vec<f64> = (0..jac.ncols()).map(|c| jac.column(c).norm().max(1e-300)).collect();
        let mut js = jac.clone();
        for (c, s) in scales.iter().enumerate() {
            js.column_mut(c).scale_mut(1.0 / s);
        }
        let svd = js.svd(true, true);
        let sv = &svd.singular_values;
        let smax = sv.max();
        if sv.min() < 1e-13 * smax {
            return Err(Error::Solver("singular Jacobian; gauge is not fixed".into()));
        }
        let u = svd.u.as_ref().expect("u requested");
        let vt = svd.v_t.as_ref().expect("v_t requested");
        let utr = u.transpose() * &r;
        let mut left_cone: Option<String> = None;
        let margin = problem.margin(&x)?;
        'damping: loop {
            let mu = lambda * smax * smax;
            let coef = DVector::from_iterator(sv.len(), (0..sv.len()).map(|k| -sv[k] * utr[k] / (sv[k] * sv[k] + mu)));
            let step = vt.transpose() * coef;
            // backtracking along the damped Gauss–Newton direction
            let mut alpha = 1.0;
            for _ in 0..=cfg.backtracks {
                let trial: Vec<f64> =
                    x.iter().zip(step.iter()).zip(&scales).map(|((a, b), s)| a + alpha * b / s).collect();
                let outcome = match problem.margin(&trial) {
                    Ok(mg) if mg < cfg.boundary_fraction * margin => {
                        Err(Error::Positivity(format!("step shrinks the positivity margin to {mg:.2e}")))
                    }
                    Ok(_) => problem.residual(&trial),
                    Err(e) => Err(e),
                };
                match outcome {
                    Ok(rt) if rt.norm() < r.norm() => {
                        x = trial;
                        r = rt;
                        trace.push(TraceRow {
                            iteration: iterations,
                            residual: max_abs(&r),
                            residual_l2: r.norm(),
                            damping: lambda,
                            accepted: true,
                        });
                        if alpha == 1.0 {
                            lambda = (lambda / cfg.damping_factor).max(1e-16);
                        }
                        break 'damping;
                    }
                    Ok(rt) => trace.push(TraceRow {
                        iteration: iterations,
                        residual: max_abs(&rt),
                        residual_l2: rt.norm(),
                        damping: lambda,
                        accepted: false,
                    }),
                    Err(Error::Positivity(msg)) => left_cone = Some(msg),
                    Err(e) => return Err(e),
                }
                alpha *= 0.5;
            }
            lambda *= cfg.damping_factor;
            if lambda > cfg.max_damping {
                return Err(match left_cone {
                    Some(msg) => Error::Positivity(format!("every damped step leaves the Kähler cone: {msg}")),
                    None => Error::Solver(format!("damping exhausted at residual {:.3e}", max_abs(&r))),
                });
            }
        }
    }
    Ok(SolveOutcome { metric: problem.metric(&x)?, trace, iterations, residual: max_abs(&r) })
}

pub fn solve_coupled_csck(initial: &MetricTuple, cfg: &SolveConfig) -> Result<SolveOutcome> {
    solve(initial, cfg, Equation::CoupledCscK)
}

pub fn solve_coupled_ke(initial: &MetricTuple, cfg: &SolveConfig) -> Result<SolveOutcome> {
    if !initial.is_fano() {
        return Err(Error::Scope("coupled KE needs a Fano tuple".into()));
    }
    solve(initial, cfg, Equation::CoupledKE)
}

/// `max_i sup_σ |(p_i^a - p_i^b)(σ) - (p_i^a - p_i^b)(½)|`, the distance of
/// potentials modulo additive constants.
pub fn sup_distance(a: &MetricTuple, b: &MetricTuple) -> f64 {
    let mid = Node::from_sigma(0.5);
    let samples = 1001;
    let mut d: f64 = 0.0;
    for (ua, ub) in a.potentials().iter().zip(b.potentials()) {
        let off = ua.jet(mid).p - ub.jet(mid).p;
        for k in 0..samples {
            let n = Node::from_sigma(k as f64 / (samples - 1) as f64);
            d = d.max((ua.jet(n).p - ub.jet(n).p - off).abs());
        }
    }
    d
}

/// Residuals below this are rounding noise and carry no rate information.
pub const ROUNDING_FLOOR: f64 = 1e-12;

/// `min log r_{k+1} / log r_k` over the last three accepted residuals above
/// [`ROUNDING_FLOOR`].
pub fn convergence_order(trace: &[TraceRow]) -> f64 {
    let acc: Vec<f64> =
        trace.iter().filter(|r| r.accepted && r.residual > ROUNDING_FLOOR).map(|r| r.residual).collect();
    if acc.len() < 3 {
        return f64::NAN;
    }
    let last = &acc[acc.len() - 3..];
    last.windows(2).map(|w| w[1].ln() / w[0].ln()).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toriclat::PolarizedTuple;

    fn round(d: &[i64]) -> MetricTuple {
        MetricTuple::round(PolarizedTuple::cp1_int(d).unwrap()).unwrap()
    }

    #[test]
    fn round_is_a_fixed_point() {
        let out = solve_coupled_csck(&round(&[1, 1]), &SolveConfig::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.residual < 1e-12);
    }

    #[test]
    fn recovers_round_from_perturbation() {
        let start = round(&[1, 1]).perturbed(&[vec![], vec![0.0, 0.0, 0.05]], 1.0).unwrap();
        let out = solve_coupled_csck(&start, &SolveConfig::default()).unwrap();
        assert!(out.residual < 1e-10);
        assert!(out.iterations <= 15);
        assert!(sup_distance(&out.metric, &round(&[1, 1])) < 1e-6);
        let even = solve_coupled_csck(&start, &SolveConfig { gauge: GaugeMode::EvenSymmetry, ..Default::default() }).unwrap();
        assert!(sup_distance(&out.metric, &even.metric) < 1e-6);
    }

    #[test]
    fn ke_sphere_and_coupled_ke() {
        let start = round(&[2]).perturbed(&[vec![0.0, 0.0, 0.05, 0.0, 0.01]], 1.0).unwrap();
        let out = solve_coupled_csck(&start, &SolveConfig::default()).unwrap();
        assert!(sup_distance(&out.metric, &round(&[2])) < 1e-6);
        let start = round(&[1, 1]).perturbed(&[vec![0.0, 0.02, 0.05], vec![0.0, -0.03, 0.0, 0.05]], 1.0).unwrap();
        let out = solve_coupled_ke(&start, &SolveConfig::default()).unwrap();
        assert!(sup_distance(&out.metric, &round(&[1, 1])) < 1e-6);
        let csck = coupled_csck_residual(&out.metric, &collocation_nodes(64)).unwrap();
        assert!(csck.max_abs() < 1e-9);
    }

    #[test]
    fn quadratic_convergence() {
        let start = round(&[1, 1]).perturbed(&[vec![0.0, 0.0, 0.01, 0.005], vec![0.0, 0.01, 0.01]], 1.0).unwrap();
        let out = solve_coupled_csck(&start, &SolveConfig::default()).unwrap();
        assert!(convergence_order(&out.trace) >= 1.7, "{}", convergence_order(&out.trace));
    }

    #[test]
    fn rejects_bad_config_and_odd_start_in_even_gauge() {
        let cfg = SolveConfig { nodes: 10, ..Default::default() };
        assert!(solve_coupled_csck(&round(&[1, 1]), &cfg).is_err());
        let odd = round(&[1, 1]).perturbed(&[vec![0.0, 0.0, 0.0, 0.02]], 1.0).unwrap();
        let cfg = SolveConfig { gauge: GaugeMode::EvenSymmetry, ..Default::default() };
        assert!(solve_coupled_csck(&odd, &cfg).is_err());
        assert!(matches!(solve_coupled_ke(&round(&[1, 2]), &SolveConfig::default()), Err(Error::Scope(_))));
    }
}
