//! Tuples of invariant metrics on ℂP¹ and the residuals of the metric
//! equations.

use serde::{Deserialize, Serialize};

use super::potential::{Jet, SymmetricPotential};
use super::quadrature::{Grid, Node};
use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_q, to_f64, Q};
use crate::toriclat::{s_hat, Model, PolarizedTuple, TorusAction};

/// Reference data `ψ_i` of a twisted equation.
#[derive(Clone, Debug, PartialEq)]
pub enum TwistRef {
    Smooth(SymmetricPotential),
    /// `β = α·[0] + (d - α)·[∞]`, i.e. `ψ = α·t` up to a bounded term.
    PoleCurrent { mass_at_zero: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Twist {
    pub t: f64,
    pub refs: Vec<TwistRef>,
}

#[derive(Clone, Debug)]
pub struct MetricTuple {
    tuple: PolarizedTuple,
    potentials: Vec<SymmetricPotential>,
    twist: Option<Twist>,
}

impl MetricTuple {
    pub fn new(tuple: PolarizedTuple, potentials: Vec<SymmetricPotential>) -> Result<Self> {
        if tuple.model() != Model::Cp1 {
            return Err(Error::Scope("metric tuples are supported on CP1 only".into()));
        }
        if potentials.len() != tuple.len() {
            return Err(Error::Invalid(format!(
                "{} potentials for {} bundles",
                potentials.len(),
                tuple.len()
            )));
        }
        for (i, (u, d)) in potentials.iter().zip(tuple.degrees()?).enumerate() {
            if (u.degree() - to_f64(&d)).abs() > 1e-12 {
                return Err(Error::Invalid(format!("potential {i} has degree {} but L_{i} has {}", u.degree(), fmt_q(&d))));
            }
        }
        Ok(Self { tuple, potentials, twist: None })
    }

    pub fn round(tuple: PolarizedTuple) -> Result<Self> {
        let pots = tuple
            .degrees()?
            .iter()
            .map(|d| SymmetricPotential::round(to_f64(d)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(tuple, pots)
    }

    pub fn round_from_degrees(degrees: &[Q]) -> Result<Self> {
        Self::round(PolarizedTuple::cp1(degrees)?)
    }

    pub fn with_twist(mut self, t: f64, refs: Vec<TwistRef>) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Invalid(format!("twist parameter {t} outside [0, 1]")));
        }
        if refs.len() != self.potentials.len() {
            return Err(Error::Invalid("one twist reference per bundle required".into()));
        }
        for (r, u) in refs.iter().zip(&self.potentials) {
            match r {
                TwistRef::Smooth(p) if (p.degree() - u.degree()).abs() > 1e-12 => {
                    return Err(Error::Invalid("twist reference degree mismatch".into()))
                }
                TwistRef::PoleCurrent { mass_at_zero: a } if !(0.0..=u.degree()).contains(a) => {
                    return Err(Error::Invalid(format!("pole mass {a} outside [0, {}]", u.degree())))
                }
                _ => {}
            }
        }
        self.twist = Some(Twist { t, refs });
        Ok(self)
    }

    /// Replaces the potentials, keeping the tuple and the twist.
    pub fn with_potentials(&self, potentials: Vec<SymmetricPotential>) -> Result<Self> {
        let mut m = Self::new(self.tuple.clone(), potentials)?;
        m.twist = self.twist.clone();
        Ok(m)
    }

    /// `u_i + s·η_i` for every bundle.
    pub fn perturbed(&self, directions: &[Vec<f64>], s: f64) -> Result<Self> {
        let pots = self
            .potentials
            .iter()
            .enumerate()
            .map(|(i, u)| match directions.get(i) {
                Some(eta) => u.add_scaled(eta, s),
                None => Ok(u.clone()),
            })
            .collect::<Result<Vec<_>>>()?;
        self.with_potentials(pots)
    }

    pub fn tuple(&self) -> &PolarizedTuple {
        &self.tuple
    }

    pub fn potentials(&self) -> &[SymmetricPotential] {
        &self.potentials
    }

    pub fn potential(&self, i: usize) -> &SymmetricPotential {
        &self.potentials[i]
    }

    pub fn twist(&self) -> Option<&Twist> {
        self.twist.as_ref()
    }

    pub fn len(&self) -> usize {
        self.potentials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potentials.is_empty()
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.potentials.iter().map(|u| u.degree()).collect()
    }

    pub fn total_degree(&self) -> f64 {
        self.degrees().iter().sum()
    }

    pub fn is_fano(&self) -> bool {
        self.tuple.is_fano()
    }

    pub fn s_hat(&self) -> Result<f64> {
        Ok(to_f64(&s_hat(&self.tuple)?))
    }

    fn require_fano(&self, what: &str) -> Result<()> {
        if self.is_fano() {
            Ok(())
        } else {
            Err(Error::Scope(format!("{what} requires a Fano tuple (total degree 2)")))
        }
    }

    /// Jets of every potential at one node.
    pub fn jets(&self, node: Node) -> Vec<Jet> {
        self.potentials.iter().map(|u| u.jet(node)).collect()
    }

    /// `Σ_i g_i = Σ_i u_i''/(σ(1-σ))`.
    pub fn total_g(jets: &[Jet]) -> f64 {
        jets.iter().map(|j| j.g).sum()
    }

    /// `Σ_i p_i(σ)`.
    pub fn total_p(&self, node: Node) -> f64 {
        self.potentials.iter().map(|u| u.jet(node).p).sum()
    }

    /// The sum potential `u = Σ u_i` as a single potential of degree `Σ d_i`.
    pub fn sum_potential(&self) -> Result<SymmetricPotential> {
        let len = self.potentials.iter().map(|u| u.coeffs().len()).max().unwrap_or(0);
        let mut c = vec![0.0; len];
        for u in &self.potentials {
            for (a, b) in c.iter_mut().zip(u.coeffs()) {
                *a += b;
            }
        }
        SymmetricPotential::new(self.total_degree(), c)
    }
}

/// `θ_i` at a jet.
pub fn hamiltonian_at(jet: &Jet, l: f64, c: f64) -> f64 {
    l * jet.du() + c
}

fn action_parts(action: &TorusAction, m: usize) -> Result<(f64, Vec<f64>)> {
    let l = action.l_f64();
    if l.len() != 1 {
        return Err(Error::Dimension("a CP1 action needs exactly one weight".into()));
    }
    let c = action.shifts_f64();
    if c.len() != m {
        return Err(Error::Invalid(format!("{} shifts for {m} bundles", c.len())));
    }
    Ok((l[0], c))
}

pub(crate) fn action_f64(action: &TorusAction, mt: &MetricTuple) -> Result<(f64, Vec<f64>)> {
    action_parts(action, mt.len())
}

/// Residuals of the coupled cscK system on a node set.
#[derive(Clone, Debug, Serialize)]
pub struct CscKResidual {
    /// `r_i = u_i''/d_i - u_0''/d_0`, `i = 1..m`.
    pub ratio: Vec<Vec<f64>>,
    /// `r_0 = S(u_0) - Σ u_i''/u_0'' - Ŝ`.
    pub scalar: Vec<f64>,
}

impl CscKResidual {
    pub fn max_abs(&self) -> f64 {
        self.ratio
            .iter()
            .flatten()
            .chain(&self.scalar)
            .fold(0.0, |a, v| a.max(v.abs()))
    }
}

pub fn coupled_csck_residual(mt: &MetricTuple, nodes: &[Node]) -> Result<CscKResidual> {
    let s_hat = mt.s_hat()?;
    let d = mt.degrees();
    let m = mt.len();
    let mut ratio = vec![Vec::with_capacity(nodes.len()); m - 1];
    let mut scalar = Vec::with_capacity(nodes.len());
    for &node in nodes {
        let jets = mt.jets(node);
        let s = node.s();
        for i in 1..m {
            ratio[i - 1].push(s * (jets[i].g / d[i] - jets[0].g / d[0]));
        }
        scalar.push(jets[0].scalar_curvature() - MetricTuple::total_g(&jets) / jets[0].g - s_hat);
    }
    Ok(CscKResidual { ratio, scalar })
}

/// `∫ r_0 u_0'' dt`.
pub fn integrated_scalar_residual(mt: &MetricTuple, grid: &Grid) -> Result<f64> {
    let r = coupled_csck_residual(mt, &grid.nodes)?;
    let vals: Vec<f64> = grid.nodes.iter().zip(&r.scalar).map(|(n, r)| r * mt.potential(0).jet(*n).g).collect();
    grid.integrate_dsigma(&vals)
}

/// `ρ_i - Σ_j u_j''` per bundle.
pub fn coupled_ke_residual(mt: &MetricTuple, nodes: &[Node]) -> Result<Vec<Vec<f64>>> {
    mt.require_fano("the coupled KE residual")?;
    let mut out = vec![Vec::with_capacity(nodes.len()); mt.len()];
    for &node in nodes {
        let jets = mt.jets(node);
        let g = MetricTuple::total_g(&jets);
        for (i, j) in jets.iter().enumerate() {
            out[i].push(node.s() * (j.ricci_over_s() - g));
        }
    }
    Ok(out)
}

/// `Q = t·Σp_i + (1-t)·Σp(ψ_i)`, so that the twisted anticanonical density
/// is `σ(1-σ)·e^{-Q}` in `dt`.
fn twisted_exponent(mt: &MetricTuple, twist: &Twist, node: Node) -> Result<f64> {
    let mut psi = 0.0;
    for r in &twist.refs {
        match r {
            TwistRef::Smooth(p) => psi += p.jet(node).p,
            TwistRef::PoleCurrent { .. } => {
                return Err(Error::Scope("twisted KE residual needs smooth references".into()))
            }
        }
    }
    Ok(twist.t * mt.total_p(node) + (1.0 - twist.t) * psi)
}

/// `u_i''/d_i - e^{-tφ-(1-t)ψ}/∫e^{-tφ-(1-t)ψ}` per bundle.
pub fn twisted_ke_residual(mt: &MetricTuple, nodes: &[Node], grid: &Grid) -> Result<Vec<Vec<f64>>> {
    mt.require_fano("the twisted KE residual")?;
    let twist = mt.twist().ok_or_else(|| Error::Invalid("no twist data".into()))?;
    let qs = grid.nodes.iter().map(|n| twisted_exponent(mt, twist, *n)).collect::<Result<Vec<_>>>()?;
    let q0 = qs.iter().cloned().fold(f64::INFINITY, f64::min);
    let z = grid.integrate_dsigma(&qs.iter().map(|q| (q0 - q).exp()).collect::<Vec<_>>())?;
    let d = mt.degrees();
    let mut out = vec![Vec::with_capacity(nodes.len()); mt.len()];
    for &node in nodes {
        let dens = (q0 - twisted_exponent(mt, twist, node)?).exp() / z;
        for (i, j) in mt.jets(node).iter().enumerate() {
            out[i].push(node.s() * (j.g / d[i] - dens));
        }
    }
    Ok(out)
}

/// Normalized density of the twisted measure, `∫ · dσ = 1`; exposed for tests.
pub fn twisted_density(mt: &MetricTuple, grid: &Grid) -> Result<Vec<f64>> {
    let twist = mt.twist().ok_or_else(|| Error::Invalid("no twist data".into()))?;
    let qs = grid.nodes.iter().map(|n| twisted_exponent(mt, twist, *n)).collect::<Result<Vec<_>>>()?;
    let q0 = qs.iter().cloned().fold(f64::INFINITY, f64::min);
    let e: Vec<f64> = qs.iter().map(|q| (q0 - q).exp()).collect();
    let z = grid.integrate_dsigma(&e)?;
    Ok(e.into_iter().map(|v| v / z).collect())
}

/// Ricci potential `h_0` of `ω_0` relative to `ω = Σω_i`, normalized by
/// `∫e^{h_0}ω_0 = V_0`.
#[derive(Clone, Debug)]
pub struct RicciPotential {
    pub b: f64,
}

impl RicciPotential {
    pub fn at(&self, mt: &MetricTuple, node: Node) -> f64 {
        -mt.potential(0).jet(node).g.ln() - mt.total_p(node) + self.b
    }
}

pub fn ricci_potential(mt: &MetricTuple, grid: &Grid) -> Result<RicciPotential> {
    mt.require_fano("the Ricci potential")?;
    let z = grid.quad(|n| (-mt.total_p(*n)).exp())?;
    Ok(RicciPotential { b: mt.degrees()[0].ln() - z.ln() })
}

/// `∫θ e^{-φ} / ∫e^{-φ}` with `θ = Σθ_i`.
pub fn anticanonical_mean(mt: &MetricTuple, action: &TorusAction, grid: &Grid) -> Result<f64> {
    mt.require_fano("the anticanonical measure")?;
    let (l, c) = action_f64(action, mt)?;
    let cs: f64 = c.iter().sum();
    let mut num = Vec::with_capacity(grid.len());
    let mut den = Vec::with_capacity(grid.len());
    for &n in &grid.nodes {
        let jets = mt.jets(n);
        let e = (-jets.iter().map(|j| j.p).sum::<f64>()).exp();
        let theta: f64 = jets.iter().map(|j| l * j.du()).sum::<f64>() + cs;
        num.push(theta * e);
        den.push(e);
    }
    Ok(grid.integrate_dsigma(&num)? / grid.integrate_dsigma(&den)?)
}

/// `sup |Δ_ω θ + θ + w(h_ω) - ∫θe^{-φ}/∫e^{-φ}|` for `ω = Σω_i`.
pub fn key_identity_residual(mt: &MetricTuple, action: &TorusAction, nodes: &[Node], grid: &Grid) -> Result<f64> {
    let constant = anticanonical_mean(mt, action, grid)?;
    let (l, c) = action_f64(action, mt)?;
    let cs: f64 = c.iter().sum();
    let u = mt.sum_potential()?;
    let mut sup: f64 = 0.0;
    for &n in nodes {
        let j = u.jet(n);
        let lap = l * j.dlog_ddu();
        let theta = l * j.du() + cs;
        // h_ω = -log u'' - u + t + const, so w(h) = ℓ·s·(-g_σ/g - p_σ)
        let wh = l * n.s() * (-j.g1 / j.g - j.p1);
        sup = sup.max((lap + theta + wh - constant).abs());
    }
    Ok(sup)
}

/// On-disk shape of a metric tuple.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricJson {
    pub degrees: Vec<String>,
    #[serde(default)]
    pub coeffs: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<TwistJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistJson {
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pole_masses: Option<Vec<f64>>,
}

impl MetricJson {
    pub fn build(&self) -> Result<MetricTuple> {
        let degrees = self.degrees.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>>>()?;
        let tuple = PolarizedTuple::cp1(&degrees)?;
        if !self.coeffs.is_empty() && self.coeffs.len() != degrees.len() {
            return Err(Error::Invalid("coeffs must list one series per bundle".into()));
        }
        let pots = degrees
            .iter()
            .enumerate()
            .map(|(i, d)| SymmetricPotential::new(to_f64(d), self.coeffs.get(i).cloned().unwrap_or_default()))
            .collect::<Result<Vec<_>>>()?;
        let mt = MetricTuple::new(tuple, pots)?;
        match &self.twist {
            None => Ok(mt),
            Some(tw) => {
                let refs = match (&tw.coeffs, &tw.pole_masses) {
                    (Some(_), Some(_)) => {
                        return Err(Error::Invalid("twist takes either coeffs or pole_masses".into()))
                    }
                    (_, Some(a)) => a.iter().map(|&a| TwistRef::PoleCurrent { mass_at_zero: a }).collect(),
                    (c, None) => {
                        let c = c.clone().unwrap_or_default();
                        degrees
                            .iter()
                            .enumerate()
                            .map(|(i, d)| {
                                SymmetricPotential::new(to_f64(d), c.get(i).cloned().unwrap_or_default())
                                    .map(TwistRef::Smooth)
                            })
                            .collect::<Result<Vec<_>>>()?
                    }
                };
                mt.with_twist(tw.t, refs)
            }
        }
    }

    pub fn from_metric(mt: &MetricTuple) -> Result<Self> {
        let degrees = mt.tuple().degrees()?.iter().map(fmt_q).collect();
        let coeffs = mt.potentials().iter().map(|u| u.coeffs().to_vec()).collect();
        let twist = mt.twist().map(|tw| {
            let smooth: Option<Vec<Vec<f64>>> = tw
                .refs
                .iter()
                .map(|r| match r {
                    TwistRef::Smooth(p) => Some(p.coeffs().to_vec()),
                    TwistRef::PoleCurrent { .. } => None,
                })
                .collect();
            let poles = if smooth.is_none() {
                Some(
                    tw.refs
                        .iter()
                        .map(|r| match r {
                            TwistRef::PoleCurrent { mass_at_zero } => *mass_at_zero,
                            TwistRef::Smooth(_) => 0.0,
                        })
                        .collect(),
                )
            } else {
                None
            };
            TwistJson { t: tw.t, coeffs: smooth, pole_masses: poles }
        });
        Ok(Self { degrees, coeffs, twist })
    }
}

/// CSV dump with a leading `t` column.
pub fn grid_csv(nodes: &[Node], columns: &[(&str, &[f64])]) -> String {
    let mut out = String::from("t");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (k, n) in nodes.iter().enumerate() {
        out.push_str(&format!("{:.12e}", n.t()));
        for (_, col) in columns {
            out.push_str(&format!(",{:.12e}", col[k]));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn grid() -> Grid {
        Grid::default_grid()
    }

    #[test]
    fn round_tuple_solves_everything() {
        let mt = MetricTuple::round(PolarizedTuple::cp1_int(&[1, 1]).unwrap()).unwrap();
        let g = grid();
        let r = coupled_csck_residual(&mt, &g.nodes).unwrap();
        assert!(r.max_abs() < 1e-12);
        let ke = coupled_ke_residual(&mt, &g.nodes).unwrap();
        assert!(ke.iter().flatten().all(|v| v.abs() < 1e-12));
        let h = ricci_potential(&mt, &g).unwrap();
        assert!(h.b.abs() < 1e-12);
    }

    #[test]
    fn ke_sphere() {
        let mt = MetricTuple::round(PolarizedTuple::cp1_int(&[2]).unwrap()).unwrap();
        let ke = coupled_ke_residual(&mt, &grid().nodes).unwrap();
        assert!(ke[0].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn perturbation_is_detected_and_scalar_residual_integrates_to_zero() {
        let mt = MetricTuple::round(PolarizedTuple::cp1_int(&[1, 1]).unwrap()).unwrap();
        let mt = mt.perturbed(&[vec![], vec![0.0, 0.0, 0.1]], 1.0).unwrap();
        let g = grid();
        let r = coupled_csck_residual(&mt, &g.nodes).unwrap();
        assert!(r.ratio[0].iter().fold(0.0f64, |a, v| a.max(v.abs())) > 1e-3);
        assert!(integrated_scalar_residual(&mt, &g).unwrap().abs() < 1e-8);
        let mt3 = MetricTuple::round(PolarizedTuple::cp1_int(&[3, 2]).unwrap()).unwrap();
        let mt3 = mt3.perturbed(&[vec![0.0, 0.1, 0.05, 0.03], vec![0.0, -0.1, 0.0, 0.02]], 1.0).unwrap();
        assert!(integrated_scalar_residual(&mt3, &g).unwrap().abs() < 1e-8);
    }

    #[test]
    fn non_fano_rejected() {
        let mt = MetricTuple::round(PolarizedTuple::cp1_int(&[1, 2]).unwrap()).unwrap();
        assert!(matches!(coupled_ke_residual(&mt, &grid().nodes), Err(Error::Scope(_))));
        assert!(matches!(ricci_potential(&mt, &grid()), Err(Error::Scope(_))));
    }

    #[test]
    fn ricci_potential_bounded_and_normalized() {
        let mt = MetricTuple::round(PolarizedTuple::cp1_int(&[1, 1]).unwrap()).unwrap();
        let mt = mt.perturbed(&[vec![], vec![0.0, 0.03, 0.1]], 1.0).unwrap();
        let g = grid();
        let h = ricci_potential(&mt, &g).unwrap();
        let mass = g.quad(|n| h.at(&mt, *n).exp() * mt.potential(0).jet(*n).g).unwrap();
        assert!((mass - 1.0).abs() < 1e-10);
        let ends: Vec<f64> = [20.0, 30.0, 40.0].iter().map(|&t| h.at(&mt, Node::from_t(t))).collect();
        assert!(ends.iter().all(|v| v.is_finite()));
        assert!((ends[1] - ends[2]).abs() < 1e-8);
        let varies = (h.at(&mt, Node::from_t(0.0)) - h.at(&mt, Node::from_t(2.0))).abs();
        assert!(varies > 1e-4);
    }

    #[test]
    fn key_identity_on_perturbed() {
        let mt = MetricTuple::round(PolarizedTuple::cp1_int(&[1, 1]).unwrap()).unwrap();
        let mt = mt.perturbed(&[vec![0.0, 0.05, -0.08, 0.02], vec![0.0, 0.0, 0.1]], 1.0).unwrap();
        let g = grid();
        let act = TorusAction::new(vec![q(1)], vec![q(0), q(3)]).unwrap();
        assert!(key_identity_residual(&mt, &act, &g.nodes, &g).unwrap() < 1e-10);
        assert!((anticanonical_mean(&mt, &act, &g).unwrap() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn twisted_limits() {
        let tuple = PolarizedTuple::cp1_int(&[1, 1]).unwrap();
        let round = SymmetricPotential::round(1.0).unwrap();
        let g = grid();
        let mt = MetricTuple::round(tuple.clone())
            .unwrap()
            .with_twist(1.0, vec![TwistRef::Smooth(round.perturbed(2, 0.1).unwrap()), TwistRef::Smooth(round.clone())])
            .unwrap();
        let r = twisted_ke_residual(&mt, &g.nodes, &g).unwrap();
        assert!(r.iter().flatten().all(|v| v.abs() < 1e-12));
        let mt0 = MetricTuple::round(tuple)
            .unwrap()
            .with_twist(0.0, vec![TwistRef::Smooth(round.clone()), TwistRef::Smooth(round)])
            .unwrap();
        let r = twisted_ke_residual(&mt0, &g.nodes, &g).unwrap();
        assert!(r.iter().flatten().all(|v| v.abs() < 1e-12));
        let dens = twisted_density(&mt0.perturbed(&[vec![0.0, 0.1]], 1.0).unwrap(), &g).unwrap();
        assert!((g.integrate_dsigma(&dens).unwrap() - 1.0).abs() < 1e-12);
        assert!(MetricTuple::round(PolarizedTuple::cp1_int(&[2]).unwrap())
            .unwrap()
            .with_twist(1.5, vec![TwistRef::PoleCurrent { mass_at_zero: 1.0 }])
            .is_err());
    }

    #[test]
    fn json_round_trip() {
        let j: MetricJson = serde_json::from_str(
            r#"{"degrees":["1","1"],"coeffs":[[],[0,0,0.1]],"twist":{"t":0.5,"pole_masses":[0.5,0.25]}}"#,
        )
        .unwrap();
        let mt = j.build().unwrap();
        let back = MetricJson::from_metric(&mt).unwrap();
        assert_eq!(back.twist.unwrap().pole_masses.unwrap(), vec![0.5, 0.25]);
        assert!(serde_json::from_str::<MetricJson>(r#"{"degrees":["1"],"extra":1}"#).is_err());
    }
}
