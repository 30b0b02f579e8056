//! Rotation-invariant Kähler potentials on ℂP¹.
//!
//! `u(t) = d·log(1+e^t) + p(σ)` with `p` a Chebyshev series in `σ`. Up to an
//! additive constant this is `-d·log(1-σ) + p(σ)`. Writing `s = σ(1-σ)`,
//!
//! ```text
//! u'  = dσ + s p_σ
//! u'' = s·g,   g = d + (1-2σ) p_σ + s p_σσ
//! ```
//!
//! and everything downstream is expressed through `g` and its σ-derivatives,
//! which stay bounded at both poles.

use serde::{Deserialize, Serialize};

use super::chebyshev::ChebSeries;
use super::quadrature::Node;
use crate::error::{Error, Result};

/// Number of uniformly spaced σ-samples (poles included) used to certify
/// `u'' > 0`.
pub const POSITIVITY_SAMPLES: usize = 1001;

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricPotential {
    degree: f64,
    series: ChebSeries,
}

/// Pointwise data of a potential at one node.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub node: Node,
    pub degree: f64,
    pub p: f64,
    pub p1: f64,
    pub g: f64,
    pub g1: f64,
    pub g2: f64,
}

impl Jet {
    /// `u'(t)`.
    pub fn du(&self) -> f64 {
        self.degree * self.node.sigma + self.node.s() * self.p1
    }

    /// `u''(t)`.
    pub fn ddu(&self) -> f64 {
        self.node.s() * self.g
    }

    /// `(log u'')'(t)`.
    pub fn dlog_ddu(&self) -> f64 {
        self.node.tilt() + self.node.s() * self.g1 / self.g
    }

    /// Ricci form density `-(log u'')''` divided by `σ(1-σ)`.
    pub fn ricci_over_s(&self) -> f64 {
        let s = self.node.s();
        let r = self.g1 / self.g;
        let d = self.node.tilt() * r + s * (self.g2 / self.g - r * r);
        2.0 - d
    }

    /// Ricci form density `-(log u'')''`.
    pub fn ricci(&self) -> f64 {
        self.node.s() * self.ricci_over_s()
    }

    pub fn scalar_curvature(&self) -> f64 {
        self.ricci_over_s() / self.g
    }
}

impl SymmetricPotential {
    pub fn new(degree: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !(degree > 0.0) || !degree.is_finite() {
            return Err(Error::Invalid(format!("degree must be positive, got {degree}")));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("non-finite potential coefficient".into()));
        }
        let pot = Self { degree, series: ChebSeries::new(coeffs) };
        pot.check_positive()?;
        Ok(pot)
    }

    /// The Fubini–Study potential `d·log(1+e^t)`.
    pub fn round(degree: f64) -> Result<Self> {
        Self::new(degree, Vec::new())
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        self.series.coeffs()
    }

    pub fn is_round(&self) -> bool {
        self.coeffs().iter().skip(1).all(|&c| c == 0.0)
    }

    /// Coefficients padded to length `len`.
    pub fn padded(&self, len: usize) -> Vec<f64> {
        let mut c = self.coeffs().to_vec();
        if c.len() < len {
            c.resize(len, 0.0);
        }
        c
    }

    /// `u + amp·T_j`.
    pub fn perturbed(&self, j: usize, amp: f64) -> Result<Self> {
        let mut c = self.padded(j + 1);
        c[j] += amp;
        Self::new(self.degree, c)
    }

    /// `u + s·η` for a perturbation series `η`.
    pub fn add_scaled(&self, eta: &[f64], s: f64) -> Result<Self> {
        let mut c = self.padded(eta.len());
        for (ci, e) in c.iter_mut().zip(eta) {
            *ci += s * e;
        }
        Self::new(self.degree, c)
    }

    /// `g = u''/(σ(1-σ))` at `σ`, defined up to and including the poles.
    fn g_at(&self, sigma: f64) -> f64 {
        let p1 = self.series.deriv(1, sigma);
        let p2 = self.series.deriv(2, sigma);
        self.degree + (1.0 - 2.0 * sigma) * p1 + sigma * (1.0 - sigma) * p2
    }

    /// `min_σ u''/(d·σ(1-σ))` over the positivity samples; 1 for round metrics.
    pub fn positivity_margin(&self) -> f64 {
        if self.is_round() {
            return 1.0;
        }
        (0..POSITIVITY_SAMPLES)
            .map(|k| self.g_at(k as f64 / (POSITIVITY_SAMPLES - 1) as f64) / self.degree)
            .fold(f64::INFINITY, f64::min)
    }

    fn check_positive(&self) -> Result<()> {
        if self.is_round() {
            return Ok(());
        }
        for k in 0..POSITIVITY_SAMPLES {
            let sigma = k as f64 / (POSITIVITY_SAMPLES - 1) as f64;
            let g = self.g_at(sigma);
            if !(g > 0.0) {
                return Err(Error::Positivity(format!(
                    "u'' is not positive at sigma = {sigma:.4} (g = {g:.3e})"
                )));
            }
        }
        Ok(())
    }

    pub fn jet(&self, node: Node) -> Jet {
        let sg = node.sigma;
        let sr = &self.series;
        let (p1, p2, p3, p4) = (sr.deriv(1, sg), sr.deriv(2, sg), sr.deriv(3, sg), sr.deriv(4, sg));
        let s = node.s();
        let tilt = node.tilt();
        Jet {
            node,
            degree: self.degree,
            p: sr.eval(sg),
            p1,
            g: self.degree + tilt * p1 + s * p2,
            g1: -2.0 * p1 + 2.0 * tilt * p2 + s * p3,
            g2: -6.0 * p2 + 3.0 * tilt * p3 + s * p4,
        }
    }

    /// `u(t)` up to the additive constant fixed by `u = -d·log(1-σ) + p`.
    pub fn value(&self, node: Node) -> f64 {
        -self.degree * node.co.ln() + self.series.eval(node.sigma)
    }

    pub fn kahler_form_density(&self, t: f64) -> f64 {
        self.jet(Node::from_t(t)).ddu()
    }

    pub fn scalar_curvature(&self, t: f64) -> f64 {
        self.jet(Node::from_t(t)).scalar_curvature()
    }

    /// `θ(t) = ℓ·u'(t) + c`.
    pub fn hamiltonian(&self, l: f64, c: f64, t: f64) -> f64 {
        l * self.jet(Node::from_t(t)).du() + c
    }
}

#[derive(Serialize, Deserialize)]
struct PotentialJson {
    degree: f64,
    #[serde(default)]
    coeffs: Vec<f64>,
}

impl Serialize for SymmetricPotential {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PotentialJson { degree: self.degree, coeffs: self.coeffs().to_vec() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymmetricPotential {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PotentialJson::deserialize(d)?;
        SymmetricPotential::new(j.degree, j.coeffs).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_values() {
        let u1 = SymmetricPotential::round(1.0).unwrap();
        let u2 = SymmetricPotential::round(2.0).unwrap();
        assert!((u1.kahler_form_density(0.0) - 0.25).abs() < 1e-15);
        assert!((u2.kahler_form_density(0.0) - 0.5).abs() < 1e-15);
        for &t in &[-30.0, -3.0, 0.0, 1.5, 35.0] {
            assert!((u1.scalar_curvature(t) - 2.0).abs() < 1e-12);
            assert!((u2.scalar_curvature(t) - 1.0).abs() < 1e-12);
        }
        assert!((u2.hamiltonian(1.0, 0.0, 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(u2.hamiltonian(0.0, 0.7, 3.0), 0.7);
    }

    #[test]
    fn jet_matches_finite_differences_in_t() {
        let u = SymmetricPotential::new(1.5, vec![0.0, 0.02, 0.03, -0.01, 0.005]).unwrap();
        let h = 1e-4;
        for &t in &[-2.0, 0.3, 1.7] {
            let v = |t: f64| u.value(Node::from_t(t));
            let fd2 = (v(t + h) - 2.0 * v(t) + v(t - h)) / (h * h);
            assert!((u.kahler_form_density(t) - fd2).abs() < 1e-6);
            let du = |t: f64| u.jet(Node::from_t(t)).du();
            assert!(((du(t + h) - du(t - h)) / (2.0 * h) - u.kahler_form_density(t)).abs() < 1e-7);
            let lg = |t: f64| u.kahler_form_density(t).ln();
            let fd = -(lg(t + h) - 2.0 * lg(t) + lg(t - h)) / (h * h) / u.kahler_form_density(t);
            assert!((u.scalar_curvature(t) - fd).abs() < 1e-5);
        }
    }

    #[test]
    fn positivity_enforced() {
        assert!(SymmetricPotential::new(1.0, vec![0.0, 0.0, 1.0]).is_err());
        assert!(SymmetricPotential::new(0.0, vec![]).is_err());
        assert!(SymmetricPotential::new(1.0, vec![0.0, 0.0, 0.05]).is_ok());
    }
}
