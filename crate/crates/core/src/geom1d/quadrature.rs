//! Composite Gauss–Legendre quadrature in the variable `σ = e^t / (1 + e^t)`.
//!
//! Integrals over `t ∈ [-T, T]` become integrals over `σ ∈ [σ(-T), σ(T)]`
//! with `dt = dσ / (σ(1-σ))`. Nodes carry `σ` and `1 - σ` separately so both
//! ends keep full relative precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `ℂP¹ \ {0, ∞}` modulo rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub sigma: f64,
    /// `1 - σ`.
    pub co: f64,
}

impl Node {
    pub fn from_t(t: f64) -> Self {
        // σ = 1/(1+e^{-t}), 1-σ = 1/(1+e^{t})
        Node { sigma: 1.0 / (1.0 + (-t).exp()), co: 1.0 / (1.0 + t.exp()) }
    }

    pub fn from_sigma(sigma: f64) -> Self {
        Node { sigma, co: 1.0 - sigma }
    }

    pub fn t(&self) -> f64 {
        self.sigma.ln() - self.co.ln()
    }

    /// `σ(1-σ)`.
    pub fn s(&self) -> f64 {
        self.sigma * self.co
    }

    /// `1 - 2σ`.
    pub fn tilt(&self) -> f64 {
        self.co - self.sigma
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Number of panels (rounded up to even).
    pub panels: usize,
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Truncation `T`.
    pub cutoff: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { panels: 600, order: 8, cutoff: 40.0 }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = -x;
        xs[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

/// Quadrature nodes with `dσ` weights.
#[derive(Clone, Debug)]
pub struct Grid {
    pub spec: QuadratureSpec,
    pub nodes: Vec<Node>,
    pub weights: Vec<f64>,
}

impl Grid {
    pub fn new(spec: QuadratureSpec) -> Result<Self> {
        if spec.panels == 0 || spec.order == 0 || !(spec.cutoff > 0.0) {
            return Err(Error::Quadrature("panels, order and cutoff must be positive".into()));
        }
        let panels = spec.panels + spec.panels % 2;
        let (gx, gw) = gauss_legendre(spec.order);
        let lo = Node::from_t(-spec.cutoff).sigma;
        let h = (1.0 - 2.0 * lo) / panels as f64;
        let mut lower = Vec::new();
        let mut weights = Vec::new();
        for p in 0..panels / 2 {
            let a = lo + p as f64 * h;
            for (x, w) in gx.iter().zip(&gw) {
                lower.push(a + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        let mut nodes: Vec<Node> = lower.iter().map(|&x| Node { sigma: x, co: 1.0 - x }).collect();
        // mirror image σ ↦ 1 - σ keeps the upper half exact
        nodes.extend(lower.iter().rev().map(|&x| Node { sigma: 1.0 - x, co: x }));
        let mirrored: Vec<f64> = weights.iter().rev().copied().collect();
        weights.extend(mirrored);
        Ok(Self { spec: QuadratureSpec { panels, ..spec }, nodes, weights })
    }

    pub fn default_grid() -> Self {
        Self::new(QuadratureSpec::default()).expect("default quadrature is valid")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sample<F: Fn(&Node) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(f).collect()
    }

    /// `∫ f dσ` for samples at the nodes.
    pub fn integrate_dsigma(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.nodes.len() {
            return Err(Error::Quadrature("sample count does not match the grid".into()));
        }
        let mut acc = 0.0;
        for (v, w) in values.iter().zip(&self.weights) {
            if !v.is_finite() {
                return Err(Error::Quadrature("non-finite sample".into()));
            }
            acc += v * w;
        }
        Ok(acc)
    }

    /// `∫ f dt` for samples of a function of `t` at the nodes.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        let scaled: Vec<f64> = values.iter().zip(&self.nodes).map(|(v, n)| v / n.s()).collect();
        self.integrate_dsigma(&scaled)
    }

    /// `∫ f dσ` for a closure.
    pub fn quad<F: Fn(&Node) -> f64>(&self, f: F) -> Result<f64> {
        self.integrate_dsigma(&self.sample(f))
    }
}
