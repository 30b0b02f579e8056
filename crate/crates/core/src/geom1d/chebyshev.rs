//! Chebyshev series in `x = 2σ - 1` with exact coefficient-space derivatives.

/// `Σ c_j T_j(2σ - 1)` together with the coefficient vectors of its first
/// four σ-derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebSeries {
    coeffs: Vec<f64>,
    derivs: [Vec<f64>; 4],
}

/// Coefficients of `d/dx Σ a_j T_j(x)`.
fn derivative_x(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut b = vec![0.0; n + 1];
    for k in (1..n).rev() {
        b[k - 1] = b[k + 1] + 2.0 * k as f64 * a[k];
    }
    b[0] *= 0.5;
    b.truncate(n - 1);
    b
}

fn clenshaw(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    let c0 = c.first().copied().unwrap_or(0.0);
    x * b1 - b2 + c0
}

impl ChebSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut derivs: [Vec<f64>; 4] = Default::default();
        let mut cur = coeffs.clone();
        for d in derivs.iter_mut() {
            // d/dσ = 2 d/dx
            cur = derivative_x(&cur).into_iter().map(|v| 2.0 * v).collect();
            *d = cur.clone();
        }
        Self { coeffs, derivs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, sigma: f64) -> f64 {
        clenshaw(&self.coeffs, 2.0 * sigma - 1.0)
    }

    /// `order`-th σ-derivative, `order ∈ 1..=4`.
    pub fn deriv(&self, order: usize, sigma: f64) -> f64 {
        clenshaw(&self.derivs[order - 1], 2.0 * sigma - 1.0)
    }
}

/// `T_j(2σ - 1)`.
pub fn basis(j: usize, sigma: f64) -> f64 {
    let mut c = vec![0.0; j + 1];
    c[j] = 1.0;
    clenshaw(&c, 2.0 * sigma - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_trig_definition() {
        for j in 0..10 {
            for &s in &[0.0, 0.1, 0.37, 0.5, 0.93, 1.0] {
                let x: f64 = 2.0 * s - 1.0;
                let expect = (j as f64 * x.acos()).cos();
                assert!((basis(j, s) - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn derivatives_against_finite_differences() {
        let c = ChebSeries::new(vec![0.3, -0.2, 0.5, 0.1, -0.05, 0.02]);
        let h = 1e-4;
        for &s in &[0.2, 0.5, 0.77] {
            let fd1 = (c.eval(s + h) - c.eval(s - h)) / (2.0 * h);
            assert!((c.deriv(1, s) - fd1).abs() < 1e-6);
            let fd2 = (c.deriv(1, s + h) - c.deriv(1, s - h)) / (2.0 * h);
            assert!((c.deriv(2, s) - fd2).abs() < 1e-5);
            let fd4 = (c.deriv(3, s + h) - c.deriv(3, s - h)) / (2.0 * h);
            assert!((c.deriv(4, s) - fd4).abs() < 1e-3);
        }
    }

    #[test]
    fn quadratic_in_sigma() {
        // T_2(2σ-1) = 8σ² - 8σ + 1
        let c = ChebSeries::new(vec![0.0, 0.0, 1.0]);
        assert!((c.eval(0.3) - (8.0 * 0.09 - 2.4 + 1.0)).abs() < 1e-14);
        assert!((c.deriv(2, 0.3) - 16.0).abs() < 1e-12);
        assert!(c.deriv(3, 0.3).abs() < 1e-12);
    }
}
