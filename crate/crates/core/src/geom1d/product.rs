//! Products `ℂP¹ × ℂP¹` with product metrics `ω = ω_a + ω_b`.
//!
//! Both integrals factor into one-dimensional ones; values are returned in
//! units of `(2π)²`.

use super::potential::SymmetricPotential;
use super::quadrature::Grid;
use crate::error::Result;

#[derive(Clone, Debug)]
pub struct ProductMetric {
    pub a: SymmetricPotential,
    pub b: SymmetricPotential,
}

/// `∫u''dt` and `½∫S u''dt` for a single factor.
fn factor(u: &SymmetricPotential, grid: &Grid) -> Result<(f64, f64)> {
    let vol = grid.quad(|n| u.jet(*n).g)?;
    let curv = grid.quad(|n| u.jet(*n).ricci_over_s())?;
    Ok((vol, 0.5 * curv))
}

impl ProductMetric {
    /// `∫ω²/2!` over `(2π)²`.
    pub fn volume(&self, grid: &Grid) -> Result<f64> {
        Ok(factor(&self.a, grid)?.0 * factor(&self.b, grid)?.0)
    }

    /// `∫S ω²/(2·2!)` over `(2π)²`; `S = S_a + S_b`.
    pub fn half_total_scalar(&self, grid: &Grid) -> Result<f64> {
        let (va, ca) = factor(&self.a, grid)?;
        let (vb, cb) = factor(&self.b, grid)?;
        Ok(ca * vb + va * cb)
    }
}

/// `∫ω/1!` and `½∫S ω` for one ℂP¹ factor, over `2π`.
pub fn cp1_integrals(u: &SymmetricPotential, grid: &Grid) -> Result<(f64, f64)> {
    factor(u, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_rounds() {
        let g = Grid::default_grid();
        let p = ProductMetric {
            a: SymmetricPotential::new(2.0, vec![0.0, 0.1, 0.05]).unwrap(),
            b: SymmetricPotential::round(3.0).unwrap(),
        };
        assert!((p.volume(&g).unwrap() - 6.0).abs() < 1e-10);
        assert!((p.half_total_scalar(&g).unwrap() - 5.0).abs() < 1e-8);
    }
}
