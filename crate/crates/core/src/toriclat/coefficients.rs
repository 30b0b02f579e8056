//! Riemann–Roch coefficient tables from polytope data.
//!
//! All stored values are the coefficient divided by `(2π)^n`; `two_pi_power`
//! records the factor.

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{q, serde_q, Q, Scaled};

use super::polytope::LatticePolytope;
use super::tuple::{Normalization, PolarizedTuple, TorusAction};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coefficients {
    #[serde(with = "serde_q")]
    pub a0: Q,
    #[serde(with = "serde_q")]
    pub a1: Q,
    #[serde(with = "serde_q")]
    pub b0: Q,
    #[serde(with = "serde_q")]
    pub b1: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub two_pi_power: u32,
    pub normalization: Normalization,
    #[serde(with = "crate::rational::serde_q_vec")]
    pub shifts: Vec<Q>,
    pub bundles: Vec<Coefficients>,
    /// Coefficients of `L = ⊗ L_i` with the summed linearization.
    pub total: Coefficients,
    /// Coefficients of `L_0^k ⊗ L^{-1}`.
    pub twisted: Option<Coefficients>,
}

impl CoefficientTable {
    pub fn scaled(&self, x: &Q) -> Scaled {
        Scaled::new(x.clone(), self.two_pi_power)
    }
}

fn linear_coefficients(p: &LatticePolytope, l: &[Q], c: &Q) -> Coefficients {
    Coefficients {
        a0: p.volume(),
        a1: p.boundary_volume() / q(2),
        b0: -p.integrate_affine(l, c),
        b1: -p.boundary_integrate_affine(l, c) / q(2),
    }
}

/// Supports of `Q_k = { <n_F, x> >= -(k s0_F - s_F) }` over the normals of `P_0`.
pub(crate) fn difference_supports(tuple: &PolarizedTuple, k: i64) -> Result<(Vec<Vec<i64>>, Vec<Q>)> {
    let p0 = tuple.bundle(0);
    let p = tuple.total();
    if p0.normals() != p.normals() {
        return Err(Error::TwistInfeasible(
            "L_0 and L have different normal fans; difference polytope not constructed".into(),
        ));
    }
    let normals = p0.normals();
    let supports = normals
        .iter()
        .map(|n| q(k) * p0.support_of(n).unwrap() - p.support_of(n).unwrap())
        .collect();
    Ok((normals, supports))
}

/// Smallest `k` from which `Q_k` has the full normal fan of `P_0`; past it all
/// measures of `Q_k` are polynomial in `k`.
fn stable_start(tuple: &PolarizedTuple) -> Result<i64> {
    for k in 1..=10_000 {
        let (normals, supports) = difference_supports(tuple, k)?;
        if let Ok(poly) = LatticePolytope::from_facets(normals, supports) {
            if poly.consistent() {
                return Ok(k);
            }
        }
    }
    Err(Error::TwistInfeasible("difference polytope never stabilizes".into()))
}

/// Coefficients (constant term first) of the polynomial through `(x_j, y_j)`.
pub(crate) fn interpolate(xs: &[Q], ys: &[Q]) -> Vec<Q> {
    let n = xs.len();
    let mut coeffs = vec![Q::zero(); n];
    for j in 0..n {
        // basis polynomial ∏_{m≠j} (x - x_m)/(x_j - x_m)
        let mut basis = vec![Q::one()];
        let mut denom = Q::one();
        for m in 0..n {
            if m == j {
                continue;
            }
            let mut next = vec![Q::zero(); basis.len() + 1];
            for (d, b) in basis.iter().enumerate() {
                next[d + 1] += b;
                next[d] -= b * &xs[m];
            }
            basis = next;
            denom *= &xs[j] - &xs[m];
        }
        for (d, b) in basis.iter().enumerate() {
            coeffs[d] += b * &ys[j] / &denom;
        }
    }
    coeffs
}

fn twisted_coefficients(tuple: &PolarizedTuple, action: &TorusAction) -> Result<Coefficients> {
    let n = tuple.n();
    let k0 = stable_start(tuple)?;
    let c0 = &action.shifts[0];
    let total_shift = action.total_shift();
    let ks: Vec<i64> = (k0..k0 + n as i64 + 2).collect();
    let mut vol = Vec::new();
    let mut bd = Vec::new();
    let mut int = Vec::new();
    let mut bd_int = Vec::new();
    for &k in &ks {
        let (normals, supports) = difference_supports(tuple, k)?;
        let poly = LatticePolytope::from_facets(normals, supports)?;
        let shift = q(k) * c0 - &total_shift;
        vol.push(poly.volume());
        bd.push(poly.boundary_volume());
        int.push(poly.integrate_affine(&action.l, &shift));
        bd_int.push(poly.boundary_integrate_affine(&action.l, &shift));
    }
    let xs: Vec<Q> = ks.iter().map(|&k| q(k)).collect();
    let vol = interpolate(&xs, &vol);
    let bd = interpolate(&xs, &bd);
    let int = interpolate(&xs, &int);
    let bd_int = interpolate(&xs, &bd_int);
    Ok(Coefficients {
        a0: vol[n].clone(),
        a1: &vol[n - 1] + &bd[n - 1] / q(2),
        b0: -int[n + 1].clone(),
        b1: -(&int[n] + &bd_int[n] / q(2)),
    })
}

/// Full table including the twisted entries.
pub fn coefficient_table(tuple: &PolarizedTuple, action: &TorusAction) -> Result<CoefficientTable> {
    let mut table = untwisted_table(tuple, action)?;
    table.twisted = Some(twisted_coefficients(tuple, action)?);
    Ok(table)
}

/// Table without `L_0^k ⊗ L^{-1}` entries; works for mismatched fans.
pub fn untwisted_table(tuple: &PolarizedTuple, action: &TorusAction) -> Result<CoefficientTable> {
    action.check(tuple)?;
    let bundles = tuple
        .bundles()
        .iter()
        .zip(&action.shifts)
        .map(|(p, c)| linear_coefficients(p, &action.l, c))
        .collect();
    let total = linear_coefficients(tuple.total(), &action.l, &action.total_shift());
    Ok(CoefficientTable {
        two_pi_power: tuple.n() as u32,
        normalization: action.normalization,
        shifts: action.shifts.clone(),
        bundles,
        total,
        twisted: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use crate::toriclat::tuple::Model;

    #[test]
    fn interpolation_recovers_polynomial() {
        let xs: Vec<Q> = (0..4).map(q).collect();
        let ys: Vec<Q> = (0..4i64).map(|x| q(3 * x * x * x - x + 7)).collect();
        assert_eq!(interpolate(&xs, &ys), vec![q(7), q(-1), q(0), q(3)]);
    }

    #[test]
    fn cp1_degree_one_table() {
        let t = PolarizedTuple::cp1_int(&[1, 1]).unwrap();
        let a = TorusAction::new(vec![q(1)], vec![q(0), q(0)]).unwrap();
        let tab = coefficient_table(&t, &a).unwrap();
        for c in &tab.bundles {
            // a0 = 2π, a1 = 2π, b0 = -π, b1 = -π
            assert_eq!(c.a0, q(1));
            assert_eq!(c.a1, q(1));
            assert_eq!(c.b0, frac(-1, 2));
            assert_eq!(c.b1, frac(-1, 2));
        }
        assert_eq!(tab.two_pi_power, 1);
    }

    #[test]
    fn trivial_action_has_zero_weights() {
        let t = PolarizedTuple::cp1_int(&[2, 1]).unwrap();
        let tab = coefficient_table(&t, &TorusAction::trivial(&t)).unwrap();
        for c in tab.bundles.iter().chain([&tab.total, tab.twisted.as_ref().unwrap()]) {
            assert!(c.b0.is_zero() && c.b1.is_zero());
        }
    }

    #[test]
    fn twisted_cp1() {
        let t = PolarizedTuple::cp1_int(&[1, 1]).unwrap();
        let tab = coefficient_table(&t, &TorusAction::trivial(&t)).unwrap();
        let tw = tab.twisted.unwrap();
        assert_eq!(tw.a0, q(1));
        assert_eq!(tw.a1, q(-1));
    }

    #[test]
    fn twisted_matches_closed_form_with_shifts() {
        // b_{t,0} = -(l d0²/2 + c0 d0), b_{t,1} = -(l d0 + 2 c0)/2 + l d0 D + c0 D + C d0
        let t = PolarizedTuple::cp1_int(&[2, 1, 3]).unwrap();
        let (l, c) = (q(3), vec![frac(1, 3), q(-2), frac(5, 7)]);
        let a = TorusAction::new(vec![l.clone()], c.clone()).unwrap();
        let tw = coefficient_table(&t, &a).unwrap().twisted.unwrap();
        let (d0, dd) = (q(2), q(6));
        let cc: Q = c.iter().sum();
        assert_eq!(tw.b0, -(&l * &d0 * &d0 / q(2) + &c[0] * &d0));
        let b1 = -(&l * &d0 + q(2) * &c[0]) / q(2) + &l * &d0 * &dd + &c[0] * &dd + &cc * &d0;
        assert_eq!(tw.b1, b1);
        assert_eq!(tw.a1, q(1) - dd);
    }

    #[test]
    fn mismatched_fans_rejected() {
        let t = PolarizedTuple::new(
            Model::Toric,
            vec![LatticePolytope::simplex(q(1)).unwrap(), LatticePolytope::rectangle(q(1), q(1)).unwrap()],
        )
        .unwrap();
        let err = coefficient_table(&t, &TorusAction::trivial(&t)).unwrap_err();
        assert!(matches!(err, Error::TwistInfeasible(_)));
        assert!(untwisted_table(&t, &TorusAction::trivial(&t)).is_ok());
    }
}
