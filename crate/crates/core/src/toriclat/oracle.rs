//! Brute-force lattice-point counts: the oracle side of the Riemann–Roch
//! expansions.

use num::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{q, Q};

use super::coefficients::difference_supports;
use super::polytope::lattice_points_of_region;
use super::tuple::{PolarizedTuple, TorusAction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BundleSel {
    Index(usize),
    /// `L_0^k ⊗ L^{-1}`.
    Twisted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeCount {
    pub dimension: u64,
    /// `Σ_m (<l, m> + shift(k))` over the lattice points. The `ℂ*`-weight on
    /// sections is the negative of this sum.
    pub moment_sum: Q,
}

impl LatticeCount {
    /// Total weight of the action on `H^0`.
    pub fn total_weight(&self) -> Q {
        -self.moment_sum.clone()
    }
}

pub fn dim_weight_oracle(tuple: &PolarizedTuple, action: &TorusAction, bundle: BundleSel, k: i64) -> Result<LatticeCount> {
    if k < 1 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    action.check(tuple)?;
    let (points, shift) = match bundle {
        BundleSel::Index(i) => {
            if i >= tuple.len() {
                return Err(Error::Invalid(format!("bundle index {i} out of range")));
            }
            let p = tuple.bundle(i).dilate(&q(k))?;
            (p.lattice_points(), q(k) * &action.shifts[i])
        }
        BundleSel::Twisted => {
            let (normals, supports) = difference_supports(tuple, k)?;
            let pts = lattice_points_of_region(&normals, &supports);
            if pts.is_empty() {
                return Err(Error::TwistInfeasible(format!("L_0^{k} ⊗ L^-1 has no sections")));
            }
            (pts, q(k) * &action.shifts[0] - action.total_shift())
        }
    };
    let mut sum = Q::zero();
    for m in &points {
        for (li, mi) in action.l.iter().zip(m) {
            sum += li * q(*mi);
        }
        sum += &shift;
    }
    Ok(LatticeCount { dimension: points.len() as u64, moment_sum: sum })
}
