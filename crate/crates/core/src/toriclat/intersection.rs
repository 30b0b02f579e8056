use num::Zero;

use crate::error::{Error, Result};
use crate::rational::{q, Q};

use super::polytope::LatticePolytope;
use super::tuple::PolarizedTuple;

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// `D_1 · … · D_n` for the divisors with polytopes `polys`, via the
/// polarization identity `Σ_{S≠∅} (-1)^{n-|S|} Vol(Σ_{j∈S} P_j)`.
pub fn intersection_of(polys: &[&LatticePolytope]) -> Result<Q> {
    let n = polys.first().map(|p| p.dim()).ok_or_else(|| Error::Invalid("empty product".into()))?;
    if polys.len() != n {
        return Err(Error::Dimension(format!("need {n} divisors on an {n}-dimensional variety, got {}", polys.len())));
    }
    if polys.iter().any(|p| p.dim() != n) {
        return Err(Error::Dimension("polytopes of different dimension".into()));
    }
    let mut acc = Q::zero();
    for mask in 1u32..(1 << n) {
        let mut sum: Option<LatticePolytope> = None;
        for (j, p) in polys.iter().enumerate() {
            if mask & (1 << j) != 0 {
                sum = Some(match sum {
                    None => (*p).clone(),
                    Some(s) => s.minkowski_sum(p)?,
                });
            }
        }
        let vol = sum.unwrap().volume();
        let sign = if (n as u32 - mask.count_ones()) % 2 == 0 { 1 } else { -1 };
        acc += q(sign) * vol;
    }
    Ok(acc)
}

/// `L_{i_1} · … · L_{i_n}`.
pub fn intersection_number(tuple: &PolarizedTuple, indices: &[usize]) -> Result<Q> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= tuple.len()) {
        return Err(Error::Invalid(format!("bundle index {bad} out of range")));
    }
    let polys: Vec<&LatticePolytope> = indices.iter().map(|&i| tuple.bundle(i)).collect();
    intersection_of(&polys)
}

/// `Ŝ = n (-K - L)·L_0^{n-1} / L_0^n`.
pub fn s_hat(tuple: &PolarizedTuple) -> Result<Q> {
    let n = tuple.n();
    let p0 = tuple.bundle(0);
    // -K·L_0^{n-1} = (n-1)! · lattice boundary volume of P_0
    let anticanonical = q(factorial(n - 1)) * p0.boundary_volume();
    let mut args: Vec<&LatticePolytope> = vec![tuple.total()];
    args.extend(std::iter::repeat(p0).take(n - 1));
    let l_dot = intersection_of(&args)?;
    let top = q(factorial(n)) * p0.volume();
    Ok(q(n as i64) * (anticanonical - l_dot) / top)
}
