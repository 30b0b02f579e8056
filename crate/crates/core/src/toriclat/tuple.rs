use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{q, Q};

use super::polytope::LatticePolytope;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    #[serde(rename = "CP1")]
    Cp1,
    Toric,
    #[serde(rename = "CP1xCP1")]
    ProductCp1,
}

/// A toric model manifold with ample bundles `L_0, …, L_m`, each given by its
/// moment polytope.
#[derive(Clone, Debug)]
pub struct PolarizedTuple {
    model: Model,
    bundles: Vec<LatticePolytope>,
    total: LatticePolytope,
}

impl PolarizedTuple {
    pub fn new(model: Model, bundles: Vec<LatticePolytope>) -> Result<Self> {
        let first = bundles.first().ok_or_else(|| Error::Invalid("tuple needs at least L_0".into()))?;
        let n = first.dim();
        if bundles.iter().any(|p| p.dim() != n) {
            return Err(Error::Dimension("bundles live on manifolds of different dimension".into()));
        }
        match model {
            Model::Cp1 if n != 1 => return Err(Error::Dimension("CP1 model needs 1-d polytopes".into())),
            Model::ProductCp1 if n != 2 => {
                return Err(Error::Dimension("CP1xCP1 model needs 2-d polytopes".into()))
            }
            _ => {}
        }
        let mut total = first.clone();
        for p in &bundles[1..] {
            total = total.minkowski_sum(p)?;
        }
        Ok(Self { model, bundles, total })
    }

    /// `ℂP¹` with `L_i = O(d_i)`.
    pub fn cp1(degrees: &[Q]) -> Result<Self> {
        if degrees.iter().any(|d| *d <= Q::zero()) {
            return Err(Error::Invalid("degrees must be positive".into()));
        }
        let polys = degrees
            .iter()
            .map(|d| LatticePolytope::segment(Q::zero(), d.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(Model::Cp1, polys)
    }

    pub fn cp1_int(degrees: &[i64]) -> Result<Self> {
        Self::cp1(&degrees.iter().map(|d| q(*d)).collect::<Vec<_>>())
    }

    /// `ℂP¹×ℂP¹` with `L_i = O(a_i, b_i)`.
    pub fn product_cp1(bidegrees: &[(Q, Q)]) -> Result<Self> {
        if bidegrees.iter().any(|(a, b)| *a <= Q::zero() || *b <= Q::zero()) {
            return Err(Error::Invalid("bidegrees must be positive".into()));
        }
        let polys = bidegrees
            .iter()
            .map(|(a, b)| LatticePolytope::rectangle(a.clone(), b.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(Model::ProductCp1, polys)
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Complex dimension `n`.
    pub fn n(&self) -> usize {
        self.bundles[0].dim()
    }

    /// Number of bundles, `m + 1`.
    pub fn len(&self) -> usize {
        self.bundles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bundles.is_empty()
    }

    pub fn bundle(&self, i: usize) -> &LatticePolytope {
        &self.bundles[i]
    }

    pub fn bundles(&self) -> &[LatticePolytope] {
        &self.bundles
    }

    /// Polytope of `L = ⊗ L_i` (Minkowski sum).
    pub fn total(&self) -> &LatticePolytope {
        &self.total
    }

    /// `V_i / (2π)^n`, i.e. the lattice volume of `P_i`.
    pub fn volume(&self, i: usize) -> Q {
        self.bundles[i].volume()
    }

    /// Degrees on `ℂP¹` (the lengths of the segments).
    pub fn degrees(&self) -> Result<Vec<Q>> {
        if self.n() != 1 {
            return Err(Error::Scope("degrees are defined for the CP1 model".into()));
        }
        Ok(self.bundles.iter().map(|p| p.volume()).collect())
    }

    /// `L = -K` in the sense of the toric dictionary: the sum polytope is a
    /// translate of `{ <n_F, x> >= -1 }` over the same fan.
    pub fn is_fano(&self) -> bool {
        let p = &self.total;
        // -K polytope has all supports 1; compare up to translation by testing
        // that some translate has every support equal to one.
        match self.n() {
            1 => p.volume() == q(2),
            _ => {
                // supports s_F + <n_F, v> = 1 for all F, solve for v from two
                // independent facets and check the rest.
                let f = p.facets();
                let (a, b) = match find_independent(f.iter().map(|x| x.normal.as_slice()).collect()) {
                    Some(ix) => ix,
                    None => return false,
                };
                let na = &f[a].normal;
                let nb = &f[b].normal;
                let ra = Q::one() - &f[a].support;
                let rb = Q::one() - &f[b].support;
                let det = q(na[0] * nb[1] - na[1] * nb[0]);
                let vx = (&ra * q(nb[1]) - &rb * q(na[1])) / &det;
                let vy = (&rb * q(na[0]) - &ra * q(nb[0])) / &det;
                f.iter().all(|fc| &fc.support + q(fc.normal[0]) * &vx + q(fc.normal[1]) * &vy == Q::one())
            }
        }
    }
}

fn find_independent(normals: Vec<&[i64]>) -> Option<(usize, usize)> {
    for i in 0..normals.len() {
        for j in (i + 1)..normals.len() {
            if normals[i][0] * normals[j][1] - normals[i][1] * normals[j][0] != 0 {
                return Some((i, j));
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Shifts supplied by the caller.
    Explicit,
    /// `min_{P_i} (<l,x> + c_i) = 0` for every bundle.
    MinZero,
    /// Each `θ_{w,i}` has zero mean against `ω_i^n`.
    ZeroMean,
}

/// A `ℂ*`-action given by a linear functional `l` on moment coordinates plus
/// one Hamiltonian shift per bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusAction {
    pub l: Vec<Q>,
    pub shifts: Vec<Q>,
    pub normalization: Normalization,
}

impl TorusAction {
    pub fn new(l: Vec<Q>, shifts: Vec<Q>) -> Result<Self> {
        if l.iter().all(|x| x.is_zero()) {
            return Err(Error::Invalid("l = 0; use TorusAction::trivial for the trivial action".into()));
        }
        Ok(Self { l, shifts, normalization: Normalization::Explicit })
    }

    pub fn trivial(tuple: &PolarizedTuple) -> Self {
        Self { l: vec![Q::zero(); tuple.n()], shifts: vec![Q::zero(); tuple.len()], normalization: Normalization::Explicit }
    }

    /// Action with shifts fixed by `norm` (which must not be `Explicit`).
    pub fn normalized(l: Vec<Q>, tuple: &PolarizedTuple, norm: Normalization) -> Result<Self> {
        if l.len() != tuple.n() {
            return Err(Error::Dimension("action functional has the wrong length".into()));
        }
        let shifts = tuple
            .bundles()
            .iter()
            .map(|p| match norm {
                Normalization::MinZero => Ok(-p.min_affine(&l)),
                Normalization::ZeroMean => {
                    let b = p.barycenter();
                    Ok(-l.iter().zip(&b).fold(Q::zero(), |acc, (a, x)| acc + a * x))
                }
                Normalization::Explicit => Err(Error::Invalid("explicit normalization needs shifts".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { l, shifts, normalization: norm })
    }

    pub fn is_trivial(&self) -> bool {
        self.l.iter().all(|x| x.is_zero())
    }

    pub fn check(&self, tuple: &PolarizedTuple) -> Result<()> {
        if self.l.len() != tuple.n() {
            return Err(Error::Dimension("action functional has the wrong length".into()));
        }
        if self.shifts.len() != tuple.len() {
            return Err(Error::Invalid("need one Hamiltonian shift per bundle".into()));
        }
        Ok(())
    }

    /// Shift of the induced linearization on `L = ⊗ L_i`.
    pub fn total_shift(&self) -> Q {
        self.shifts.iter().fold(Q::zero(), |a, b| a + b)
    }

    /// Same action with every shift moved by `delta[i]`.
    pub fn with_shifted(&self, delta: &[Q]) -> Self {
        Self {
            l: self.l.clone(),
            shifts: self.shifts.iter().zip(delta).map(|(a, b)| a + b).collect(),
            normalization: Normalization::Explicit,
        }
    }

    /// `(q·l, q·c)`.
    pub fn scaled(&self, factor: &Q) -> Self {
        Self {
            l: self.l.iter().map(|x| x * factor).collect(),
            shifts: self.shifts.iter().map(|x| x * factor).collect(),
            normalization: self.normalization,
        }
    }

    pub fn l_f64(&self) -> Vec<f64> {
        self.l.iter().map(crate::rational::to_f64).collect()
    }

    pub fn shifts_f64(&self) -> Vec<f64> {
        self.shifts.iter().map(crate::rational::to_f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    #[test]
    fn fano_detection() {
        assert!(PolarizedTuple::cp1_int(&[1, 1]).unwrap().is_fano());
        assert!(!PolarizedTuple::cp1_int(&[2, 3]).unwrap().is_fano());
        let pp = PolarizedTuple::product_cp1(&[(q(1), q(2)), (q(1), q(0))]);
        assert!(pp.is_err());
        let pp = PolarizedTuple::product_cp1(&[(q(1), q(1)), (q(1), q(1))]).unwrap();
        assert!(pp.is_fano());
        let p2 = PolarizedTuple::new(Model::Toric, vec![LatticePolytope::simplex(q(3)).unwrap()]).unwrap();
        assert!(p2.is_fano());
    }

    #[test]
    fn normalizations() {
        let t = PolarizedTuple::cp1_int(&[2, 4]).unwrap();
        let a = TorusAction::normalized(vec![q(-1)], &t, Normalization::MinZero).unwrap();
        assert_eq!(a.shifts, vec![q(2), q(4)]);
        let z = TorusAction::normalized(vec![q(1)], &t, Normalization::ZeroMean).unwrap();
        assert_eq!(z.shifts, vec![q(-1), q(-2)]);
        assert!(TorusAction::new(vec![q(0)], vec![q(0)]).is_err());
    }
}
