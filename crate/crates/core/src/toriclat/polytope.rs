//! Rational polytopes in dimension 1 and 2 with both vertex and facet data.
//!
//! Facet convention: inward primitive normal `n_F` and support number `s_F` with
//! `P = { x : <n_F, x> >= -s_F }`. For `[0, d]` this gives `(+1, 0)` and `(-1, d)`.

use num::integer::Integer;
use num::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_q, q, Q};

pub type Point = Vec<Q>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub support: Q,
}

impl Facet {
    fn eval(&self, x: &[Q]) -> Q {
        // <n, x> + s, nonnegative inside
        let mut acc = self.support.clone();
        for (n, xi) in self.normal.iter().zip(x) {
            acc += q(*n) * xi;
        }
        acc
    }
}

#[derive(Clone, Debug)]
pub struct LatticePolytope {
    dim: usize,
    /// In dimension 2: counter-clockwise, no repeated or collinear vertices.
    vertices: Vec<Point>,
    /// In dimension 2: facet `i` is the edge from `vertices[i]` to `vertices[i+1]`.
    facets: Vec<Facet>,
    consistent: bool,
}

fn dot_q(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

fn dot_iq(a: &[i64], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + q(*x) * y)
}

fn cross(o: &[Q], a: &[Q], b: &[Q]) -> Q {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// Primitive integer vector along a nonzero rational direction, and the
/// factor `λ` with `v = λ · prim`.
fn primitive_direction(v: &[Q]) -> (Vec<i64>, Q) {
    let lcm = v.iter().fold(num::BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<num::BigInt> = v.iter().map(|x| (x * Q::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(num::BigInt::zero(), |acc, x| acc.gcd(x));
    let prim: Vec<i64> = ints.iter().map(|x| (x / &g).to_i64().expect("normal fits in i64")).collect();
    let lambda = Q::new(g, lcm);
    (prim, lambda)
}

fn is_primitive(n: &[i64]) -> bool {
    let g = n.iter().fold(0i64, |acc, x| acc.gcd(x));
    g == 1
}

/// Convex hull in the plane (Andrew's monotone chain), counter-clockwise,
/// collinear points dropped.
fn hull_2d(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= Q::zero() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= Q::zero() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl LatticePolytope {
    pub fn from_vertices(points: Vec<Point>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).ok_or_else(|| Error::Dimension("no vertices".into()))?;
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::Dimension("vertices of mixed dimension".into()));
        }
        match dim {
            1 => {
                let lo = points.iter().map(|p| p[0].clone()).min().unwrap();
                let hi = points.iter().map(|p| p[0].clone()).max().unwrap();
                if lo >= hi {
                    return Err(Error::Dimension("segment has zero length".into()));
                }
                Ok(Self::segment_unchecked(lo, hi))
            }
            2 => {
                let hull = hull_2d(&points);
                if hull.len() < 3 {
                    return Err(Error::Dimension("polygon has zero area".into()));
                }
                let facets = edge_facets(&hull);
                Ok(Self { dim, vertices: hull, facets, consistent: true })
            }
            d => Err(Error::Dimension(format!("unsupported polytope dimension {d}"))),
        }
    }

    /// Builds from facet data. Redundant inequalities are dropped; `consistent()`
    /// reports whether the input was already irredundant.
    pub fn from_facets(normals: Vec<Vec<i64>>, supports: Vec<Q>) -> Result<Self> {
        if normals.len() != supports.len() || normals.is_empty() {
            return Err(Error::Representation("normals and supports differ in length".into()));
        }
        let dim = normals[0].len();
        if normals.iter().any(|n| n.len() != dim) {
            return Err(Error::Dimension("normals of mixed dimension".into()));
        }
        if let Some(n) = normals.iter().find(|n| !is_primitive(n)) {
            return Err(Error::Representation(format!("normal {n:?} is not primitive")));
        }
        let facets: Vec<Facet> = normals
            .into_iter()
            .zip(supports)
            .map(|(normal, support)| Facet { normal, support })
            .collect();
        let verts = feasible_vertices(dim, &facets)?;
        let mut poly = Self::from_vertices(verts)?;
        let mut given: Vec<(Vec<i64>, Q)> = facets.iter().map(|f| (f.normal.clone(), f.support.clone())).collect();
        let mut derived: Vec<(Vec<i64>, Q)> = poly.facets.iter().map(|f| (f.normal.clone(), f.support.clone())).collect();
        given.sort();
        derived.sort();
        poly.consistent = given == derived;
        Ok(poly)
    }

    pub fn segment(lo: Q, hi: Q) -> Result<Self> {
        if lo >= hi {
            return Err(Error::Dimension("segment has zero length".into()));
        }
        Ok(Self::segment_unchecked(lo, hi))
    }

    fn segment_unchecked(lo: Q, hi: Q) -> Self {
        let facets = vec![
            Facet { normal: vec![1], support: -lo.clone() },
            Facet { normal: vec![-1], support: hi.clone() },
        ];
        Self { dim: 1, vertices: vec![vec![lo], vec![hi]], facets, consistent: true }
    }

    /// `[0, a] × [0, b]`.
    pub fn rectangle(a: Q, b: Q) -> Result<Self> {
        Self::from_vertices(vec![
            vec![q(0), q(0)],
            vec![a.clone(), q(0)],
            vec![a.clone(), b.clone()],
            vec![q(0), b],
        ])
    }

    /// `a · conv{0, e1, e2}`.
    pub fn simplex(a: Q) -> Result<Self> {
        Self::from_vertices(vec![vec![q(0), q(0)], vec![a.clone(), q(0)], vec![q(0), a]])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn consistent(&self) -> bool {
        self.consistent
    }

    /// Sorted list of facet normals (the rays of the normal fan).
    pub fn normals(&self) -> Vec<Vec<i64>> {
        let mut n: Vec<Vec<i64>> = self.facets.iter().map(|f| f.normal.clone()).collect();
        n.sort();
        n
    }

    pub fn support_of(&self, normal: &[i64]) -> Option<&Q> {
        self.facets.iter().find(|f| f.normal == normal).map(|f| &f.support)
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        self.facets.iter().all(|f| f.eval(x) >= Q::zero())
    }

    pub fn volume(&self) -> Q {
        match self.dim {
            1 => &self.vertices[1][0] - &self.vertices[0][0],
            _ => {
                let n = self.vertices.len();
                let mut twice = Q::zero();
                for i in 0..n {
                    let a = &self.vertices[i];
                    let b = &self.vertices[(i + 1) % n];
                    twice += &a[0] * &b[1] - &a[1] * &b[0];
                }
                twice / q(2)
            }
        }
    }

    /// Lattice lengths of the facets (1 for each endpoint in dimension 1).
    pub fn facet_measures(&self) -> Vec<Q> {
        match self.dim {
            1 => vec![Q::one(), Q::one()],
            _ => {
                let n = self.vertices.len();
                (0..n)
                    .map(|i| {
                        let a = &self.vertices[i];
                        let b = &self.vertices[(i + 1) % n];
                        let e: Vec<Q> = vec![&b[0] - &a[0], &b[1] - &a[1]];
                        primitive_direction(&e).1
                    })
                    .collect()
            }
        }
    }

    /// Sum of lattice-normalized facet volumes.
    pub fn boundary_volume(&self) -> Q {
        self.facet_measures().into_iter().fold(Q::zero(), |a, b| a + b)
    }

    pub fn barycenter(&self) -> Point {
        match self.dim {
            1 => vec![(&self.vertices[0][0] + &self.vertices[1][0]) / q(2)],
            _ => {
                let o = &self.vertices[0];
                let mut area = Q::zero();
                let mut cx = Q::zero();
                let mut cy = Q::zero();
                for w in self.vertices[1..].windows(2) {
                    let a2 = cross(o, &w[0], &w[1]);
                    cx += &a2 * (&o[0] + &w[0][0] + &w[1][0]);
                    cy += &a2 * (&o[1] + &w[0][1] + &w[1][1]);
                    area += a2;
                }
                vec![cx / (&area * q(3)), cy / (area * q(3))]
            }
        }
    }

    /// `∫_P (<l,x> + c) dx`.
    pub fn integrate_affine(&self, l: &[Q], c: &Q) -> Q {
        self.volume() * (dot_q(l, &self.barycenter()) + c)
    }

    /// `∫_{∂P} (<l,x> + c) dσ` with the lattice-normalized facet measure.
    pub fn boundary_integrate_affine(&self, l: &[Q], c: &Q) -> Q {
        match self.dim {
            1 => self.vertices.iter().fold(Q::zero(), |acc, v| acc + dot_q(l, v) + c),
            _ => {
                let n = self.vertices.len();
                let measures = self.facet_measures();
                (0..n).fold(Q::zero(), |acc, i| {
                    let a = &self.vertices[i];
                    let b = &self.vertices[(i + 1) % n];
                    let mid: Vec<Q> = vec![(&a[0] + &b[0]) / q(2), (&a[1] + &b[1]) / q(2)];
                    acc + &measures[i] * (dot_q(l, &mid) + c)
                })
            }
        }
    }

    pub fn min_affine(&self, l: &[Q]) -> Q {
        self.vertices.iter().map(|v| dot_q(l, v)).min().unwrap()
    }

    pub fn translate(&self, v: &[Q]) -> Self {
        let verts = self
            .vertices
            .iter()
            .map(|p| p.iter().zip(v).map(|(a, b)| a + b).collect())
            .collect();
        let facets = self
            .facets
            .iter()
            .map(|f| Facet { normal: f.normal.clone(), support: &f.support - dot_iq(&f.normal, v) })
            .collect();
        Self { dim: self.dim, vertices: verts, facets, consistent: self.consistent }
    }

    pub fn dilate(&self, k: &Q) -> Result<Self> {
        if *k <= Q::zero() {
            return Err(Error::Invalid("dilation factor must be positive".into()));
        }
        let verts = self.vertices.iter().map(|p| p.iter().map(|x| x * k).collect()).collect();
        let facets = self
            .facets
            .iter()
            .map(|f| Facet { normal: f.normal.clone(), support: &f.support * k })
            .collect();
        Ok(Self { dim: self.dim, vertices: verts, facets, consistent: self.consistent })
    }

    pub fn minkowski_sum(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension("Minkowski sum of polytopes of different dimension".into()));
        }
        let mut pts = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for a in &self.vertices {
            for b in &other.vertices {
                pts.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
            }
        }
        Self::from_vertices(pts)
    }

    /// Integer points of `P`, lexicographically ordered.
    pub fn lattice_points(&self) -> Vec<Vec<i64>> {
        lattice_points_in(self.dim, &self.vertices, &self.facets)
    }
}

fn edge_facets(hull: &[Point]) -> Vec<Facet> {
    let n = hull.len();
    (0..n)
        .map(|i| {
            let a = &hull[i];
            let b = &hull[(i + 1) % n];
            // inward normal of a CCW edge: rotate the edge direction by +90°
            let e = vec![-(&b[1] - &a[1]), &b[0] - &a[0]];
            let (normal, _) = primitive_direction(&e);
            let support = -dot_iq(&normal, a);
            Facet { normal, support }
        })
        .collect()
}

/// Vertices of `{ x : <n_F,x> >= -s_F }`; errors when empty.
fn feasible_vertices(dim: usize, facets: &[Facet]) -> Result<Vec<Point>> {
    let mut pts = Vec::new();
    match dim {
        1 => {
            let mut lo: Option<Q> = None;
            let mut hi: Option<Q> = None;
            for f in facets {
                match f.normal[0] {
                    1 => {
                        let b = -f.support.clone();
                        lo = Some(lo.map_or(b.clone(), |l: Q| l.max(b)));
                    }
                    -1 => {
                        let b = f.support.clone();
                        hi = Some(hi.map_or(b.clone(), |h: Q| h.min(b)));
                    }
                    _ => return Err(Error::Representation("1-d normals must be ±1".into())),
                }
            }
            match (lo, hi) {
                (Some(l), Some(h)) if l <= h => {
                    pts.push(vec![l]);
                    pts.push(vec![h]);
                }
                (Some(_), Some(_)) => return Err(Error::Dimension("empty polytope".into())),
                _ => return Err(Error::Dimension("unbounded 1-d region".into())),
            }
        }
        2 => {
            for i in 0..facets.len() {
                for j in (i + 1)..facets.len() {
                    let (a, b) = (&facets[i], &facets[j]);
                    let det = q(a.normal[0] * b.normal[1] - a.normal[1] * b.normal[0]);
                    if det.is_zero() {
                        continue;
                    }
                    // n_a·x = -s_a, n_b·x = -s_b
                    let ra = -a.support.clone();
                    let rb = -b.support.clone();
                    let x = (&ra * q(b.normal[1]) - &rb * q(a.normal[1])) / &det;
                    let y = (&rb * q(a.normal[0]) - &ra * q(b.normal[0])) / &det;
                    let p = vec![x, y];
                    if facets.iter().all(|f| f.eval(&p) >= Q::zero()) {
                        pts.push(p);
                    }
                }
            }
            if pts.is_empty() {
                return Err(Error::Dimension("empty polytope".into()));
            }
        }
        d => return Err(Error::Dimension(format!("unsupported polytope dimension {d}"))),
    }
    Ok(pts)
}

fn floor_i64(x: &Q) -> i64 {
    x.floor().to_integer().to_i64().expect("coordinate fits in i64")
}

fn ceil_i64(x: &Q) -> i64 {
    x.ceil().to_integer().to_i64().expect("coordinate fits in i64")
}

fn lattice_points_in(dim: usize, verts: &[Point], facets: &[Facet]) -> Vec<Vec<i64>> {
    let lo: Vec<i64> = (0..dim).map(|d| ceil_i64(verts.iter().map(|v| &v[d]).min().unwrap())).collect();
    let hi: Vec<i64> = (0..dim).map(|d| floor_i64(verts.iter().map(|v| &v[d]).max().unwrap())).collect();
    let mut out = Vec::new();
    match dim {
        1 => {
            for x in lo[0]..=hi[0] {
                out.push(vec![x]);
            }
        }
        _ => {
            for x in lo[0]..=hi[0] {
                for y in lo[1]..=hi[1] {
                    let p = vec![q(x), q(y)];
                    if facets.iter().all(|f| f.eval(&p) >= Q::zero()) {
                        out.push(vec![x, y]);
                    }
                }
            }
        }
    }
    out
}

/// Integer points of the (possibly lower dimensional) region
/// `{ <n_F,x> >= -s_F }`; empty when the region is empty.
pub fn lattice_points_of_region(normals: &[Vec<i64>], supports: &[Q]) -> Vec<Vec<i64>> {
    let facets: Vec<Facet> = normals
        .iter()
        .zip(supports)
        .map(|(n, s)| Facet { normal: n.clone(), support: s.clone() })
        .collect();
    let dim = normals[0].len();
    match feasible_vertices(dim, &facets) {
        Ok(v) => lattice_points_in(dim, &v, &facets),
        Err(_) => Vec::new(),
    }
}

/// JSON form: `{normals, supports}` or `{vertices}`, rationals as strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PolytopeJson {
    Facets { normals: Vec<Vec<i64>>, supports: Vec<String> },
    Vertices { vertices: Vec<Vec<String>> },
}

impl PolytopeJson {
    pub fn to_polytope(&self) -> Result<LatticePolytope> {
        match self {
            PolytopeJson::Facets { normals, supports } => {
                let s = supports.iter().map(|x| parse_q(x)).collect::<Result<Vec<_>>>()?;
                LatticePolytope::from_facets(normals.clone(), s)
            }
            PolytopeJson::Vertices { vertices } => {
                let v = vertices
                    .iter()
                    .map(|p| p.iter().map(|x| parse_q(x)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                LatticePolytope::from_vertices(v)
            }
        }
    }

    pub fn from_polytope(p: &LatticePolytope) -> Self {
        PolytopeJson::Facets {
            normals: p.facets.iter().map(|f| f.normal.clone()).collect(),
            supports: p.facets.iter().map(|f| fmt_q(&f.support)).collect(),
        }
    }
}
