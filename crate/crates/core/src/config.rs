//! Job configuration files.

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::bergman::sample_nodes;
use crate::error::{Error, Result};
use crate::geom1d::{MetricJson, MetricTuple, QuadratureSpec, TwistJson};
use crate::invariants::InvariantKind;
use crate::rational::{fmt_q, parse_q, Q};
use crate::solver::{Equation, SolveConfig};
use crate::toriclat::{Normalization, PolarizedTuple, PolytopeJson, TorusAction};

/// A rational read from `"p/q"`, an integer or a decimal.
#[derive(Clone, Debug, PartialEq)]
pub struct QIn(pub Q);

impl Serialize for QIn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(&self.0))
    }
}

impl<'de> Deserialize<'de> for QIn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = QIn;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a rational as \"p/q\", an integer or a decimal")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<QIn, E> {
                parse_q(v).map(QIn).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<QIn, E> {
                Ok(QIn(Q::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<QIn, E> {
                Ok(QIn(Q::from_integer(v.into())))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<QIn, E> {
                if !v.is_finite() {
                    return Err(E::custom("non-finite number"));
                }
                parse_q(&format!("{v}")).map(QIn).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

fn qs(v: &[QIn]) -> Vec<Q> {
    v.iter().map(|x| x.0.clone()).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "model", deny_unknown_fields)]
pub enum TupleSpec {
    #[serde(rename = "CP1")]
    Cp1 { degrees: Vec<QIn> },
    #[serde(rename = "CP1xCP1")]
    ProductCp1 { bidegrees: Vec<(QIn, QIn)> },
    #[serde(rename = "toric")]
    Toric { polytopes: Vec<PolytopeJson> },
}

impl TupleSpec {
    pub fn build(&self) -> Result<PolarizedTuple> {
        match self {
            TupleSpec::Cp1 { degrees } => PolarizedTuple::cp1(&qs(degrees)),
            TupleSpec::ProductCp1 { bidegrees } => PolarizedTuple::product_cp1(
                &bidegrees.iter().map(|(a, b)| (a.0.clone(), b.0.clone())).collect::<Vec<_>>(),
            ),
            TupleSpec::Toric { polytopes } => PolarizedTuple::new(
                crate::toriclat::Model::Toric,
                polytopes.iter().map(|p| p.to_polytope()).collect::<Result<Vec<_>>>()?,
            ),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub l: Vec<QIn>,
    #[serde(default)]
    pub shifts: Option<Vec<QIn>>,
    #[serde(default)]
    pub normalization: Option<Normalization>,
}

impl ActionSpec {
    pub fn build(&self, tuple: &PolarizedTuple) -> Result<TorusAction> {
        let l = qs(&self.l);
        if l.len() != tuple.n() {
            return Err(Error::Dimension(format!("action has {} weights, manifold has dimension {}", l.len(), tuple.n())));
        }
        let trivial = l.iter().all(|x| *x == Q::from_integer(0.into()));
        let action = match (&self.shifts, self.normalization) {
            (Some(s), None | Some(Normalization::Explicit)) => {
                if trivial {
                    TorusAction { l, shifts: qs(s), normalization: Normalization::Explicit }
                } else {
                    TorusAction::new(l, qs(s))?
                }
            }
            (Some(_), Some(_)) => {
                return Err(Error::Invalid("give either explicit shifts or a normalization".into()))
            }
            (None, Some(Normalization::Explicit)) => {
                return Err(Error::Invalid("explicit normalization needs shifts".into()))
            }
            (None, norm) => TorusAction::normalized(l, tuple, norm.unwrap_or(Normalization::MinZero))?,
        };
        action.check(tuple)?;
        Ok(action)
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    /// Chebyshev coefficients per bundle; missing entries mean the round metric.
    #[serde(default)]
    pub coeffs: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverride {
    pub panels: Option<usize>,
    pub order: Option<usize>,
    pub cutoff: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BergmanSpec {
    pub ks: Vec<u32>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    200
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_equation")]
    pub equation: Equation,
    #[serde(default, flatten)]
    pub config: SolveConfig,
}

fn default_equation() -> Equation {
    Equation::CoupledCscK
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub directions: Vec<Vec<f64>>,
    pub s: Vec<f64>,
    pub invariant: InvariantKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<String>,
    pub format: Option<Format>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default)]
    pub command: Option<String>,
    pub tuple: TupleSpec,
    #[serde(default)]
    pub metric: Option<MetricSpec>,
    #[serde(default)]
    pub action: Option<ActionSpec>,
    #[serde(default)]
    pub twist: Option<TwistJson>,
    #[serde(default)]
    pub quadrature: Option<QuadratureOverride>,
    #[serde(default)]
    pub bergman: Option<BergmanSpec>,
    #[serde(default)]
    pub solver: Option<SolverSpec>,
    #[serde(default)]
    pub scan: Option<ScanSpec>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn tuple(&self) -> Result<PolarizedTuple> {
        self.tuple.build()
    }

    /// The configured action, or the trivial one.
    pub fn action(&self, tuple: &PolarizedTuple) -> Result<TorusAction> {
        match &self.action {
            Some(a) => a.build(tuple),
            None => Ok(TorusAction::trivial(tuple)),
        }
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        let mut q = QuadratureSpec::default();
        if let Some(o) = &self.quadrature {
            q.panels = o.panels.unwrap_or(q.panels);
            q.order = o.order.unwrap_or(q.order);
            q.cutoff = o.cutoff.unwrap_or(q.cutoff);
        }
        q
    }

    pub fn metric(&self) -> Result<MetricTuple> {
        let degrees = match &self.tuple {
            TupleSpec::Cp1 { degrees } => degrees.iter().map(|d| fmt_q(&d.0)).collect(),
            _ => return Err(Error::Scope("metric computations are implemented on CP1 only".into())),
        };
        let json = MetricJson {
            degrees,
            coeffs: self.metric.clone().unwrap_or_default().coeffs,
            twist: self.twist.clone(),
        };
        json.build()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(1e-6)
    }

    pub fn bergman_nodes(&self) -> Vec<crate::geom1d::Node> {
        sample_nodes(self.bergman.as_ref().map(|b| b.samples).unwrap_or(default_samples()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects_unknown_fields() {
        let c = JobConfig::from_json(r#"{"tuple":{"model":"CP1","degrees":[1,"1/2",0.5]}}"#).unwrap();
        assert_eq!(c.tuple().unwrap().len(), 3);
        assert!(JobConfig::from_json(r#"{"tuple":{"model":"CP1","degrees":[1]},"bogus":1}"#).is_err());
        assert!(JobConfig::from_json(r#"{"tuple":{"model":"CP1","degrees":[1],"x":2}}"#).is_err());
        assert!(JobConfig::from_json(r#"{"tuple":{"model":"CP1","degrees":[1]},"solver":{"tol":1e-9,"oops":1}}"#).is_err());
        let c = JobConfig::from_json(r#"{"tuple":{"model":"CP1","degrees":[1]},"solver":{"tol":1e-9,"gauge":"even-symmetry"}}"#).unwrap();
        assert_eq!(c.solver.unwrap().config.tol, 1e-9);
    }

    #[test]
    fn default_normalization_is_min_zero() {
        let c = JobConfig::from_json(r#"{"tuple":{"model":"CP1","degrees":[2,1]},"action":{"l":[1]}}"#).unwrap();
        let t = c.tuple().unwrap();
        let a = c.action(&t).unwrap();
        assert_eq!(a.normalization, Normalization::MinZero);
        assert!(a.shifts.iter().all(|s| *s == Q::from_integer(0.into())));
    }

    #[test]
    fn toric_and_product() {
        let c = JobConfig::from_json(
            r#"{"tuple":{"model":"toric","polytopes":[{"vertices":[["0","0"],["1","0"],["0","1"]]}]}}"#,
        )
        .unwrap();
        assert_eq!(c.tuple().unwrap().n(), 2);
        let c = JobConfig::from_json(r#"{"tuple":{"model":"CP1xCP1","bidegrees":[[1,1],["1/2",2]]}}"#).unwrap();
        assert_eq!(c.tuple().unwrap().len(), 2);
        assert!(c.metric().is_err());
    }
}
