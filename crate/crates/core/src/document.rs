//! Metric definition files.
//!
//! A document is TOML with a `format = 1` header and the sections
//! `[metric]`, `[isothermic]`, `[binary]`, `[potential]`, `[ansatz]`,
//! `[separation]` and `[constants]`. Unknown keys are rejected.
//!
//! ```toml
//! format = 1
//!
//! [constants]
//! alpha = 2.0
//!
//! [metric]
//! coords = ["r", "theta", "phi"]
//! H = ["1", "r", "r*sin(theta)"]
//! domain = [[0.5, 2.0], [0.3, 2.8], [0.0, 6.0]]
//!
//! [separation]
//! q = ["-alpha/r^2", "alpha", "0"]
//! ```
//!
//! Expressions in `[metric]`, `[isothermic]`, `[binary]` and `V` range over
//! all coordinates. Per-axis expressions (`p`, `q`, `phi`, ansatz basis)
//! range over their own coordinate only.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{ParseError, ScalarField};
use crate::metric::{self, BinaryForm, DiagonalMetric, IsothermicForm, MetricError};
use crate::sampling::Interval;
use crate::separation::{integrate_system, Coefficient, PhiSource, QAnsatz, SeparationError, SeparationSystem};

pub const FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DocumentError {
    #[error("malformed document: {0}")]
    Toml(String),
    #[error("unsupported format {0}, expected {FORMAT}")]
    Format(u32),
    #[error("in {field}: {source}")]
    Expression { field: String, source: ParseError },
    #[error("{what}: expected {expected} entries, got {got}")]
    Shape { what: String, expected: usize, got: usize },
    #[error("{0}")]
    Missing(&'static str),
    #[error("constant `{0}` is not finite")]
    Constant(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDocument {
    pub format: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, f64>,
    pub metric: MetricSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isothermic: Option<FormSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binary: Option<FormSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ansatz: Option<AnsatzSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<SeparationSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    pub coords: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Vec<i8>>,
    /// Lamé coefficients; assembled from a form when absent.
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<String>>,
    pub domain: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub guards: Vec<String>,
}

/// `[isothermic]` takes one `G` per axis, `[binary]` one per pair `i < j`
/// in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSection {
    #[serde(rename = "R")]
    pub r: String,
    #[serde(rename = "G")]
    pub g: Vec<String>,
    pub f: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2_sign: Option<Vec<i8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub v: Option<String>,
    #[serde(default)]
    pub k2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSection {
    pub basis: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationSection {
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    /// Defaults to `f_i'/f_i` from the declared form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<String>>,
    pub q: Vec<String>,
    /// Closed-form factors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<String>>,
    /// `(φ, φ')` at the lower end of each interval, for integration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0: Option<Vec<[f64; 2]>>,
}

impl MetricDocument {
    pub fn from_toml(text: &str) -> Result<MetricDocument, DocumentError> {
        let doc: MetricDocument = toml::from_str(text).map_err(|e| DocumentError::Toml(e.message().to_string()))?;
        if doc.format != FORMAT {
            return Err(DocumentError::Format(doc.format));
        }
        Ok(doc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("documents always serialize")
    }

    pub fn build(&self) -> Result<Model, DocumentError> {
        Builder::new(self)?.build()
    }
}

/// Separation data of a document.
#[derive(Debug, Clone)]
pub struct SeparationSpec {
    pub system: SeparationSystem,
    pub phi: Option<Vec<ScalarField>>,
    pub phi0: Option<Vec<(f64, f64)>>,
}

impl SeparationSpec {
    /// Closed forms when given, otherwise integrated factors.
    pub fn sources(&self, steps: usize) -> Option<Result<Vec<PhiSource>, SeparationError>> {
        if let Some(phi) = &self.phi {
            return Some(Ok(phi.iter().cloned().map(PhiSource::Closed).collect()));
        }
        let init = self.phi0.as_ref()?;
        Some(integrate_system(&self.system, init, steps))
    }
}

/// A document turned into numerical objects.
#[derive(Debug, Clone)]
pub struct Model {
    pub name: Option<String>,
    pub metric: Arc<DiagonalMetric>,
    pub isothermic: Option<IsothermicForm>,
    pub binary: Option<BinaryForm>,
    /// The factor `R` checked by the first condition.
    pub r: ScalarField,
    pub potential: Option<ScalarField>,
    pub k2: f64,
    pub ansatz: Option<QAnsatz>,
    pub separation: Option<SeparationSpec>,
}

struct Builder<'a> {
    doc: &'a MetricDocument,
    coords: Arc<[String]>,
    constants: Vec<(String, f64)>,
}

impl<'a> Builder<'a> {
    fn new(doc: &'a MetricDocument) -> Result<Builder<'a>, DocumentError> {
        let coords: Arc<[String]> = Arc::from(doc.metric.coords.clone());
        if coords.is_empty() || coords.len() > metric::MAX_DIM {
            return Err(MetricError::Dimension(coords.len()).into());
        }
        let mut constants = Vec::with_capacity(doc.constants.len());
        for (k, v) in &doc.constants {
            if !v.is_finite() {
                return Err(DocumentError::Constant(k.clone()));
            }
            constants.push((k.clone(), *v));
        }
        Ok(Builder { doc, coords, constants })
    }

    fn n(&self) -> usize {
        self.coords.len()
    }

    fn field(&self, what: &str, text: &str) -> Result<ScalarField, DocumentError> {
        ScalarField::parse_in(text, &self.coords, &self.constants)
            .map_err(|source| DocumentError::Expression { field: what.to_string(), source })
    }

    fn fields(&self, what: &str, texts: &[String], expected: usize) -> Result<Vec<ScalarField>, DocumentError> {
        shape(what, expected, texts.len())?;
        texts.iter().enumerate().map(|(i, t)| self.field(&format!("{what}[{}]", i + 1), t)).collect()
    }

    fn axis_field(&self, what: &str, axis: usize, text: &str) -> Result<ScalarField, DocumentError> {
        let single: Arc<[String]> = Arc::from(vec![self.coords[axis].clone()]);
        ScalarField::parse_in(text, &single, &self.constants)
            .map_err(|source| DocumentError::Expression { field: format!("{what}[{}]", axis + 1), source })
    }

    fn axis_fields(&self, what: &str, texts: &[String]) -> Result<Vec<ScalarField>, DocumentError> {
        shape(what, self.n(), texts.len())?;
        texts.iter().enumerate().map(|(i, t)| self.axis_field(what, i, t)).collect()
    }

    fn signs(&self, what: &str, s: &Option<Vec<i8>>) -> Result<Vec<i8>, DocumentError> {
        match s {
            Some(v) => {
                shape(what, self.n(), v.len())?;
                Ok(v.clone())
            }
            None => Ok(vec![1; self.n()]),
        }
    }

    fn build(&self) -> Result<Model, DocumentError> {
        let doc = self.doc;
        let n = self.n();
        let domain = {
            shape("metric.domain", n, doc.metric.domain.len())?;
            doc.metric.domain.iter().map(|[lo, hi]| Interval::new(*lo, *hi)).collect::<Vec<_>>()
        };
        let guards = doc
            .metric
            .guards
            .iter()
            .enumerate()
            .map(|(i, g)| self.field(&format!("metric.guards[{}]", i + 1), g))
            .collect::<Result<Vec<_>, _>>()?;

        let isothermic = match &doc.isothermic {
            Some(s) => Some(IsothermicForm {
                r: self.field("isothermic.R", &s.r)?,
                g: self.fields("isothermic.G", &s.g, n)?,
                f: self.fields("isothermic.f", &s.f, n)?,
                f2_sign: self.signs("isothermic.f2_sign", &s.f2_sign)?,
            }),
            None => None,
        };
        let binary = match &doc.binary {
            Some(s) => Some(BinaryForm {
                r: self.field("binary.R", &s.r)?,
                pairs: self.fields("binary.G", &s.g, n * n.saturating_sub(1) / 2)?,
                f: self.fields("binary.f", &s.f, n)?,
                f2_sign: self.signs("binary.f2_sign", &s.f2_sign)?,
            }),
            None => None,
        };

        let (lame, default_signature) = match &doc.metric.h {
            Some(h) => (self.fields("metric.H", h, n)?, vec![1; n]),
            None => match (&isothermic, &binary) {
                (Some(form), _) => (form.lame()?, form.f2_sign.clone()),
                (None, Some(form)) => (form.lame()?, form.f2_sign.clone()),
                (None, None) => return Err(DocumentError::Missing("metric.H is required without a form")),
            },
        };
        let signature = match &doc.metric.signature {
            Some(s) => {
                shape("metric.signature", n, s.len())?;
                s.clone()
            }
            None => default_signature,
        };
        let metric = Arc::new(DiagonalMetric::new(self.coords.clone(), signature, lame, domain, guards)?);

        let declared_r = doc.separation.as_ref().and_then(|s| s.r.as_deref());
        let r = match (declared_r, &isothermic, &binary) {
            (Some(t), _, _) => self.field("separation.R", t)?,
            (None, Some(f), _) => f.r.clone(),
            (None, None, Some(f)) => f.r.clone(),
            (None, None, None) => ScalarField::constant(1.0, &self.coords),
        };

        let (potential, k2) = match &doc.potential {
            Some(p) => (p.v.as_deref().map(|t| self.field("potential.V", t)).transpose()?, p.k2),
            None => (None, 0.0),
        };
        if !k2.is_finite() {
            return Err(DocumentError::Constant("k2".into()));
        }

        let ansatz = match &doc.ansatz {
            Some(a) => {
                shape("ansatz.basis", n, a.basis.len())?;
                let basis = a
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(i, row)| row.iter().map(|t| self.axis_field("ansatz.basis", i, t)).collect())
                    .collect::<Result<Vec<Vec<_>>, _>>()?;
                Some(QAnsatz { basis })
            }
            None => None,
        };

        let separation = match &doc.separation {
            Some(s) => {
                let form_f = isothermic.as_ref().map(|f| &f.f).or(binary.as_ref().map(|f| &f.f));
                let p = match (&s.p, form_f) {
                    (Some(p), _) => self.axis_fields("separation.p", p)?.into_iter().map(Coefficient::Field).collect(),
                    (None, Some(f)) => f
                        .iter()
                        .enumerate()
                        .map(|(i, fi)| {
                            fi.to_univariate(i).map(Coefficient::LogDerivative).ok_or(DocumentError::Missing(
                                "separation.p is required when some f_i depends on other coordinates",
                            ))
                        })
                        .collect::<Result<Vec<_>, _>>()?,
                    (None, None) => return Err(DocumentError::Missing("separation.p is required without a form")),
                };
                let q = self.axis_fields("separation.q", &s.q)?;
                let mut system = SeparationSystem::new(metric.clone(), r.clone(), p, q, potential.clone(), k2)?;
                if let Some(f) = isothermic.as_ref().map(|f| &f.f2_sign).or(binary.as_ref().map(|f| &f.f2_sign)) {
                    system.f2_sign = f.clone();
                }
                let phi = s.phi.as_ref().map(|t| self.axis_fields("separation.phi", t)).transpose()?;
                let phi0 = match &s.phi0 {
                    Some(v) => {
                        shape("separation.phi0", n, v.len())?;
                        Some(v.iter().map(|[a, b]| (*a, *b)).collect())
                    }
                    None => None,
                };
                Some(SeparationSpec { system, phi, phi0 })
            }
            None => None,
        };

        Ok(Model { name: doc.name.clone(), metric, isothermic, binary, r, potential, k2, ansatz, separation })
    }
}

fn shape(what: &str, expected: usize, got: usize) -> Result<(), DocumentError> {
    if expected != got {
        return Err(DocumentError::Shape { what: what.to_string(), expected, got });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPHERICAL: &str = r#"
format = 1

[constants]
alpha = 2.0
beta = 0.5

[metric]
coords = ["r", "theta", "phi"]
H = ["1", "r", "r*sin(theta)"]
domain = [[0.5, 2.0], [0.3, 2.8], [0.0, 6.0]]

[isothermic]
R = "1"
G = ["sin(theta)", "r", "r"]
f = ["r^2", "sin(theta)", "1"]

[separation]
q = ["-alpha/r^2", "alpha - beta/sin(theta)^2", "beta"]
phi0 = [[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]
"#;

    #[test]
    fn loads_and_round_trips() {
        let doc = MetricDocument::from_toml(SPHERICAL).unwrap();
        let model = doc.build().unwrap();
        assert_eq!(model.metric.dim(), 3);
        let sep = model.separation.as_ref().unwrap();
        assert!((sep.system.p[0].value(1.5).unwrap() - 2.0 / 1.5).abs() < 1e-14);
        assert!((sep.system.q[0].eval(&[2.0]).unwrap() + 0.5).abs() < 1e-15);
        let again = MetricDocument::from_toml(&doc.to_toml()).unwrap();
        assert_eq!(again, doc);
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        let extra = SPHERICAL.replace("[metric]", "[metric]\ncolour = 1");
        assert!(matches!(MetricDocument::from_toml(&extra), Err(DocumentError::Toml(_))));
        let v2 = SPHERICAL.replace("format = 1", "format = 2");
        assert!(matches!(MetricDocument::from_toml(&v2), Err(DocumentError::Format(2))));
    }

    #[test]
    fn reports_bad_expressions() {
        let bad = SPHERICAL.replace("\"r*sin(theta)\"", "\"r*sin(\"");
        let err = MetricDocument::from_toml(&bad).unwrap().build().unwrap_err();
        assert!(matches!(err, DocumentError::Expression { ref field, .. } if field == "metric.H[3]"), "{err}");
        let wrong_axis = SPHERICAL.replace("\"beta\"]", "\"beta*r\"]");
        assert!(MetricDocument::from_toml(&wrong_axis).unwrap().build().is_err());
    }

    #[test]
    fn lame_from_form() {
        let text = SPHERICAL.replace("H = [\"1\", \"r\", \"r*sin(theta)\"]\n", "");
        let model = MetricDocument::from_toml(&text).unwrap().build().unwrap();
        let h = model.metric.lame()[2].eval(&[1.5, 1.0, 0.0]).unwrap();
        assert!((h - 1.5 * 1f64.sin()).abs() < 1e-14);
    }
}
