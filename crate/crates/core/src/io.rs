//! JSON instance files.
//!
//! ```json
//! {"dimension": 2, "facets": [[0,1,2],[1,2,3]], "orientation": [1,-1],
//!  "labels": {"0": 0, "1": 1}, "start": [0,1,2],
//!  "rule": {"family": "regular2spm", "m": 9, "b": "0100110"}}
//! ```
//!
//! `orientation[k]` is relative to the vertex order in which facet `k` is
//! listed. `labels`, `start` and `rule` are optional; a labeling file on its
//! own is `{"labels": {...}}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{Label, Labeling};
use crate::complex::{ComplexError, OrientedSimplex, PseudoManifold, Sign, Simplex, Vertex};
use crate::instances::{bits_len, labeling_cb, regular_subdivision, BitSequence, InstanceError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("orientation entries must be 1 or -1, got {0}")]
    BadSign(i64),
    #[error("orientation has {found} entries for {expected} facets")]
    OrientationLength { expected: usize, found: usize },
    #[error("unknown rule family {0:?}")]
    UnknownRule(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Generator tag standing in for an explicit labeling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleTag {
    pub family: String,
    pub m: u32,
    pub b: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub dimension: usize,
    pub facets: Vec<Vec<Vertex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<BTreeMap<Vertex, Label>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<Vertex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleTag>,
}

/// A parsed instance: manifold plus whatever labeling information it carries.
#[derive(Debug, Clone)]
pub struct Instance {
    pub manifold: PseudoManifold,
    pub labels: Option<Labeling>,
    pub start: Option<Simplex>,
    pub rule: Option<RuleTag>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Validates the manifold and resolves labels (explicit ones win over a rule).
    pub fn into_instance(self) -> Result<Instance, IoError> {
        let manifold = match &self.orientation {
            None => PseudoManifold::new(
                self.dimension,
                self.facets
                    .iter()
                    .map(|f| Simplex::new(f.iter().copied()))
                    .collect::<Result<_, _>>()?,
            )?,
            Some(signs) => {
                if signs.len() != self.facets.len() {
                    return Err(IoError::OrientationLength {
                        expected: self.facets.len(),
                        found: signs.len(),
                    });
                }
                let oriented = self
                    .facets
                    .iter()
                    .zip(signs)
                    .map(|(f, &s)| {
                        let sign = Sign::from_i64(s).ok_or(IoError::BadSign(s))?;
                        let o = OrientedSimplex::from_ordering(f)?;
                        Ok(OrientedSimplex::new(o.base, o.sign * sign))
                    })
                    .collect::<Result<Vec<_>, IoError>>()?;
                PseudoManifold::from_oriented(self.dimension, &oriented)?
            }
        };
        let labels = match (self.labels, &self.rule) {
            (Some(l), _) => Some(l.into_iter().collect()),
            (None, Some(rule)) => Some(rule_labels(rule)?),
            (None, None) => None,
        };
        let start = self
            .start
            .map(|s| Simplex::new(s.iter().copied()))
            .transpose()?;
        Ok(Instance {
            manifold,
            labels,
            start,
            rule: self.rule,
        })
    }

    /// Serializes a manifold; oriented facets are listed in their positive order with sign 1.
    pub fn from_manifold(m: &PseudoManifold) -> Self {
        let (facets, orientation) = if m.is_oriented() {
            (
                m.oriented_facets().map(|f| f.ordering()).collect(),
                Some(vec![1; m.len()]),
            )
        } else {
            (m.facets().iter().map(|f| f.vertices().to_vec()).collect(), None)
        };
        InstanceFile {
            dimension: m.dim(),
            facets,
            orientation,
            labels: None,
            start: None,
            rule: None,
        }
    }

    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("plain data");
        serde_json::to_string_pretty(&v).expect("plain data")
    }
}

fn rule_labels(rule: &RuleTag) -> Result<Labeling, IoError> {
    match rule.family.as_str() {
        "regular2spm" | "snake" => {
            let b: BitSequence = rule.b.parse()?;
            Ok(labeling_cb(&b, rule.m)?)
        }
        other => Err(IoError::UnknownRule(other.to_string())),
    }
}

/// The REGULAR 2-SPM instance for `(m, b)` with its rule tag and labels.
pub fn regular_instance_file(family: &str, m: u32, b: &BitSequence) -> Result<InstanceFile, IoError> {
    if b.len() != bits_len(m) {
        return Err(InstanceError::LengthMismatch {
            expected: bits_len(m),
            found: b.len(),
        }
        .into());
    }
    let mut f = InstanceFile::from_manifold(&regular_subdivision(m)?);
    f.labels = Some(labeling_cb(b, m)?.labels);
    f.rule = Some(RuleTag {
        family: family.to_string(),
        m,
        b: b.to_string(),
    });
    Ok(f)
}

/// Parses a `{"labels": {...}}` document.
pub fn parse_labeling(text: &str) -> Result<Labeling, IoError> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_oriented() {
        let m = regular_subdivision(3).unwrap();
        let f = InstanceFile::from_manifold(&m);
        let back = InstanceFile::parse(&f.to_json()).unwrap().into_instance().unwrap();
        assert_eq!(back.manifold, m);
    }

    #[test]
    fn orientation_is_relative_to_listed_order() {
        let a = InstanceFile::parse(r#"{"dimension":2,"facets":[[0,1,2],[2,1,3]],"orientation":[1,1]}"#)
            .unwrap()
            .into_instance()
            .unwrap();
        let b = InstanceFile::parse(r#"{"dimension":2,"facets":[[0,1,2],[1,2,3]],"orientation":[1,-1]}"#)
            .unwrap()
            .into_instance()
            .unwrap();
        assert_eq!(a.manifold, b.manifold);
        assert!(InstanceFile::parse(r#"{"dimension":2,"facets":[[0,1,2],[1,2,3]],"orientation":[1,1]}"#)
            .unwrap()
            .into_instance()
            .is_err());
    }

    #[test]
    fn labels_and_rules() {
        let f = regular_instance_file("regular2spm", 4, &"01".parse().unwrap()).unwrap();
        let text = f.to_json();
        assert!(text.find("\"dimension\"").unwrap() < text.find("\"facets\"").unwrap());
        let inst = InstanceFile::parse(&text).unwrap().into_instance().unwrap();
        assert_eq!(inst.labels.unwrap().len(), 15);
        let l = parse_labeling(r#"{"labels":{"0":2,"5":1}}"#).unwrap();
        assert_eq!(l.get(5), Some(1));
        assert!(InstanceFile::parse("{").is_err());
    }
}
