//! Query-counted, cached access to a hidden labeling.
//!
//! Solvers read labels only through [`LabelingOracle::query`]. The hidden
//! side is any [`LabelSource`]: a materialized [`Labeling`], a closed-form rule,
//! or another oracle (as in the SNAKE reduction).

use std::collections::HashMap;

use thiserror::Error;

use crate::chain::{Label, Labeling};
use crate::complex::Vertex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("UnknownVertex: {0} is outside the oracle's domain")]
    UnknownVertex(Vertex),
    #[error("OracleContradiction: vertex {vertex} seeded with {seeded}, hidden label is {hidden}")]
    OracleContradiction {
        vertex: Vertex,
        seeded: Label,
        hidden: Label,
    },
}

/// The hidden side of an oracle.
pub trait LabelSource {
    fn contains(&self, v: Vertex) -> bool;
    /// Reads a label; sources backed by another oracle pay for it there.
    fn fetch(&mut self, v: Vertex) -> Label;
    /// Reads a label without charging anything (audits only).
    fn peek(&self, v: Vertex) -> Label;
}

impl LabelSource for Labeling {
    fn contains(&self, v: Vertex) -> bool {
        self.get(v).is_some()
    }

    fn fetch(&mut self, v: Vertex) -> Label {
        self.peek(v)
    }

    fn peek(&self, v: Vertex) -> Label {
        self.get(v).expect("checked by contains")
    }
}

#[derive(Debug, Clone)]
pub struct LabelingOracle<S> {
    source: S,
    cache: HashMap<Vertex, Label>,
    seeded: HashMap<Vertex, Label>,
}

impl<S: LabelSource> LabelingOracle<S> {
    pub fn new(source: S) -> Self {
        LabelingOracle {
            source,
            cache: HashMap::new(),
            seeded: HashMap::new(),
        }
    }

    /// `ℓ(v)`; the first paid read of a vertex increments the count.
    /// Seeded vertices are free and checked against the hidden label on first use.
    pub fn query(&mut self, v: Vertex) -> Result<Label, OracleError> {
        if let Some(&l) = self.cache.get(&v) {
            return Ok(l);
        }
        if !self.source.contains(v) {
            return Err(OracleError::UnknownVertex(v));
        }
        if let Some(&l) = self.seeded.get(&v) {
            let hidden = self.source.peek(v);
            if hidden != l {
                return Err(OracleError::OracleContradiction {
                    vertex: v,
                    seeded: l,
                    hidden,
                });
            }
            return Ok(l);
        }
        let l = self.source.fetch(v);
        self.cache.insert(v, l);
        Ok(l)
    }

    /// Inserts known labels at no cost.
    pub fn seed_labels(&mut self, known: &Labeling) -> Result<(), OracleError> {
        for (&v, &l) in &known.labels {
            if !self.source.contains(v) {
                return Err(OracleError::UnknownVertex(v));
            }
            if let Some(&c) = self.cache.get(&v) {
                if c != l {
                    return Err(OracleError::OracleContradiction {
                        vertex: v,
                        seeded: l,
                        hidden: c,
                    });
                }
                continue;
            }
            self.seeded.insert(v, l);
        }
        Ok(())
    }

    /// Number of distinct paid queries.
    pub fn count(&self) -> usize {
        self.cache.len()
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    pub fn into_source(self) -> S {
        self.source
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hidden() -> Labeling {
        [(0, 0), (1, 1), (2, 2), (7, 1)].into_iter().collect()
    }

    #[test]
    fn repeated_queries_count_once() {
        let mut o = LabelingOracle::new(hidden());
        assert_eq!(o.count(), 0);
        assert_eq!(o.query(1), Ok(1));
        assert_eq!(o.query(1), Ok(1));
        assert_eq!(o.count(), 1);
        assert_eq!(o.query(9), Err(OracleError::UnknownVertex(9)));
        assert_eq!(o.count(), 1);
    }

    #[test]
    fn seeded_labels_are_free() {
        let mut o = LabelingOracle::new(hidden());
        o.seed_labels(&[(0, 0), (2, 2)].into_iter().collect()).unwrap();
        assert_eq!(o.query(0), Ok(0));
        assert_eq!(o.query(2), Ok(2));
        assert_eq!(o.count(), 0);
    }

    #[test]
    fn wrong_seed_is_detected() {
        let mut o = LabelingOracle::new(hidden());
        o.seed_labels(&[(7, 2)].into_iter().collect()).unwrap();
        assert_eq!(
            o.query(7),
            Err(OracleError::OracleContradiction {
                vertex: 7,
                seeded: 2,
                hidden: 1
            })
        );
        let mut o = LabelingOracle::new(hidden());
        o.query(7).unwrap();
        assert!(o.seed_labels(&[(7, 0)].into_iter().collect()).is_err());
    }
}
