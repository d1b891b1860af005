//! Chains over ℤ and ℤ/2, the boundary operator, and labeling flows.
//!
//! A chain stores one coefficient per canonical (sorted, `Pos`) simplex. A
//! term on the opposite orientation contributes the negated coefficient, so
//! `⟨S̄⟩ = −⟨S⟩` holds without bookkeeping.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ComplexError, OrientedSimplex, PseudoManifold, Sign, Simplex, Vertex};

pub type Label = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("boundary of a 0-chain is undefined")]
    ZeroDimensional,
    #[error("simplex {simplex} has dimension {found}, chain has dimension {expected}")]
    DimensionMismatch {
        simplex: Simplex,
        expected: usize,
        found: usize,
    },
    #[error("chains live over different rings")]
    RingMismatch,
    #[error("MissingLabel: vertex {0} is unlabeled")]
    MissingLabel(Vertex),
    #[error("ℤ chains need an oriented manifold")]
    NotOriented,
    #[error("integer coefficient overflow")]
    Overflow,
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Coefficient ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ring {
    Z,
    Z2,
}

impl Ring {
    pub fn reduce(self, x: i64) -> i64 {
        match self {
            Ring::Z => x,
            Ring::Z2 => x.rem_euclid(2),
        }
    }

    pub fn add(self, a: i64, b: i64) -> Result<i64, ChainError> {
        a.checked_add(b)
            .map(|x| self.reduce(x))
            .ok_or(ChainError::Overflow)
    }

    pub fn mul(self, a: i64, b: i64) -> Result<i64, ChainError> {
        a.checked_mul(b)
            .map(|x| self.reduce(x))
            .ok_or(ChainError::Overflow)
    }

    /// `(-1)^d · x` in this ring.
    pub fn alternate(self, d: usize, x: i64) -> i64 {
        self.reduce(Sign::alternating(d).as_i64() * x)
    }
}

/// A vertex labeling. Serializes as `{"labels": {"<vertex>": label, ...}}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeling {
    pub labels: BTreeMap<Vertex, Label>,
}

impl Labeling {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: Vertex) -> Option<Label> {
        self.labels.get(&v).copied()
    }

    pub fn insert(&mut self, v: Vertex, l: Label) {
        self.labels.insert(v, l);
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels_of(&self, s: &Simplex) -> Result<Vec<Label>, ChainError> {
        s.vertices()
            .iter()
            .map(|&v| self.get(v).ok_or(ChainError::MissingLabel(v)))
            .collect()
    }
}

impl FromIterator<(Vertex, Label)> for Labeling {
    fn from_iter<I: IntoIterator<Item = (Vertex, Label)>>(iter: I) -> Self {
        Labeling {
            labels: iter.into_iter().collect(),
        }
    }
}

/// Flow of an oriented simplex given the labels of its sorted vertices.
///
/// Nonzero only when the labels are exactly `{0, …, d}`; the value is the
/// simplex sign times the parity of the permutation sorting the labels.
pub fn label_flow(labels: &[Label], sign: Sign) -> i64 {
    let d1 = labels.len();
    let mut seen = 0u64;
    for &l in labels {
        if l as usize >= d1 || d1 > 64 {
            return 0;
        }
        let bit = 1u64 << l;
        if seen & bit != 0 {
            return 0;
        }
        seen |= bit;
    }
    (sign * crate::complex::sorting_parity(labels)).as_i64()
}

/// Formal linear combination of oriented `dim`-simplices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    ring: Ring,
    dim: usize,
    coeffs: BTreeMap<Simplex, i64>,
}

impl Chain {
    pub fn zero(ring: Ring, dim: usize) -> Self {
        Chain {
            ring,
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_terms<'a>(
        ring: Ring,
        dim: usize,
        terms: impl IntoIterator<Item = (&'a OrientedSimplex, i64)>,
    ) -> Result<Self, ChainError> {
        let mut c = Chain::zero(ring, dim);
        for (s, k) in terms {
            c.add_term(s, k)?;
        }
        Ok(c)
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `k·⟨s⟩`.
    pub fn add_term(&mut self, s: &OrientedSimplex, k: i64) -> Result<(), ChainError> {
        if s.dim() != self.dim {
            return Err(ChainError::DimensionMismatch {
                simplex: s.base.clone(),
                expected: self.dim,
                found: s.dim(),
            });
        }
        let delta = self.ring.mul(s.sign.as_i64(), k)?;
        let entry = self.coeffs.entry(s.base.clone()).or_insert(0);
        *entry = self.ring.add(*entry, delta)?;
        if *entry == 0 {
            self.coeffs.remove(&s.base);
        }
        Ok(())
    }

    /// Coefficient of the `Pos`-oriented canonical representative.
    pub fn coefficient(&self, s: &Simplex) -> i64 {
        self.coeffs.get(s).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Simplex, i64)> {
        self.coeffs.iter().map(|(s, &k)| (s, k))
    }

    pub fn add(&self, other: &Chain) -> Result<Chain, ChainError> {
        if self.ring != other.ring {
            return Err(ChainError::RingMismatch);
        }
        let mut out = self.clone();
        for (s, k) in other.terms() {
            out.add_term(&OrientedSimplex::new(s.clone(), Sign::Pos), k)?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Chain {
        Chain {
            ring: self.ring,
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .filter_map(|(s, &k)| {
                    let v = self.ring.reduce(-k);
                    (v != 0).then(|| (s.clone(), v))
                })
                .collect(),
        }
    }

    /// Reinterprets the coefficients in another ring (ℤ → ℤ/2 reduces mod 2).
    pub fn with_ring(&self, ring: Ring) -> Chain {
        Chain {
            ring,
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .filter_map(|(s, &k)| {
                    let v = ring.reduce(k);
                    (v != 0).then(|| (s.clone(), v))
                })
                .collect(),
        }
    }
}

/// `∂_d`, extended linearly from `∂⟨(v0..vd)⟩ = Σ (-1)^i ⟨(v0..v̂i..vd)⟩`.
pub fn boundary_chain(c: &Chain) -> Result<Chain, ChainError> {
    if c.dim == 0 {
        return Err(ChainError::ZeroDimensional);
    }
    let mut out = Chain::zero(c.ring, c.dim - 1);
    for (s, k) in c.terms() {
        for i in 0..=c.dim {
            let face = OrientedSimplex::new(s.omit(i)?, Sign::alternating(i));
            out.add_term(&face, k)?;
        }
    }
    Ok(out)
}

/// `Σ_facets ⟨(S, τ_S)⟩`. ℤ requires a stored orientation; ℤ/2 uses the
/// canonical orientation when none is stored.
pub fn standard_chain(m: &PseudoManifold, ring: Ring) -> Result<Chain, ChainError> {
    if ring == Ring::Z && !m.is_oriented() {
        return Err(ChainError::NotOriented);
    }
    let facets: Vec<OrientedSimplex> = m.oriented_facets().collect();
    Chain::from_terms(ring, m.dim(), facets.iter().map(|f| (f, 1)))
}

/// Standard chain of the boundary complex, with the induced orientations.
pub fn boundary_standard_chain(m: &PseudoManifold, ring: Ring) -> Result<Chain, ChainError> {
    if ring == Ring::Z && !m.is_oriented() {
        return Err(ChainError::NotOriented);
    }
    let ridges = m.boundary_complex();
    Chain::from_terms(ring, m.dim() - 1, ridges.iter().map(|r| (r, 1)))
}

/// `N_d` of a single oriented simplex, as an integer in {-1, 0, 1}.
pub fn simplex_flow(s: &OrientedSimplex, l: &Labeling) -> Result<i64, ChainError> {
    Ok(label_flow(&l.labels_of(&s.base)?, s.sign))
}

/// `N_d[c]`, reduced in the chain's ring.
pub fn flow(c: &Chain, l: &Labeling) -> Result<i64, ChainError> {
    let mut total = 0i64;
    for (s, k) in c.terms() {
        let f = label_flow(&l.labels_of(s)?, Sign::Pos);
        total = c.ring.add(total, c.ring.mul(f, k)?)?;
    }
    Ok(total)
}

/// Both sides of the pseudo-manifold conservation law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Conservation {
    pub ring: Ring,
    /// `N_d[M̂]`
    pub interior: i64,
    /// `(-1)^d N_{d-1}[∂M̂]`
    pub boundary: i64,
}

impl Conservation {
    pub fn holds(&self) -> bool {
        self.interior == self.boundary
    }
}

/// Evaluates `N_d[M̂]` and `(-1)^d N_{d-1}[∂M̂]`, in ℤ when `m` is oriented
/// and in ℤ/2 otherwise.
pub fn check_conservation(m: &PseudoManifold, l: &Labeling) -> Result<Conservation, ChainError> {
    let ring = if m.is_oriented() { Ring::Z } else { Ring::Z2 };
    let interior = flow(&standard_chain(m, ring)?, l)?;
    let b = flow(&boundary_standard_chain(m, ring)?, l)?;
    Ok(Conservation {
        ring,
        interior,
        boundary: ring.alternate(m.dim(), b),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalConservation {
    pub simplex_flow: i64,
    /// Induced faces with nonzero `N_{d-1}`, with that flow.
    pub nonzero_faces: Vec<(OrientedSimplex, i64)>,
}

impl LocalConservation {
    /// At most two faces carry flow; with two, they cancel and the simplex carries none.
    pub fn holds(&self) -> bool {
        match self.nonzero_faces.as_slice() {
            [] | [_] => true,
            [(_, a), (_, b)] => self.simplex_flow == 0 && *a == -*b,
            _ => false,
        }
    }
}

pub fn local_conservation(
    s: &OrientedSimplex,
    l: &Labeling,
) -> Result<LocalConservation, ChainError> {
    let own = simplex_flow(s, l)?;
    let mut nonzero_faces = Vec::new();
    if s.dim() > 0 {
        for face in s.induced_faces()? {
            let f = simplex_flow(&face, l)?;
            if f != 0 {
                nonzero_faces.push((face, f));
            }
        }
    }
    Ok(LocalConservation {
        simplex_flow: own,
        nonzero_faces,
    })
}
